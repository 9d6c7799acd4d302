#include "lexer.hpp"

#include <array>
#include <cctype>
#include <string>

namespace metriscope::detail {

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_cont(unsigned char c) {
    return is_ident_start(c) || std::isdigit(c);
}

// Longest-match table, ordered by length.
constexpr std::array<std::string_view, 4> kPunct3 = {"<<=", ">>=", "...", "->*"};
constexpr std::array<std::string_view, 19> kPunct2 = {
    "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        bool line_start = true;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                line_start = true;
                ++pos_;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                skip_line_comment();
                continue;
            }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                skip_block_comment();
                continue;
            }
            if (c == '#' && line_start) {
                out.push_back(lex_preproc());
                line_start = true;
                continue;
            }
            line_start = false;
            out.push_back(next_token());
        }
        out.push_back(Token{Tok::End, {}, pos(), pos()});
        return out;
    }

private:
    std::uint32_t pos() const { return static_cast<std::uint32_t>(pos_); }

    Token make(Tok type, std::size_t begin) const {
        return Token{type, src_.substr(begin, pos_ - begin),
                     static_cast<std::uint32_t>(begin), pos()};
    }

    void skip_line_comment() {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
    }

    void skip_block_comment() {
        pos_ += 2;
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) ++pos_;
        pos_ = pos_ + 2 <= src_.size() ? pos_ + 2 : src_.size();
    }

    Token lex_preproc() {
        std::size_t begin = pos_;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '\n') {
                // Backslash (possibly followed by CR) continues the directive.
                std::size_t k = pos_;
                while (k > begin && (src_[k - 1] == '\r')) --k;
                if (k > begin && src_[k - 1] == '\\') {
                    ++pos_;
                    continue;
                }
                break;
            }
            if (src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                skip_block_comment();
                continue;
            }
            ++pos_;
        }
        return make(Tok::Preproc, begin);
    }

    Token next_token() {
        std::size_t begin = pos_;
        char c = src_[pos_];

        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(begin);
        }
        if (is_ident_start(static_cast<unsigned char>(c))) {
            // Possible encoding prefix of a character/string literal: L'x', u8"...", R"(..)".
            std::size_t k = pos_;
            while (k < src_.size() && is_ident_cont(static_cast<unsigned char>(src_[k]))) ++k;
            std::string_view word = src_.substr(pos_, k - pos_);
            if (k < src_.size() && (src_[k] == '"' || src_[k] == '\'') &&
                (word == "L" || word == "u" || word == "U" || word == "u8" || word == "R" ||
                 word == "LR" || word == "uR" || word == "UR" || word == "u8R")) {
                pos_ = k;
                bool raw = word.back() == 'R';
                if (src_[k] == '"') return raw ? lex_raw_string(begin) : lex_string(begin, '"');
                return lex_string(begin, '\'');
            }
            pos_ = k;
            return make(Tok::Identifier, begin);
        }
        if (c == '"') return lex_string(begin, '"');
        if (c == '\'') return lex_string(begin, '\'');

        for (auto p : kPunct3) {
            if (src_.substr(pos_, 3) == p) {
                pos_ += 3;
                return make(Tok::Punct, begin);
            }
        }
        for (auto p : kPunct2) {
            if (src_.substr(pos_, 2) == p) {
                pos_ += 2;
                return make(Tok::Punct, begin);
            }
        }
        ++pos_;
        return make(Tok::Punct, begin);
    }

    Token lex_number(std::size_t begin) {
        // Accept the union of integer/float syntax, including hex floats,
        // binary literals, digit separators and suffixes. Validation happens
        // later; the lexer only finds the token's extent.
        bool hex = false;
        if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
            (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X' ||
             src_[pos_ + 1] == 'b' || src_[pos_ + 1] == 'B')) {
            hex = src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X';
            pos_ += 2;
        }
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '\'') {
                // Exponent signs belong to the number: 1e-5, 0x1p+3.
                if ((c == 'e' || c == 'E') && !hex) {
                    ++pos_;
                    if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
                    continue;
                }
                if ((c == 'p' || c == 'P') && hex) {
                    ++pos_;
                    if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
                    continue;
                }
                ++pos_;
                continue;
            }
            break;
        }
        return make(Tok::Number, begin);
    }

    Token lex_string(std::size_t begin, char quote) {
        ++pos_; // opening quote
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                pos_ += 2;
                continue;
            }
            ++pos_;
            if (c == quote || c == '\n') break; // unterminated: stop at end of line
        }
        return make(quote == '"' ? Tok::StringLit : Tok::CharLit, begin);
    }

    Token lex_raw_string(std::size_t begin) {
        ++pos_; // opening quote
        std::size_t delim_begin = pos_;
        while (pos_ < src_.size() && src_[pos_] != '(' && src_[pos_] != '\n') ++pos_;
        std::string closer = ")";
        closer += std::string(src_.substr(delim_begin, pos_ - delim_begin));
        closer += '"';
        std::size_t found = src_.find(closer, pos_);
        pos_ = found == std::string_view::npos ? src_.size() : found + closer.size();
        return make(Tok::StringLit, begin);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<Token> lex(std::string_view source) {
    return Lexer(source).run();
}

} // namespace metriscope::detail
