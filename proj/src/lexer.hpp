#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace metriscope::detail {

enum class Tok : std::uint8_t {
    End,
    Identifier,
    Number,
    CharLit,
    StringLit,
    Punct,
    Preproc, // one whole directive line, continuations included
};

struct Token {
    Tok type = Tok::End;
    std::string_view text;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    bool is(std::string_view s) const { return text == s; }
};

/// Tokenizes C/C++ source. Comments and whitespace are dropped; every other
/// byte ends up in exactly one token. Never fails: unknown bytes become
/// single-character punctuation tokens.
std::vector<Token> lex(std::string_view source);

} // namespace metriscope::detail
