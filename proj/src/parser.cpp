#include <algorithm>
#include <array>
#include <optional>
#include <unordered_set>

#include "kinds.hpp"
#include "lexer.hpp"
#include "metriscope/syntax.hpp"

namespace metriscope {

namespace k = kinds;
namespace f = kinds::fields;
using detail::Tok;
using detail::Token;

namespace {

const std::unordered_set<std::string_view> kPrimitiveTypes = {
    "void", "char", "int", "float", "double", "_Bool", "bool", "wchar_t",
    "size_t", "ssize_t", "intptr_t", "uintptr_t", "char16_t", "char32_t",
    "int8_t", "int16_t", "int32_t", "int64_t",
    "uint8_t", "uint16_t", "uint32_t", "uint64_t",
};

const std::unordered_set<std::string_view> kSizeModifiers = {
    "signed", "unsigned", "short", "long",
};

const std::unordered_set<std::string_view> kStorageSpecifiers = {
    "static", "extern", "register", "typedef", "inline", "__inline", "__inline__",
    "constexpr", "thread_local", "__thread", "_Noreturn", "virtual", "explicit",
    "friend", "__forceinline",
};

const std::unordered_set<std::string_view> kTypeQualifiers = {
    "const", "volatile", "restrict", "__restrict", "__restrict__", "__const",
    "_Atomic", "mutable", "_Nonnull", "_Nullable",
};

const std::unordered_set<std::string_view> kStatementKeywords = {
    "if", "else", "while", "do", "for", "switch", "case", "default", "goto",
    "return", "break", "continue", "try", "catch", "throw",
};

const std::unordered_set<std::string_view> kCppOnlyKeywords = {
    "new", "delete", "operator", "namespace", "using", "template",
};

bool is_assignment_op(std::string_view s) {
    static const std::unordered_set<std::string_view> ops = {
        "=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^=",
    };
    return ops.count(s) > 0;
}

// Binary operator precedence; higher binds tighter. 0 = not binary.
int binary_precedence(std::string_view s) {
    if (s == "*" || s == "/" || s == "%") return 10;
    if (s == "+" || s == "-") return 9;
    if (s == "<<" || s == ">>") return 8;
    if (s == "<" || s == "<=" || s == ">" || s == ">=") return 7;
    if (s == "==" || s == "!=") return 6;
    if (s == "&") return 5;
    if (s == "^") return 4;
    if (s == "|") return 3;
    if (s == "&&") return 2;
    if (s == "||") return 1;
    return 0;
}

class Parser {
public:
    Parser(std::string_view src, bool cpp) : src_(src), toks_(detail::lex(src)), cpp_(cpp) {}

    SyntaxNode parse_translation_unit() {
        std::vector<SyntaxNode> items;
        while (!at_end()) {
            std::size_t before = pos_;
            if (auto item = parse_external_item()) items.push_back(std::move(*item));
            if (pos_ == before) recover_one_token(items); // safety net: always progress
        }
        SyntaxNode root;
        if (items.size() == 1) {
            root = std::move(items.front());
        } else {
            root.kind = k::translation_unit;
            root.named = true;
            root.children = std::move(items);
        }
        // The root covers the entire input, including surrounding trivia.
        root.begin = 0;
        root.end = static_cast<std::uint32_t>(src_.size());
        return root;
    }

    bool had_error() const { return had_error_; }

private:
    // ---- token plumbing ------------------------------------------------

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t n = 1) const {
        return toks_[std::min(pos_ + n, toks_.size() - 1)];
    }
    bool at_end() const { return cur().type == Tok::End; }
    bool at(std::string_view s) const { return cur().text == s; }
    bool at_ident(std::string_view s) const { return cur().type == Tok::Identifier && cur().text == s; }

    void advance() {
        if (!at_end()) {
            last_end_ = cur().end;
            ++pos_;
        }
    }

    bool eat(std::string_view s) {
        if (at(s)) {
            advance();
            return true;
        }
        return false;
    }

    // Missing expected token: flag the parse, keep going.
    void expect(std::string_view s) {
        if (!eat(s)) had_error_ = true;
    }

    std::uint32_t here() const { return cur().begin; }

    SyntaxNode make(std::string_view kind, std::uint32_t begin) const {
        SyntaxNode n;
        n.kind = kind;
        n.named = true;
        n.begin = begin;
        n.end = last_end_ > begin ? last_end_ : begin;
        return n;
    }

    void close(SyntaxNode& n) const { n.end = std::max(n.begin, last_end_); }

    static void add(SyntaxNode& parent, SyntaxNode child, std::string_view field = {}) {
        child.field = field;
        parent.children.push_back(std::move(child));
    }

    SyntaxNode token_node(std::string_view kind, bool named = true) {
        SyntaxNode n;
        n.kind = kind;
        n.named = named;
        n.begin = cur().begin;
        n.end = cur().end;
        advance();
        return n;
    }

    SyntaxNode operator_token_node() {
        SyntaxNode n;
        n.kind = k::intern_operator(cur().text);
        n.named = false;
        n.begin = cur().begin;
        n.end = cur().end;
        advance();
        return n;
    }

    SyntaxNode error_node(std::uint32_t begin) {
        had_error_ = true;
        SyntaxNode n;
        n.kind = k::error;
        n.named = true;
        n.begin = begin;
        n.end = std::max(begin, last_end_);
        return n;
    }

    // Consume tokens until a statement boundary and wrap them in an ERROR node.
    SyntaxNode error_recover_statement() {
        std::uint32_t begin = here();
        int depth = 0;
        while (!at_end()) {
            if (depth == 0 && (at(";") || at("}"))) break;
            if (at("(") || at("[") || at("{")) ++depth;
            if (at(")") || at("]") || at("}")) --depth;
            advance();
        }
        eat(";");
        return error_node(begin);
    }

    void recover_one_token(std::vector<SyntaxNode>& items) {
        std::uint32_t begin = here();
        advance();
        items.push_back(error_node(begin));
    }

    // RAII guard for speculative parsing: on failure the caller restores the
    // token position and discards any partial nodes.
    struct Checkpoint {
        Parser& p;
        std::size_t pos;
        std::uint32_t last_end;
        bool err;
        explicit Checkpoint(Parser& parser)
            : p(parser), pos(parser.pos_), last_end(parser.last_end_), err(parser.had_error_) {}
        void rollback() const {
            p.pos_ = pos;
            p.last_end_ = last_end;
            p.had_error_ = err;
        }
    };

    bool depth_guard() {
        // Hard cap on recursion so pathological inputs degrade into ERROR
        // nodes instead of exhausting the stack.
        return depth_ < 700;
    }

    struct DepthScope {
        Parser& p;
        explicit DepthScope(Parser& parser) : p(parser) { ++p.depth_; }
        ~DepthScope() { --p.depth_; }
    };

    // ---- attributes and other trivia-like constructs --------------------

    void skip_balanced_parens() {
        if (!at("(")) return;
        int depth = 0;
        while (!at_end()) {
            if (at("(")) ++depth;
            if (at(")")) {
                --depth;
                advance();
                if (depth == 0) return;
                continue;
            }
            advance();
        }
    }

    bool skip_attributes() {
        bool any = false;
        while (cur().type == Tok::Identifier &&
               (cur().text == "__attribute__" || cur().text == "__attribute" ||
                cur().text == "__declspec" || cur().text == "_Alignas" ||
                cur().text == "alignas" || cur().text == "__asm" ||
                cur().text == "__asm__")) {
            // "__asm" here covers trailing register annotations on declarators.
            advance();
            skip_balanced_parens();
            any = true;
        }
        while (at("[") && peek().is("[")) { // C++11 [[...]]
            int depth = 0;
            while (!at_end()) {
                if (at("[")) ++depth;
                if (at("]")) {
                    --depth;
                    advance();
                    if (depth == 0) break;
                    continue;
                }
                advance();
            }
            any = true;
        }
        return any;
    }

    // ---- specifiers and types -------------------------------------------

    bool is_type_keyword(const Token& t) const {
        if (t.type != Tok::Identifier) return false;
        if (kPrimitiveTypes.count(t.text) || kSizeModifiers.count(t.text)) return true;
        if (cpp_ && t.text == "auto") return true;
        return false;
    }

    bool is_reserved(std::string_view word) const {
        if (kStatementKeywords.count(word) || word == "sizeof") return true;
        return cpp_ && kCppOnlyKeywords.count(word) > 0;
    }

    bool starts_specifier(const Token& t) const {
        if (t.type != Tok::Identifier) return false;
        return is_type_keyword(t) || kStorageSpecifiers.count(t.text) > 0 ||
               kTypeQualifiers.count(t.text) > 0 || t.text == "struct" || t.text == "union" ||
               t.text == "enum" || (cpp_ && (t.text == "class" || t.text == "typename")) ||
               (!cpp_ && t.text == "auto");
    }

    struct SpecifierRun {
        std::vector<SyntaxNode> nodes; // storage/qualifier/type nodes in source order
        int type_index = -1;           // index of the main type specifier, -1 if none
        bool saw_any = false;
    };

    // Parses a run of declaration specifiers. A plain identifier can act as
    // the type (typedef-name heuristic); in type contexts (casts, sizeof,
    // new, template arguments) the first identifier is always the type.
    std::optional<SpecifierRun> parse_specifiers(bool speculative, bool type_context = false) {
        SpecifierRun run;
        while (true) {
            skip_attributes();
            const Token& t = cur();
            if (t.type != Tok::Identifier) break;

            if (kStorageSpecifiers.count(t.text) || (!cpp_ && t.text == "auto")) {
                run.nodes.push_back(token_node(k::storage_class_specifier));
                if (at_ident("extern") || cur().type == Tok::StringLit) {
                    if (cur().type == Tok::StringLit) advance(); // extern "C"
                }
                run.saw_any = true;
                continue;
            }
            if (kTypeQualifiers.count(t.text)) {
                run.nodes.push_back(token_node(k::type_qualifier));
                run.saw_any = true;
                continue;
            }
            if (t.text == "struct" || t.text == "union" || t.text == "enum" ||
                (cpp_ && (t.text == "class" || t.text == "typename"))) {
                run.nodes.push_back(parse_tagged_type(t.text));
                run.type_index = static_cast<int>(run.nodes.size()) - 1;
                run.saw_any = true;
                continue;
            }
            if (kSizeModifiers.count(t.text)) {
                run.nodes.push_back(parse_sized_type());
                run.type_index = static_cast<int>(run.nodes.size()) - 1;
                run.saw_any = true;
                continue;
            }
            if (kPrimitiveTypes.count(t.text) || (cpp_ && t.text == "auto")) {
                run.nodes.push_back(token_node(k::primitive_type));
                run.type_index = static_cast<int>(run.nodes.size()) - 1;
                run.saw_any = true;
                continue;
            }

            // Plain identifier: typedef-name heuristic. Take it as the type
            // when no type has been seen yet and the next token cannot begin
            // a declarator tail for a name in declarator position.
            if (run.type_index >= 0) {
                // Already have a type; `ident ident` keeps the earlier one and
                // treats this identifier as a stray specifier only when yet
                // another identifier follows (macro soup like `int __init f()`).
                if (peek().type == Tok::Identifier && !kStatementKeywords.count(peek().text)) {
                    run.nodes.push_back(token_node(k::type_identifier));
                    run.saw_any = true;
                    continue;
                }
                break;
            }
            if (is_reserved(t.text)) break;
            if (!type_context) {
                const Token& nx = peek();
                bool declarator_tail = nx.is("=") || nx.is(";") || nx.is(",") || nx.is(")") ||
                                       nx.is("[") || nx.is(":");
                if (nx.is("(")) {
                    // `T (*x)` keeps T as the type; `name(args)` puts name in
                    // the declarator.
                    declarator_tail = !peek(2).is("*");
                }
                if (declarator_tail) break;
            }
            SyntaxNode ty = token_node(k::type_identifier);
            if (cpp_ && at("<")) ty = parse_template_suffix(std::move(ty));
            if (cpp_ && at("::")) ty = parse_qualified_suffix(std::move(ty), /*as_type=*/true);
            run.nodes.push_back(std::move(ty));
            run.type_index = static_cast<int>(run.nodes.size()) - 1;
            run.saw_any = true;
        }
        if (!run.saw_any && run.type_index < 0 && run.nodes.empty()) {
            if (speculative) return std::nullopt;
        }
        return run;
    }

    SyntaxNode parse_sized_type() {
        std::uint32_t begin = here();
        int words = 0;
        while (cur().type == Tok::Identifier &&
               (kSizeModifiers.count(cur().text) || kPrimitiveTypes.count(cur().text))) {
            advance();
            ++words;
        }
        return make(words > 1 ? k::sized_type_specifier : k::primitive_type, begin);
    }

    SyntaxNode parse_tagged_type(std::string_view tag) {
        std::uint32_t begin = here();
        advance(); // struct/union/enum/class/typename
        std::string_view kind = k::struct_specifier;
        if (tag == "union") kind = k::union_specifier;
        if (tag == "enum") kind = k::enum_specifier;
        if (tag == "class") kind = k::class_specifier;
        if (tag == "typename") kind = k::type_identifier;
        SyntaxNode node = make(kind, begin);
        skip_attributes();
        if (cur().type == Tok::Identifier) {
            SyntaxNode name = token_node(k::type_identifier);
            if (cpp_ && at("<")) name = parse_template_suffix(std::move(name));
            add(node, std::move(name), f::name);
        }
        if (tag == "typename") {
            close(node);
            return node;
        }
        if (at("{")) {
            if (tag == "enum") {
                add(node, parse_enumerator_list(), f::body);
            } else {
                add(node, parse_field_declaration_list(), f::body);
            }
        }
        close(node);
        return node;
    }

    SyntaxNode parse_enumerator_list() {
        std::uint32_t begin = here();
        expect("{");
        SyntaxNode list = make(k::enumerator_list, begin);
        while (!at_end() && !at("}")) {
            if (cur().type == Tok::Identifier) {
                std::uint32_t ebegin = here();
                SyntaxNode e = make(k::enumerator, ebegin);
                add(e, token_node(k::identifier), f::name);
                if (eat("=")) {
                    if (auto v = parse_assignment()) add(e, std::move(*v), f::value);
                }
                close(e);
                add(list, std::move(e));
            } else if (cur().type == Tok::Preproc) {
                add(list, token_node(k::preproc_directive));
            } else {
                advance();
            }
            eat(",");
        }
        expect("}");
        close(list);
        return list;
    }

    SyntaxNode parse_field_declaration_list() {
        std::uint32_t begin = here();
        expect("{");
        SyntaxNode list = make(k::field_declaration_list, begin);
        while (!at_end() && !at("}")) {
            if (cur().type == Tok::Preproc) {
                add(list, token_node(k::preproc_directive));
                continue;
            }
            std::uint32_t fbegin = here();
            auto specs = parse_specifiers(/*speculative=*/false);
            SyntaxNode field = make(k::field_declaration, fbegin);
            attach_specifiers(field, std::move(*specs));
            while (!at_end() && !at(";") && !at("}")) {
                if (auto d = parse_declarator(/*speculative=*/false, /*allow_abstract=*/true)) {
                    if (eat(":")) { // bit-field width
                        if (auto w = parse_assignment()) add(field, std::move(*w), f::size);
                    }
                    add(field, std::move(*d), f::declarator);
                } else {
                    advance();
                }
                if (!eat(",")) break;
            }
            expect(";");
            close(field);
            add(list, std::move(field));
        }
        expect("}");
        close(list);
        return list;
    }

    SyntaxNode parse_template_suffix(SyntaxNode name) {
        // name '<' template-args '>', used in type contexts only.
        std::uint32_t begin = name.begin;
        std::uint32_t args_begin = here();
        advance(); // '<'
        SyntaxNode args = make(k::template_argument_list, args_begin);
        int depth = 1;
        while (!at_end() && depth > 0) {
            if (at("<")) ++depth;
            if (at(">")) {
                --depth;
                advance();
                continue;
            }
            if (at(">>")) {
                depth -= 2;
                advance();
                continue;
            }
            if (starts_specifier(cur()) || cur().type == Tok::Identifier) {
                if (auto ty = parse_type_descriptor(/*speculative=*/true)) {
                    if (at(",") || at(">") || at(">>")) {
                        add(args, std::move(*ty));
                        eat(",");
                        continue;
                    }
                }
            }
            advance(); // expression arguments: consume without structure
        }
        close(args);
        SyntaxNode node = make(k::template_type, begin);
        node.begin = begin;
        add(node, std::move(name), f::name);
        add(node, std::move(args), f::arguments);
        close(node);
        return node;
    }

    SyntaxNode parse_qualified_suffix(SyntaxNode scope, bool as_type) {
        while (at("::")) {
            std::uint32_t begin = scope.begin;
            advance();
            SyntaxNode node = make(k::qualified_identifier, begin);
            node.begin = begin;
            add(node, std::move(scope), f::scope);
            if (cur().type == Tok::Identifier) {
                SyntaxNode name = token_node(as_type ? k::type_identifier : k::identifier);
                if (cpp_ && at("<")) name = parse_template_suffix(std::move(name));
                add(node, std::move(name), f::name);
            }
            close(node);
            scope = std::move(node);
        }
        return scope;
    }

    void attach_specifiers(SyntaxNode& parent, SpecifierRun run) {
        for (std::size_t i = 0; i < run.nodes.size(); ++i) {
            add(parent, std::move(run.nodes[i]),
                static_cast<int>(i) == run.type_index ? f::type : std::string_view{});
        }
    }

    // ---- declarators -----------------------------------------------------

    std::optional<SyntaxNode> parse_declarator(bool speculative, bool allow_abstract) {
        DepthScope scope(*this);
        if (!depth_guard()) return std::nullopt;
        skip_attributes();
        if (at("*")) {
            std::uint32_t begin = here();
            advance();
            while (cur().type == Tok::Identifier && kTypeQualifiers.count(cur().text)) advance();
            auto inner = parse_declarator(speculative, allow_abstract);
            if (!inner && !allow_abstract) {
                if (speculative) return std::nullopt;
            }
            SyntaxNode node = make(k::pointer_declarator, begin);
            if (inner) add(node, std::move(*inner), f::declarator);
            close(node);
            return node;
        }
        if (cpp_ && (at("&") || at("&&"))) {
            std::uint32_t begin = here();
            advance();
            auto inner = parse_declarator(speculative, allow_abstract);
            SyntaxNode node = make(k::reference_declarator, begin);
            if (inner) add(node, std::move(*inner), f::declarator);
            close(node);
            return node;
        }

        std::optional<SyntaxNode> core;
        if (cur().type == Tok::Identifier && !is_reserved(cur().text) &&
            !starts_specifier(cur())) {
            core = token_node(k::identifier);
            if (cpp_ && at("::")) core = parse_qualified_suffix(std::move(*core), /*as_type=*/false);
        } else if (at("(") && !peek().is(")")) {
            // Parenthesized declarator, e.g. (*fp).
            Checkpoint cp(*this);
            std::uint32_t begin = here();
            advance();
            auto inner = parse_declarator(/*speculative=*/true, allow_abstract);
            if (inner && at(")")) {
                advance();
                SyntaxNode node = make(k::parenthesized_declarator, begin);
                add(node, std::move(*inner));
                close(node);
                core = std::move(node);
            } else {
                cp.rollback();
            }
        }
        if (!core && !allow_abstract) {
            if (speculative) return std::nullopt;
            return std::nullopt;
        }

        // Suffixes: function parameters and array extents.
        while (true) {
            if (at("(")) {
                auto params = parse_parameter_list(speculative);
                if (!params) {
                    if (speculative) return std::nullopt;
                    break;
                }
                SyntaxNode node = make(k::function_declarator, core ? core->begin : params->begin);
                node.begin = core ? core->begin : params->begin;
                if (core) add(node, std::move(*core), f::declarator);
                add(node, std::move(*params), f::parameters);
                close(node);
                core = std::move(node);
                skip_attributes();
                // Trailing const/noexcept etc. on C++ methods.
                while (cur().type == Tok::Identifier &&
                       (kTypeQualifiers.count(cur().text) || cur().text == "noexcept" ||
                        cur().text == "throw")) {
                    advance();
                    skip_balanced_parens();
                }
                continue;
            }
            if (at("[")) {
                std::uint32_t begin = core ? core->begin : here();
                advance();
                SyntaxNode node = make(k::array_declarator, begin);
                node.begin = begin;
                if (core) add(node, std::move(*core), f::declarator);
                while (cur().type == Tok::Identifier &&
                       (kTypeQualifiers.count(cur().text) || cur().text == "static")) {
                    advance();
                }
                if (!at("]")) {
                    if (auto size = parse_assignment()) add(node, std::move(*size), f::size);
                }
                expect("]");
                close(node);
                core = std::move(node);
                continue;
            }
            break;
        }
        return core;
    }

    std::optional<SyntaxNode> parse_parameter_list(bool speculative) {
        std::uint32_t begin = here();
        if (!eat("(")) return std::nullopt;
        SyntaxNode list = make(k::parameter_list, begin);
        if (eat(")")) {
            close(list);
            return list;
        }
        // Lone `void` means an empty parameter list.
        if (at_ident("void") && peek().is(")")) {
            advance();
            advance();
            close(list);
            return list;
        }
        while (!at_end()) {
            if (at("...")) {
                add(list, token_node(k::variadic_parameter));
            } else if (cur().type == Tok::Preproc) {
                add(list, token_node(k::preproc_directive));
            } else {
                std::uint32_t pbegin = here();
                auto specs = parse_specifiers(/*speculative=*/true);
                if (!specs || (!specs->saw_any && specs->nodes.empty())) {
                    if (speculative) return std::nullopt;
                    // Unparseable parameter: skip to ',' or ')'.
                    int depth = 0;
                    while (!at_end()) {
                        if (at("(")) ++depth;
                        if (at(")")) {
                            if (depth == 0) break;
                            --depth;
                        }
                        if (depth == 0 && at(",")) break;
                        advance();
                    }
                    add(list, error_node(pbegin));
                } else {
                    SyntaxNode param = make(k::parameter_declaration, pbegin);
                    attach_specifiers(param, std::move(*specs));
                    if (!at(",") && !at(")")) {
                        if (auto d = parse_declarator(speculative, /*allow_abstract=*/true)) {
                            add(param, std::move(*d), f::declarator);
                        } else if (speculative) {
                            return std::nullopt;
                        }
                    }
                    if (eat("=")) { // C++ default argument
                        if (auto v = parse_assignment()) add(param, std::move(*v), f::value);
                    }
                    close(param);
                    add(list, std::move(param));
                }
            }
            if (eat(",")) continue;
            break;
        }
        if (!eat(")")) {
            if (speculative) return std::nullopt;
            had_error_ = true;
        }
        close(list);
        return list;
    }

    // ---- type descriptors (casts, sizeof) --------------------------------

    std::optional<SyntaxNode> parse_type_descriptor(bool speculative) {
        std::uint32_t begin = here();
        Checkpoint cp(*this);
        auto specs = parse_specifiers(/*speculative=*/true, /*type_context=*/true);
        if (!specs || specs->type_index < 0) {
            cp.rollback();
            return std::nullopt;
        }
        SyntaxNode node = make(k::type_descriptor, begin);
        bool bare_identifier =
            specs->nodes.size() == 1 && specs->nodes[0].kind == k::type_identifier;
        attach_specifiers(node, std::move(*specs));
        if (at("*") || at("(") || at("[") || (cpp_ && (at("&") || at("&&")))) {
            Checkpoint decl_cp(*this);
            if (auto d = parse_declarator(/*speculative=*/true, /*allow_abstract=*/true)) {
                bare_identifier = false;
                add(node, std::move(*d), f::declarator);
            } else {
                decl_cp.rollback(); // e.g. `new T(args)`: '(' starts arguments
            }
        }
        close(node);
        node.end = last_end_;
        (void)speculative;
        bare_identifier_type_ = bare_identifier;
        return node;
    }

    // ---- expressions ------------------------------------------------------

    std::optional<SyntaxNode> parse_expression() { // includes comma expressions
        auto left = parse_assignment();
        if (!left) return std::nullopt;
        while (at(",")) {
            std::uint32_t begin = left->begin;
            advance();
            auto right = parse_assignment();
            SyntaxNode node = make(k::comma_expression, begin);
            node.begin = begin;
            add(node, std::move(*left), f::left);
            if (right) add(node, std::move(*right), f::right);
            close(node);
            left = std::move(node);
        }
        return left;
    }

    std::optional<SyntaxNode> parse_assignment() {
        DepthScope scope(*this);
        if (!depth_guard()) return fail_or_error();
        auto left = parse_conditional();
        if (!left) return std::nullopt;
        if (cur().type == Tok::Punct && is_assignment_op(cur().text)) {
            std::uint32_t begin = left->begin;
            SyntaxNode op = operator_token_node();
            auto right = parse_assignment();
            SyntaxNode node = make(k::assignment_expression, begin);
            node.begin = begin;
            add(node, std::move(*left), f::left);
            add(node, std::move(op), f::operator_);
            if (right) add(node, std::move(*right), f::right);
            close(node);
            return node;
        }
        return left;
    }

    std::optional<SyntaxNode> parse_conditional() {
        auto cond = parse_binary(1);
        if (!cond) return std::nullopt;
        if (at("?")) {
            std::uint32_t begin = cond->begin;
            advance();
            SyntaxNode node = make(k::conditional_expression, begin);
            node.begin = begin;
            add(node, std::move(*cond), f::condition);
            if (!at(":")) { // GNU a ?: b omits the consequence
                if (auto cons = parse_expression()) add(node, std::move(*cons), f::consequence);
            }
            expect(":");
            if (auto alt = parse_assignment()) add(node, std::move(*alt), f::alternative);
            close(node);
            return node;
        }
        return cond;
    }

    std::optional<SyntaxNode> parse_binary(int min_prec) {
        DepthScope scope(*this);
        if (!depth_guard()) return fail_or_error();
        auto left = parse_unary();
        if (!left) return std::nullopt;
        while (true) {
            if (cur().type != Tok::Punct) break;
            int prec = binary_precedence(cur().text);
            if (prec < min_prec || prec == 0) break;
            std::uint32_t begin = left->begin;
            SyntaxNode op = operator_token_node();
            auto right = parse_binary(prec + 1);
            SyntaxNode node = make(k::binary_expression, begin);
            node.begin = begin;
            add(node, std::move(*left), f::left);
            add(node, std::move(op), f::operator_);
            if (right) add(node, std::move(*right), f::right);
            close(node);
            left = std::move(node);
        }
        return left;
    }

    std::optional<SyntaxNode> parse_unary() {
        DepthScope scope(*this);
        if (!depth_guard()) return fail_or_error();
        std::uint32_t begin = here();

        if (at("!") || at("~") || at("+") || at("-")) {
            SyntaxNode op = operator_token_node();
            auto arg = parse_unary();
            SyntaxNode node = make(k::unary_expression, begin);
            add(node, std::move(op), f::operator_);
            if (arg) add(node, std::move(*arg), f::argument);
            close(node);
            return node;
        }
        if (at("*") || at("&")) {
            SyntaxNode op = operator_token_node();
            auto arg = parse_unary();
            SyntaxNode node = make(k::pointer_expression, begin);
            add(node, std::move(op), f::operator_);
            if (arg) add(node, std::move(*arg), f::argument);
            close(node);
            return node;
        }
        if (at("++") || at("--")) {
            SyntaxNode op = operator_token_node();
            auto arg = parse_unary();
            SyntaxNode node = make(k::update_expression, begin);
            add(node, std::move(op), f::operator_);
            if (arg) add(node, std::move(*arg), f::argument);
            close(node);
            return node;
        }
        if (at_ident("sizeof") || at_ident("_Alignof") || at_ident("alignof") ||
            at_ident("__alignof__")) {
            advance();
            SyntaxNode node = make(k::sizeof_expression, begin);
            if (at("(")) {
                Checkpoint cp(*this);
                advance();
                auto ty = parse_type_descriptor(/*speculative=*/true);
                if (ty && at(")")) {
                    advance();
                    add(node, std::move(*ty), f::type);
                    close(node);
                    return node;
                }
                cp.rollback();
            }
            if (auto arg = parse_unary()) add(node, std::move(*arg), f::value);
            close(node);
            return node;
        }
        if (cpp_ && at_ident("new")) return parse_new(begin);
        if (cpp_ && at_ident("delete")) {
            advance();
            if (at("[")) {
                advance();
                expect("]");
            }
            SyntaxNode node = make(k::delete_expression, begin);
            if (auto arg = parse_unary()) add(node, std::move(*arg));
            close(node);
            return node;
        }
        if (cpp_ && at_ident("throw")) {
            advance();
            SyntaxNode node = make(k::throw_statement, begin);
            if (!at(";") && !at(",") && !at(")")) {
                if (auto arg = parse_assignment()) add(node, std::move(*arg));
            }
            close(node);
            return node;
        }
        if (cpp_ &&
            (at_ident("static_cast") || at_ident("reinterpret_cast") || at_ident("const_cast") ||
             at_ident("dynamic_cast"))) {
            advance();
            SyntaxNode node = make(k::cast_expression, begin);
            if (eat("<")) {
                if (auto ty = parse_type_descriptor(/*speculative=*/true)) {
                    add(node, std::move(*ty), f::type);
                }
                while (!at_end() && !eat(">")) advance();
            }
            if (eat("(")) {
                if (auto v = parse_expression()) add(node, std::move(*v), f::value);
                expect(")");
            }
            close(node);
            return node;
        }

        if (at("(")) {
            // C-style cast?
            Checkpoint cp(*this);
            advance();
            auto ty = parse_type_descriptor(/*speculative=*/true);
            if (ty && at(")")) {
                bool bare = bare_identifier_type_;
                advance();
                if (cast_operand_follows(bare)) {
                    if (at("{")) { // compound literal (T){...}
                        SyntaxNode node = make(k::compound_literal_expression, begin);
                        add(node, std::move(*ty), f::type);
                        if (auto init = parse_initializer_list()) {
                            add(node, std::move(*init), f::value);
                        }
                        close(node);
                        return parse_postfix(std::move(node));
                    }
                    SyntaxNode node = make(k::cast_expression, begin);
                    add(node, std::move(*ty), f::type);
                    if (auto v = parse_unary()) add(node, std::move(*v), f::value);
                    close(node);
                    return node;
                }
            }
            cp.rollback();
        }
        return parse_postfix_primary();
    }

    bool cast_operand_follows(bool bare_identifier_type) const {
        const Token& t = cur();
        if (t.type == Tok::Number || t.type == Tok::CharLit || t.type == Tok::StringLit)
            return true;
        if (t.type == Tok::Identifier) return !kStatementKeywords.count(t.text);
        if (t.type != Tok::Punct) return false;
        if (t.is("{")) return true;
        if (bare_identifier_type) return false; // (x)-y stays a subtraction
        return t.is("(") || t.is("*") || t.is("&") || t.is("!") || t.is("~") || t.is("-") ||
               t.is("+") || t.is("++") || t.is("--");
    }

    std::optional<SyntaxNode> parse_new(std::uint32_t begin) {
        advance(); // new
        SyntaxNode node = make(k::new_expression, begin);
        if (at("(")) {
            // Placement arguments, e.g. new (buf) T — only when a type follows.
            Checkpoint cp(*this);
            skip_balanced_parens();
            if (!(cur().type == Tok::Identifier && !kStatementKeywords.count(cur().text))) {
                cp.rollback();
            }
        }
        if (auto ty = parse_type_descriptor(/*speculative=*/true)) {
            add(node, std::move(*ty), f::type);
        }
        if (at("[")) {
            advance();
            if (auto size = parse_expression()) add(node, std::move(*size), f::size);
            expect("]");
        }
        if (at("(")) {
            if (auto args = parse_argument_list()) add(node, std::move(*args), f::arguments);
        } else if (at("{")) {
            if (auto init = parse_initializer_list()) add(node, std::move(*init), f::arguments);
        }
        close(node);
        return node;
    }

    std::optional<SyntaxNode> parse_argument_list() {
        std::uint32_t begin = here();
        if (!eat("(")) return std::nullopt;
        SyntaxNode list = make(k::argument_list, begin);
        while (!at_end() && !at(")")) {
            if (cur().type == Tok::Preproc) {
                add(list, token_node(k::preproc_directive));
                continue;
            }
            if (auto arg = parse_assignment()) {
                add(list, std::move(*arg));
            } else {
                add(list, error_recover_argument());
            }
            if (!eat(",")) break;
        }
        expect(")");
        close(list);
        return list;
    }

    SyntaxNode error_recover_argument() {
        std::uint32_t begin = here();
        int depth = 0;
        while (!at_end()) {
            if (depth == 0 && (at(",") || at(")"))) break;
            if (at("(") || at("[") || at("{")) ++depth;
            if (at(")") || at("]") || at("}")) --depth;
            advance();
        }
        return error_node(begin);
    }

    std::optional<SyntaxNode> parse_initializer_list() {
        std::uint32_t begin = here();
        if (!eat("{")) return std::nullopt;
        SyntaxNode list = make(k::initializer_list, begin);
        while (!at_end() && !at("}")) {
            if (cur().type == Tok::Preproc) {
                add(list, token_node(k::preproc_directive));
                continue;
            }
            if (at(".") || at("[")) {
                // Designated initializer: .field = v or [idx] = v.
                std::uint32_t pbegin = here();
                while (!at_end() && !at("=") && !at(",") && !at("}")) advance();
                SyntaxNode pair = make(k::initializer_pair, pbegin);
                if (eat("=")) {
                    if (auto v = parse_initializer()) add(pair, std::move(*v), f::value);
                }
                close(pair);
                add(list, std::move(pair));
            } else if (auto v = parse_initializer()) {
                add(list, std::move(*v));
            } else {
                advance();
            }
            if (!eat(",")) break;
        }
        expect("}");
        close(list);
        return list;
    }

    std::optional<SyntaxNode> parse_initializer() {
        if (at("{")) return parse_initializer_list();
        return parse_assignment();
    }

    std::optional<SyntaxNode> parse_postfix_primary() {
        auto prim = parse_primary();
        if (!prim) return std::nullopt;
        return parse_postfix(std::move(*prim));
    }

    std::optional<SyntaxNode> parse_postfix(SyntaxNode expr) {
        while (true) {
            if (at("(")) {
                std::uint32_t begin = expr.begin;
                auto args = parse_argument_list();
                SyntaxNode node = make(k::call_expression, begin);
                node.begin = begin;
                add(node, std::move(expr), f::function);
                if (args) add(node, std::move(*args), f::arguments);
                close(node);
                expr = std::move(node);
                continue;
            }
            if (at("[")) {
                std::uint32_t begin = expr.begin;
                advance();
                SyntaxNode node = make(k::subscript_expression, begin);
                node.begin = begin;
                add(node, std::move(expr), f::argument);
                if (auto idx = parse_expression()) add(node, std::move(*idx), f::index);
                expect("]");
                close(node);
                expr = std::move(node);
                continue;
            }
            if (at(".") || at("->")) {
                std::uint32_t begin = expr.begin;
                SyntaxNode op = operator_token_node();
                SyntaxNode node = make(k::field_expression, begin);
                node.begin = begin;
                add(node, std::move(expr), f::argument);
                add(node, std::move(op), f::operator_);
                if (cur().type == Tok::Identifier) {
                    add(node, token_node(k::field_identifier), f::field);
                }
                close(node);
                expr = std::move(node);
                continue;
            }
            if (at("++") || at("--")) {
                std::uint32_t begin = expr.begin;
                SyntaxNode node = make(k::update_expression, begin);
                node.begin = begin;
                add(node, std::move(expr), f::argument);
                add(node, operator_token_node(), f::operator_);
                close(node);
                expr = std::move(node);
                continue;
            }
            break;
        }
        return expr;
    }

    std::optional<SyntaxNode> parse_primary() {
        std::uint32_t begin = here();
        const Token& t = cur();
        switch (t.type) {
        case Tok::Number:
            return token_node(k::number_literal);
        case Tok::CharLit:
            return token_node(k::char_literal);
        case Tok::StringLit: {
            SyntaxNode first = token_node(k::string_literal);
            if (cur().type != Tok::StringLit) return first;
            SyntaxNode node = make(k::concatenated_string, begin);
            node.begin = begin;
            add(node, std::move(first));
            while (cur().type == Tok::StringLit) add(node, token_node(k::string_literal));
            close(node);
            return node;
        }
        case Tok::Identifier: {
            if (t.text == "true") return token_node(k::true_kind);
            if (t.text == "false") return token_node(k::false_kind);
            if (cpp_ && t.text == "nullptr") return token_node(k::null_kind);
            if (kStatementKeywords.count(t.text)) return fail_or_error();
            SyntaxNode id = token_node(k::identifier);
            if (cpp_ && at("::")) id = parse_qualified_suffix(std::move(id), /*as_type=*/false);
            return id;
        }
        case Tok::Punct: {
            if (t.is("(")) {
                advance();
                if (at("{")) {
                    // GNU statement expression ({ ... }).
                    SyntaxNode node = make(k::parenthesized_expression, begin);
                    add(node, parse_compound_statement());
                    expect(")");
                    close(node);
                    return node;
                }
                SyntaxNode node = make(k::parenthesized_expression, begin);
                if (auto inner = parse_expression()) {
                    add(node, std::move(*inner));
                } else {
                    add(node, error_recover_argument());
                }
                expect(")");
                close(node);
                return node;
            }
            if (t.is("{")) return parse_initializer_list();
            if (cpp_ && t.is("[")) return parse_lambda(begin);
            if (t.is("::") && cpp_) {
                advance();
                if (cur().type == Tok::Identifier) {
                    SyntaxNode id = token_node(k::identifier);
                    return parse_qualified_suffix(std::move(id), /*as_type=*/false);
                }
            }
            return fail_or_error();
        }
        default:
            return fail_or_error();
        }
    }

    std::optional<SyntaxNode> parse_lambda(std::uint32_t begin) {
        int depth = 0;
        while (!at_end()) { // capture list
            if (at("[")) ++depth;
            if (at("]")) {
                --depth;
                advance();
                if (depth == 0) break;
                continue;
            }
            advance();
        }
        SyntaxNode node = make(k::lambda_expression, begin);
        if (at("(")) {
            if (auto params = parse_parameter_list(/*speculative=*/false)) {
                add(node, std::move(*params), f::parameters);
            }
        }
        if (at_ident("mutable")) advance();
        if (eat("->")) {
            if (auto ty = parse_type_descriptor(/*speculative=*/true)) {
                add(node, std::move(*ty), f::type);
            }
        }
        if (at("{")) add(node, parse_compound_statement(), f::body);
        close(node);
        return node;
    }

    std::optional<SyntaxNode> fail_or_error() {
        // In committed parsing an expression slot must produce something:
        // swallow one token as an ERROR leaf. Speculative callers roll back
        // via checkpoints, so an ERROR here is fine for them too — they
        // restore had_error_.
        if (at_end()) {
            had_error_ = true;
            SyntaxNode n;
            n.kind = k::error;
            n.named = true;
            n.begin = here();
            n.end = here();
            return n;
        }
        std::uint32_t begin = here();
        advance();
        return error_node(begin);
    }

    // ---- statements -------------------------------------------------------

    SyntaxNode parse_parenthesized_condition() {
        std::uint32_t begin = here();
        expect("(");
        SyntaxNode node = make(k::parenthesized_expression, begin);
        // Accept both plain conditions and C++ declaration/init forms:
        // (decl; cond), (T x = e).
        while (!at_end() && !at(")")) {
            std::size_t before = pos_;
            if (starts_specifier(cur()) ||
                (cur().type == Tok::Identifier && peek().type == Tok::Identifier)) {
                Checkpoint cp(*this);
                if (auto decl = try_condition_declaration()) {
                    add(node, std::move(*decl));
                } else {
                    cp.rollback();
                    if (auto e = parse_expression()) add(node, std::move(*e));
                }
            } else if (auto e = parse_expression()) {
                add(node, std::move(*e));
            }
            if (at(";")) {
                advance();
                continue;
            }
            if (pos_ == before) advance();
        }
        expect(")");
        close(node);
        return node;
    }

    std::optional<SyntaxNode> try_condition_declaration() {
        std::uint32_t begin = here();
        auto specs = parse_specifiers(/*speculative=*/true);
        if (!specs || specs->type_index < 0) return std::nullopt;
        auto declarator = parse_declarator(/*speculative=*/true, /*allow_abstract=*/false);
        if (!declarator) return std::nullopt;
        if (!at("=") && !at(";") && !at(")")) return std::nullopt;
        SyntaxNode decl = make(k::declaration, begin);
        attach_specifiers(decl, std::move(*specs));
        if (eat("=")) {
            SyntaxNode init = make(k::init_declarator, declarator->begin);
            init.begin = declarator->begin;
            add(init, std::move(*declarator), f::declarator);
            if (auto v = parse_initializer()) add(init, std::move(*v), f::value);
            close(init);
            add(decl, std::move(init), f::declarator);
        } else {
            add(decl, std::move(*declarator), f::declarator);
        }
        close(decl);
        return decl;
    }

    SyntaxNode parse_compound_statement() {
        std::uint32_t begin = here();
        expect("{");
        SyntaxNode node = make(k::compound_statement, begin);
        while (!at_end() && !at("}")) {
            std::size_t before = pos_;
            if (auto stmt = parse_statement()) add(node, std::move(*stmt));
            if (pos_ == before) {
                std::vector<SyntaxNode> sink;
                recover_one_token(sink);
                for (auto& e : sink) add(node, std::move(e));
            }
        }
        expect("}");
        close(node);
        return node;
    }

    std::optional<SyntaxNode> parse_statement() {
        DepthScope scope(*this);
        if (!depth_guard()) return error_recover_statement();
        std::uint32_t begin = here();
        const Token& t = cur();

        if (t.type == Tok::Preproc) return token_node(k::preproc_directive);
        if (t.is("{")) return parse_compound_statement();
        if (t.is(";")) {
            advance();
            return make(k::expression_statement, begin);
        }
        if (t.type != Tok::Identifier) return parse_expression_statement();

        if (t.text == "if") {
            advance();
            if (at_ident("constexpr")) advance();
            SyntaxNode node = make(k::if_statement, begin);
            add(node, parse_parenthesized_condition(), f::condition);
            if (auto cons = parse_statement()) add(node, std::move(*cons), f::consequence);
            if (at_ident("else")) {
                advance();
                if (auto alt = parse_statement()) add(node, std::move(*alt), f::alternative);
            }
            close(node);
            return node;
        }
        if (t.text == "while") {
            advance();
            SyntaxNode node = make(k::while_statement, begin);
            add(node, parse_parenthesized_condition(), f::condition);
            if (auto body = parse_statement()) add(node, std::move(*body), f::body);
            close(node);
            return node;
        }
        if (t.text == "do") {
            advance();
            SyntaxNode node = make(k::do_statement, begin);
            if (auto body = parse_statement()) add(node, std::move(*body), f::body);
            if (at_ident("while")) {
                advance();
                add(node, parse_parenthesized_condition(), f::condition);
            } else {
                had_error_ = true;
            }
            eat(";");
            close(node);
            return node;
        }
        if (t.text == "for") return parse_for(begin);
        if (t.text == "switch") {
            advance();
            SyntaxNode node = make(k::switch_statement, begin);
            add(node, parse_parenthesized_condition(), f::condition);
            if (auto body = parse_statement()) add(node, std::move(*body), f::body);
            close(node);
            return node;
        }
        if (t.text == "case" || t.text == "default") {
            bool is_default = t.text == "default";
            advance();
            SyntaxNode node = make(k::case_statement, begin);
            if (!is_default) {
                if (auto v = parse_conditional()) add(node, std::move(*v), f::value);
                if (eat("...")) { // GNU case range
                    if (auto v2 = parse_conditional()) add(node, std::move(*v2));
                }
            }
            expect(":");
            while (!at_end() && !at("}") && !at_ident("case") && !at_ident("default")) {
                std::size_t before = pos_;
                if (auto stmt = parse_statement()) add(node, std::move(*stmt));
                if (pos_ == before) break;
            }
            close(node);
            return node;
        }
        if (t.text == "goto") {
            advance();
            SyntaxNode node = make(k::goto_statement, begin);
            if (cur().type == Tok::Identifier) {
                add(node, token_node(k::statement_identifier), f::label);
            } else if (at("*")) { // GNU computed goto
                if (auto e = parse_expression()) add(node, std::move(*e));
            }
            eat(";");
            close(node);
            return node;
        }
        if (t.text == "return") {
            advance();
            SyntaxNode node = make(k::return_statement, begin);
            if (!at(";") && !at("}")) {
                if (auto e = parse_expression()) add(node, std::move(*e));
            }
            eat(";");
            close(node);
            return node;
        }
        if (t.text == "break") {
            advance();
            eat(";");
            return make(k::break_statement, begin);
        }
        if (t.text == "continue") {
            advance();
            eat(";");
            return make(k::continue_statement, begin);
        }
        if (cpp_ && t.text == "try") {
            advance();
            SyntaxNode node = make(k::try_statement, begin);
            if (at("{")) add(node, parse_compound_statement(), f::body);
            while (at_ident("catch")) {
                std::uint32_t cbegin = here();
                advance();
                SyntaxNode clause = make(k::catch_clause, cbegin);
                if (at("(")) {
                    if (auto params = parse_parameter_list(/*speculative=*/false)) {
                        add(clause, std::move(*params), f::parameters);
                    }
                }
                if (at("{")) add(clause, parse_compound_statement(), f::body);
                close(clause);
                add(node, std::move(clause));
            }
            close(node);
            return node;
        }
        if (cpp_ && t.text == "throw") {
            auto e = parse_unary(); // parse_unary handles throw expressions
            eat(";");
            return e;
        }
        if (t.text == "asm" || t.text == "__asm__" || t.text == "__asm") {
            advance();
            while (cur().type == Tok::Identifier &&
                   (kTypeQualifiers.count(cur().text) || cur().text == "goto")) {
                advance();
            }
            skip_balanced_parens();
            eat(";");
            return make(k::asm_statement, begin);
        }
        if (t.text == "else") {
            // Stray else: recover.
            advance();
            auto sink = parse_statement();
            (void)sink;
            return error_node(begin);
        }

        // Label?
        if (peek().is(":") && !peek().is("::")) {
            SyntaxNode node = make(k::labeled_statement, begin);
            add(node, token_node(k::statement_identifier), f::label);
            advance(); // ':'
            if (!at("}") && !at_end()) {
                if (auto stmt = parse_statement()) add(node, std::move(*stmt));
            }
            close(node);
            return node;
        }

        // Declaration, then expression statement as fallback.
        {
            Checkpoint cp(*this);
            if (auto decl = parse_declaration_statement()) return decl;
            cp.rollback();
        }
        return parse_expression_statement();
    }

    std::optional<SyntaxNode> parse_for(std::uint32_t begin) {
        advance(); // for
        SyntaxNode node = make(k::for_statement, begin);
        expect("(");

        if (cpp_) {
            // Range-based for: look for ':' before the first ';' at depth 0.
            std::size_t i = pos_;
            int depth = 0;
            bool range = false;
            while (i < toks_.size() && toks_[i].type != Tok::End) {
                const auto& tk = toks_[i];
                if (tk.is("(") || tk.is("[") || tk.is("{")) ++depth;
                if (tk.is(")")) {
                    if (depth == 0) break;
                    --depth;
                }
                if (tk.is("]") || tk.is("}")) --depth;
                if (depth == 0 && tk.is(";")) break;
                if (depth == 0 && tk.is(":") && !toks_[i].is("::")) {
                    range = true;
                    break;
                }
                ++i;
            }
            if (range) {
                node.kind = k::for_range_loop;
                auto specs = parse_specifiers(/*speculative=*/true);
                if (specs) attach_specifiers(node, std::move(*specs));
                if (auto d = parse_declarator(/*speculative=*/true, /*allow_abstract=*/false)) {
                    add(node, std::move(*d), f::declarator);
                }
                expect(":");
                if (auto range_expr = parse_expression()) {
                    add(node, std::move(*range_expr), f::right);
                }
                expect(")");
                if (auto body = parse_statement()) add(node, std::move(*body), f::body);
                close(node);
                return node;
            }
        }

        // Initializer.
        if (!eat(";")) {
            bool done = false;
            {
                Checkpoint cp(*this);
                if (auto decl = try_condition_declaration()) {
                    // try_condition_declaration stops before ';'.
                    while (eat(",")) {
                        if (auto extra = parse_assignment()) add(*decl, std::move(*extra));
                    }
                    if (eat(";")) {
                        add(node, std::move(*decl), f::initializer);
                        done = true;
                    } else {
                        cp.rollback();
                    }
                } else {
                    cp.rollback();
                }
            }
            if (!done) {
                if (auto e = parse_expression()) add(node, std::move(*e), f::initializer);
                if (!eat(";")) {
                    add(node, error_recover_statement(), f::initializer);
                }
            }
        }
        // Condition.
        if (!at(";") && !at(")")) {
            if (auto e = parse_expression()) add(node, std::move(*e), f::condition);
        }
        eat(";");
        // Update.
        if (!at(")")) {
            if (auto e = parse_expression()) add(node, std::move(*e), f::update);
        }
        expect(")");
        if (auto body = parse_statement()) add(node, std::move(*body), f::body);
        close(node);
        return node;
    }

    std::optional<SyntaxNode> parse_expression_statement() {
        std::uint32_t begin = here();
        SyntaxNode node = make(k::expression_statement, begin);
        if (auto e = parse_expression()) {
            add(node, std::move(*e));
        } else {
            return error_recover_statement();
        }
        if (!eat(";")) had_error_ = true;
        close(node);
        return node;
    }

    // Local declaration inside a statement context. Returns nullopt when the
    // tokens do not look like a declaration (caller falls back to an
    // expression statement).
    std::optional<SyntaxNode> parse_declaration_statement() {
        std::uint32_t begin = here();
        auto specs = parse_specifiers(/*speculative=*/true);
        if (!specs || !specs->saw_any || specs->nodes.empty()) return std::nullopt;

        SyntaxNode decl = make(k::declaration, begin);

        // `struct X { ... };` and friends need no declarator.
        if (at(";") && specs->type_index >= 0) {
            advance();
            attach_specifiers(decl, std::move(*specs));
            close(decl);
            return decl;
        }
        if (specs->type_index < 0) return std::nullopt;
        attach_specifiers(decl, std::move(*specs));

        bool committed = false;
        while (true) {
            auto declarator = parse_declarator(/*speculative=*/!committed, /*allow_abstract=*/false);
            if (!declarator) return std::nullopt;
            skip_attributes();
            if (at("=")) {
                advance();
                committed = true;
                SyntaxNode init = make(k::init_declarator, declarator->begin);
                init.begin = declarator->begin;
                add(init, std::move(*declarator), f::declarator);
                if (at(";") || at(",")) {
                    // Missing initializer expression ("int x = ;"): flag and
                    // keep the declaration.
                    add(init, error_node(here()), f::value);
                } else if (auto v = parse_initializer()) {
                    add(init, std::move(*v), f::value);
                }
                close(init);
                add(decl, std::move(init), f::declarator);
            } else if (cpp_ && at("{")) {
                committed = true;
                SyntaxNode init = make(k::init_declarator, declarator->begin);
                init.begin = declarator->begin;
                add(init, std::move(*declarator), f::declarator);
                if (auto v = parse_initializer_list()) add(init, std::move(*v), f::value);
                close(init);
                add(decl, std::move(init), f::declarator);
            } else {
                add(decl, std::move(*declarator), f::declarator);
            }
            if (eat(",")) continue;
            break;
        }
        if (!eat(";")) {
            if (!committed) return std::nullopt;
            had_error_ = true;
        }
        close(decl);
        return decl;
    }

    // ---- top level ---------------------------------------------------------

    std::optional<SyntaxNode> parse_external_item() {
        std::uint32_t begin = here();
        if (cur().type == Tok::Preproc) return token_node(k::preproc_directive);
        if (at(";")) {
            advance();
            return std::nullopt; // stray semicolon: no node
        }
        if (cpp_ && (at_ident("template") || at_ident("using") || at_ident("namespace"))) {
            // Accept these prefixes best-effort: consume the header tokens and
            // parse what follows.
            if (at_ident("template")) {
                advance();
                if (at("<")) {
                    int depth = 0;
                    while (!at_end()) {
                        if (at("<")) ++depth;
                        if (at(">")) {
                            --depth;
                            advance();
                            if (depth == 0) break;
                            continue;
                        }
                        if (at(">>")) {
                            depth -= 2;
                            advance();
                            if (depth <= 0) break;
                            continue;
                        }
                        advance();
                    }
                }
                return parse_external_item();
            }
            return parse_statement();
        }

        {
            Checkpoint cp(*this);
            if (auto item = try_function_or_declaration()) return item;
            cp.rollback();
        }
        // Fall back to statement parsing (handles expression-like macro soup).
        {
            std::size_t before = pos_;
            auto stmt = parse_statement();
            if (stmt && pos_ > before) return stmt;
        }
        advance();
        return error_node(begin);
    }

    std::optional<SyntaxNode> try_function_or_declaration() {
        std::uint32_t begin = here();
        auto specs = parse_specifiers(/*speculative=*/true);
        if (!specs || !specs->saw_any || specs->nodes.empty()) return std::nullopt;

        if (at(";") && specs->type_index >= 0) {
            advance();
            SyntaxNode decl = make(k::declaration, begin);
            attach_specifiers(decl, std::move(*specs));
            close(decl);
            return decl;
        }

        auto declarator = parse_declarator(/*speculative=*/true, /*allow_abstract=*/false);
        if (!declarator) return std::nullopt;
        skip_attributes();

        if (at("{")) {
            SyntaxNode fn = make(k::function_definition, begin);
            attach_specifiers(fn, std::move(*specs));
            add(fn, std::move(*declarator), f::declarator);
            add(fn, parse_compound_statement(), f::body);
            close(fn);
            return fn;
        }
        // K&R parameter declarations between declarator and body.
        if (starts_specifier(cur()) && declarator->kind == k::function_declarator) {
            SyntaxNode fn = make(k::function_definition, begin);
            attach_specifiers(fn, std::move(*specs));
            add(fn, std::move(*declarator), f::declarator);
            int guard = 0;
            while (!at("{") && !at_end() && guard < 64) {
                Checkpoint cp(*this);
                if (auto d = parse_declaration_statement()) {
                    add(fn, std::move(*d));
                } else {
                    cp.rollback();
                    break;
                }
                ++guard;
            }
            if (!at("{")) return std::nullopt;
            add(fn, parse_compound_statement(), f::body);
            close(fn);
            return fn;
        }

        // Declaration with optional initializer list.
        SyntaxNode decl = make(k::declaration, begin);
        attach_specifiers(decl, std::move(*specs));
        bool committed = false;
        while (true) {
            if (at("=")) {
                advance();
                committed = true;
                SyntaxNode init = make(k::init_declarator, declarator->begin);
                init.begin = declarator->begin;
                add(init, std::move(*declarator), f::declarator);
                if (auto v = parse_initializer()) add(init, std::move(*v), f::value);
                close(init);
                add(decl, std::move(init), f::declarator);
            } else {
                add(decl, std::move(*declarator), f::declarator);
            }
            if (eat(",")) {
                auto next = parse_declarator(/*speculative=*/!committed, /*allow_abstract=*/false);
                if (!next) return std::nullopt;
                declarator = std::move(next);
                continue;
            }
            break;
        }
        if (!eat(";")) {
            if (!committed) return std::nullopt;
            had_error_ = true;
        }
        close(decl);
        return decl;
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::uint32_t last_end_ = 0;
    bool cpp_ = true;
    bool had_error_ = false;
    bool bare_identifier_type_ = false;
    int depth_ = 0;
};

int count_error_nodes(const SyntaxNode& n) {
    int c = n.is_error() ? 1 : 0;
    for (const auto& ch : n.children) c += count_error_nodes(ch);
    return c;
}

} // namespace

SyntaxTree parse_with_dialect(const SourceFunction& source, Dialect dialect) {
    Parser parser(source.code, dialect == Dialect::Cpp);
    SyntaxNode root = parser.parse_translation_unit();
    bool parse_error = parser.had_error() || count_error_nodes(root) > 0;
    SourceFunction copy = source;
    copy.dialect = dialect;
    return SyntaxTree(std::move(copy), std::move(root), parse_error, dialect);
}

SyntaxTree parse_function(const SourceFunction& source) {
    if (source.code.empty()) {
        throw Error("empty source (sample '" + source.id + "')");
    }
    try {
        if (source.dialect == Dialect::C) return parse_with_dialect(source, Dialect::C);
        if (source.dialect == Dialect::Cpp) return parse_with_dialect(source, Dialect::Cpp);
        // Auto: C++ first, fall back to C when it parses more cleanly.
        SyntaxTree cpp_tree = parse_with_dialect(source, Dialect::Cpp);
        if (!cpp_tree.parse_error()) return cpp_tree;
        SyntaxTree c_tree = parse_with_dialect(source, Dialect::C);
        int cpp_errors = count_error_nodes(cpp_tree.root());
        int c_errors = count_error_nodes(c_tree.root());
        if (c_errors < cpp_errors || (c_errors == cpp_errors && !c_tree.parse_error())) {
            return c_tree;
        }
        return cpp_tree;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("parse failure for sample '" + source.id + "': " + e.what());
    }
}

} // namespace metriscope
