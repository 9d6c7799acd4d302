#include <cctype>
#include <set>
#include <sstream>

#include "metriscope/query.hpp"

namespace metriscope {

bool QueryPattern::operator==(const QueryPattern&) const = default;

namespace {

struct QTok {
    enum Type { LParen, RParen, Pipe, Bang, Star, Plus, DescStar, DescPlus, At, Colon,
                LBrace, RBrace, Ident, String, Comma, End } type;
    std::string_view text;
    std::size_t offset;
};

class QueryLexer {
public:
    explicit QueryLexer(std::string_view src) : src_(src) {}

    std::vector<QTok> run() {
        std::vector<QTok> out;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            std::size_t begin = pos_;
            switch (c) {
            case '(': out.push_back({QTok::LParen, take(1), begin}); break;
            case ')': out.push_back({QTok::RParen, take(1), begin}); break;
            case '|': out.push_back({QTok::Pipe, take(1), begin}); break;
            case '!': out.push_back({QTok::Bang, take(1), begin}); break;
            case '*': out.push_back({QTok::Star, take(1), begin}); break;
            case '+': out.push_back({QTok::Plus, take(1), begin}); break;
            case '@': out.push_back({QTok::At, take(1), begin}); break;
            case ':': out.push_back({QTok::Colon, take(1), begin}); break;
            case '{': out.push_back({QTok::LBrace, take(1), begin}); break;
            case '}': out.push_back({QTok::RBrace, take(1), begin}); break;
            case ',': out.push_back({QTok::Comma, take(1), begin}); break;
            case '^': {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                    out.push_back({QTok::DescStar, take(2), begin});
                } else if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '+') {
                    out.push_back({QTok::DescPlus, take(2), begin});
                } else {
                    throw QuerySyntaxError("unknown quantifier '^'", begin);
                }
                break;
            }
            case '\'': {
                ++pos_;
                std::size_t start = pos_;
                while (pos_ < src_.size() && src_[pos_] != '\'') ++pos_;
                if (pos_ >= src_.size()) throw QuerySyntaxError("unterminated string", begin);
                out.push_back({QTok::String, src_.substr(start, pos_ - start), begin});
                ++pos_;
                break;
            }
            default: {
                if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                    std::size_t start = pos_;
                    while (pos_ < src_.size() &&
                           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                            src_[pos_] == '_')) {
                        ++pos_;
                    }
                    out.push_back({QTok::Ident, src_.substr(start, pos_ - start), begin});
                } else {
                    throw QuerySyntaxError(std::string("unexpected character '") + c + "'", begin);
                }
            }
            }
        }
        out.push_back({QTok::End, {}, src_.size()});
        return out;
    }

private:
    std::string_view take(std::size_t n) {
        std::string_view s = src_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

class QueryParser {
public:
    explicit QueryParser(std::string_view src) : toks_(QueryLexer(src).run()) {}

    QueryPattern run() {
        QueryPattern p = parse_pattern();
        parse_decorations(p, /*item_context=*/false);
        if (cur().type != QTok::End) {
            throw QuerySyntaxError("trailing input after pattern", cur().offset);
        }
        validate(p);
        std::set<std::string> names;
        check_captures(p, names);
        return p;
    }

private:
    const QTok& cur() const { return toks_[pos_]; }
    const QTok& peek(std::size_t n = 1) const {
        return toks_[std::min(pos_ + n, toks_.size() - 1)];
    }
    void advance() { if (cur().type != QTok::End) ++pos_; }

    void expect(QTok::Type t, const char* what) {
        if (cur().type != t) throw QuerySyntaxError(std::string("expected ") + what, cur().offset);
        advance();
    }

    QueryPattern parse_pattern() {
        expect(QTok::LParen, "'('");
        QueryPattern p;
        switch (cur().type) {
        case QTok::Ident: {
            if (cur().text == "_") {
                p.head = QueryPattern::Head::Wildcard;
            } else {
                p.head = QueryPattern::Head::Kind;
                p.kind = std::string(cur().text);
            }
            advance();
            parse_node_body(p);
            break;
        }
        case QTok::Bang: {
            advance();
            if (cur().type != QTok::Ident) {
                throw QuerySyntaxError("expected kind name after '!'", cur().offset);
            }
            p.head = QueryPattern::Head::Negation;
            p.kind = std::string(cur().text);
            advance();
            parse_node_body(p);
            break;
        }
        case QTok::LBrace: {
            p.head = QueryPattern::Head::Wildcard;
            parse_node_body(p);
            break;
        }
        case QTok::LParen: {
            // Alternative or sequence group.
            std::vector<QueryItem> items;
            bool alternative = false;
            while (cur().type != QTok::RParen && cur().type != QTok::End) {
                QueryItem item;
                item.pattern = parse_pattern();
                parse_decorations(item.pattern, /*item_context=*/true, &item.quantifier);
                items.push_back(std::move(item));
                if (cur().type == QTok::Pipe) {
                    alternative = true;
                    advance();
                }
            }
            expect(QTok::RParen, "')'");
            if (alternative) {
                p.head = QueryPattern::Head::Alternative;
                for (auto& item : items) {
                    if (item.quantifier != Quantifier::One) {
                        throw QuerySyntaxError("quantifier not allowed on alternative branch",
                                               cur().offset);
                    }
                    p.branches.push_back(std::move(item.pattern));
                }
                if (p.branches.size() < 2) {
                    throw QuerySyntaxError("alternative needs at least two branches", cur().offset);
                }
            } else if (items.size() == 1 && items[0].quantifier == Quantifier::One) {
                // Redundant parentheses: ((a)) is (a).
                p = std::move(items[0].pattern);
            } else {
                p.head = QueryPattern::Head::Sequence;
                p.items = std::move(items);
            }
            return p;
        }
        default:
            throw QuerySyntaxError("expected node head", cur().offset);
        }
        return p;
    }

    void parse_node_body(QueryPattern& p) {
        while (true) {
            switch (cur().type) {
            case QTok::RParen:
                advance();
                return;
            case QTok::Bang: { // negated field
                advance();
                if (cur().type != QTok::Ident) {
                    throw QuerySyntaxError("expected field name after '!'", cur().offset);
                }
                p.negated_fields.emplace_back(cur().text);
                advance();
                break;
            }
            case QTok::LBrace: { // attribute predicates
                advance();
                while (cur().type != QTok::RBrace) {
                    if (cur().type != QTok::Ident) {
                        throw QuerySyntaxError("expected attribute key", cur().offset);
                    }
                    AttributePredicate attr;
                    attr.key = std::string(cur().text);
                    advance();
                    expect(QTok::Colon, "':'");
                    if (cur().type != QTok::String && cur().type != QTok::Ident) {
                        throw QuerySyntaxError("expected attribute value", cur().offset);
                    }
                    attr.value = std::string(cur().text);
                    advance();
                    p.attributes.push_back(std::move(attr));
                    if (cur().type == QTok::Comma) advance();
                }
                advance(); // '}'
                break;
            }
            case QTok::Ident: { // field constraint: name ':' pattern
                if (peek().type != QTok::Colon) {
                    throw QuerySyntaxError("unexpected identifier in child list", cur().offset);
                }
                std::string field(cur().text);
                advance();
                advance(); // ':'
                QueryItem item;
                item.pattern = parse_pattern();
                item.pattern.field = field;
                parse_decorations(item.pattern, /*item_context=*/true, &item.quantifier);
                p.items.push_back(std::move(item));
                break;
            }
            case QTok::LParen: {
                QueryItem item;
                item.pattern = parse_pattern();
                parse_decorations(item.pattern, /*item_context=*/true, &item.quantifier);
                p.items.push_back(std::move(item));
                break;
            }
            case QTok::End:
                throw QuerySyntaxError("unbalanced parentheses", cur().offset);
            default:
                throw QuerySyntaxError("unexpected token in node body", cur().offset);
            }
        }
    }

    void parse_decorations(QueryPattern& p, bool item_context, Quantifier* quant = nullptr) {
        while (true) {
            switch (cur().type) {
            case QTok::Star:
            case QTok::Plus:
            case QTok::DescStar:
            case QTok::DescPlus: {
                if (!item_context || quant == nullptr) {
                    throw QuerySyntaxError("quantifier only allowed on child items", cur().offset);
                }
                if (*quant != Quantifier::One) {
                    throw QuerySyntaxError("duplicate quantifier", cur().offset);
                }
                switch (cur().type) {
                case QTok::Star: *quant = Quantifier::Star; break;
                case QTok::Plus: *quant = Quantifier::Plus; break;
                case QTok::DescStar: *quant = Quantifier::DescendStar; break;
                default: *quant = Quantifier::DescendPlus; break;
                }
                advance();
                break;
            }
            case QTok::At: {
                advance();
                if (cur().type != QTok::Ident) {
                    throw QuerySyntaxError("expected capture name after '@'", cur().offset);
                }
                p.capture = std::string(cur().text);
                advance();
                break;
            }
            default:
                return;
            }
        }
    }

    // Structural constraints: flatten single groups, at most one descendant
    // item per child list, sibling quantifiers on plain patterns only.
    void validate(QueryPattern& p) {
        for (auto& branch : p.branches) validate(branch);

        // Splice unquantified sequence items into their parent list so the
        // matcher only ever sees quantified groups.
        std::vector<QueryItem> flat;
        for (auto& item : p.items) {
            if (item.pattern.head == QueryPattern::Head::Sequence &&
                item.quantifier == Quantifier::One && item.pattern.capture.empty() &&
                item.pattern.field.empty()) {
                for (auto& inner : item.pattern.items) flat.push_back(std::move(inner));
            } else {
                flat.push_back(std::move(item));
            }
        }
        p.items = std::move(flat);

        int descend_items = 0;
        for (auto& item : p.items) {
            validate(item.pattern);
            bool descend = item.quantifier == Quantifier::DescendStar ||
                           item.quantifier == Quantifier::DescendPlus;
            bool group = item.pattern.head == QueryPattern::Head::Sequence;
            if (descend) ++descend_items;
            if (group && !descend) {
                if (item.quantifier == Quantifier::One) {
                    throw QuerySyntaxError(
                        "groups cannot carry field constraints or captures", 0);
                }
                throw QuerySyntaxError(
                    "sibling quantifier on a group is not supported; use ^* or ^+", 0);
            }
            if (group && descend) {
                // A chained group moves the match context downward; nested
                // descent inside it would make the endpoint ambiguous.
                for (const auto& inner : item.pattern.items) {
                    if (inner.quantifier == Quantifier::DescendStar ||
                        inner.quantifier == Quantifier::DescendPlus) {
                        if (inner.pattern.head == QueryPattern::Head::Sequence) {
                            throw QuerySyntaxError("nested group chains are not supported", 0);
                        }
                    }
                }
            }
        }
        if (descend_items > 1) {
            throw QuerySyntaxError("at most one descendant-quantified item per child list", 0);
        }
    }

    void check_captures(const QueryPattern& p, std::set<std::string>& names) {
        if (!p.capture.empty() && !names.insert(p.capture).second) {
            throw QuerySyntaxError("duplicate capture name '" + p.capture + "'", 0);
        }
        for (const auto& b : p.branches) check_captures(b, names);
        for (const auto& item : p.items) check_captures(item.pattern, names);
    }

    std::vector<QTok> toks_;
    std::size_t pos_ = 0;
};

void render(const QueryPattern& p, std::ostringstream& os, bool as_item);

void render_items(const QueryPattern& p, std::ostringstream& os) {
    for (const auto& f : p.negated_fields) os << " !" << f;
    if (!p.attributes.empty()) {
        os << " {";
        for (std::size_t i = 0; i < p.attributes.size(); ++i) {
            if (i) os << ", ";
            os << p.attributes[i].key << ": '" << p.attributes[i].value << "'";
        }
        os << "}";
    }
    for (const auto& item : p.items) {
        os << " ";
        if (!item.pattern.field.empty()) os << item.pattern.field << ": ";
        render(item.pattern, os, /*as_item=*/true);
        switch (item.quantifier) {
        case Quantifier::One: break;
        case Quantifier::Star: os << "*"; break;
        case Quantifier::Plus: os << "+"; break;
        case Quantifier::DescendStar: os << "^*"; break;
        case Quantifier::DescendPlus: os << "^+"; break;
        }
        if (!item.pattern.capture.empty()) os << " @" << item.pattern.capture;
    }
}

void render(const QueryPattern& p, std::ostringstream& os, bool as_item) {
    switch (p.head) {
    case QueryPattern::Head::Kind:
        os << "(" << p.kind;
        render_items(p, os);
        os << ")";
        break;
    case QueryPattern::Head::Wildcard:
        os << "(";
        if (p.attributes.empty() || !p.items.empty() || !p.negated_fields.empty()) os << "_";
        render_items(p, os);
        os << ")";
        break;
    case QueryPattern::Head::Negation:
        os << "(!" << p.kind;
        render_items(p, os);
        os << ")";
        break;
    case QueryPattern::Head::Alternative: {
        os << "(";
        for (std::size_t i = 0; i < p.branches.size(); ++i) {
            if (i) os << " | ";
            render(p.branches[i], os, /*as_item=*/false);
            if (!p.branches[i].capture.empty()) os << " @" << p.branches[i].capture;
        }
        os << ")";
        break;
    }
    case QueryPattern::Head::Sequence: {
        os << "(";
        std::ostringstream inner;
        render_items(p, inner);
        std::string s = inner.str();
        os << (s.empty() ? "" : s.substr(1)); // drop leading space
        os << ")";
        break;
    }
    }
    (void)as_item;
}

} // namespace

QueryPattern parse_query(std::string_view text) {
    return QueryParser(text).run();
}

std::string render_query(const QueryPattern& pattern) {
    std::ostringstream os;
    render(pattern, os, /*as_item=*/false);
    if (!pattern.capture.empty()) os << " @" << pattern.capture;
    return os.str();
}

} // namespace metriscope
