#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "kinds.hpp"
#include "metriscope/metrics.hpp"

namespace metriscope {

namespace k = kinds;
namespace f = kinds::fields;

std::optional<long double> parse_number_literal(std::string_view text) {
    std::string body;
    body.reserve(text.size());
    for (char c : text) {
        if (c != '\'') body.push_back(c); // digit separators
    }
    if (body.empty()) return std::nullopt;

    auto strip_int_suffix = [](std::string& s) {
        while (!s.empty()) {
            char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s.back())));
            if (c == 'u' || c == 'l' || c == 'z') {
                s.pop_back();
            } else {
                break;
            }
        }
    };

    bool hex = body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X');
    bool bin = body.size() > 2 && body[0] == '0' && (body[1] == 'b' || body[1] == 'B');

    if (bin) {
        std::string digits = body.substr(2);
        strip_int_suffix(digits);
        if (digits.empty()) return std::nullopt;
        long double v = 0;
        for (char c : digits) {
            if (c != '0' && c != '1') return std::nullopt;
            v = v * 2 + (c - '0');
        }
        return v;
    }
    if (hex) {
        bool is_float = body.find('.') != std::string::npos ||
                        body.find('p') != std::string::npos || body.find('P') != std::string::npos;
        if (is_float) {
            char* end = nullptr;
            long double v = std::strtold(body.c_str(), &end);
            if (end == body.c_str()) return std::nullopt;
            return v;
        }
        std::string digits = body;
        strip_int_suffix(digits);
        char* end = nullptr;
        unsigned long long v = std::strtoull(digits.c_str(), &end, 16);
        if (end == digits.c_str() || *end != '\0') return std::nullopt;
        return static_cast<long double>(v);
    }

    bool is_float = body.find('.') != std::string::npos || body.find('e') != std::string::npos ||
                    body.find('E') != std::string::npos;
    if (is_float) {
        std::string digits = body;
        while (!digits.empty()) {
            char c = static_cast<char>(std::tolower(static_cast<unsigned char>(digits.back())));
            if (c == 'f' || c == 'l') {
                digits.pop_back();
            } else {
                break;
            }
        }
        char* end = nullptr;
        long double v = std::strtold(digits.c_str(), &end);
        if (end == digits.c_str() || *end != '\0') return std::nullopt;
        return v;
    }

    std::string digits = body;
    strip_int_suffix(digits);
    if (digits.empty()) return std::nullopt;
    int base = digits.size() > 1 && digits[0] == '0' ? 8 : 10;
    char* end = nullptr;
    unsigned long long v = std::strtoull(digits.c_str(), &end, base);
    if (end == digits.c_str() || *end != '\0') return std::nullopt;
    return static_cast<long double>(v);
}

namespace {

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto lower = [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    };
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (lower(haystack[i + j]) != lower(needle[j])) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Pointer typing for {type: 'pointer'}.
// ---------------------------------------------------------------------------

void collect_declared_names(const SyntaxTree& tree, const SyntaxNode& declarator, bool pointerish,
                            std::unordered_set<std::string>& names) {
    if (declarator.kind == k::pointer_declarator || declarator.kind == k::array_declarator) {
        pointerish = true;
    }
    if (declarator.kind == k::identifier) {
        if (pointerish) names.emplace(tree.text(declarator));
        return;
    }
    for (const auto& child : declarator.children) {
        // Array sizes and initializer values are expressions, not names.
        if (child.field == f::size || child.field == f::value) continue;
        collect_declared_names(tree, child, pointerish, names);
    }
}

struct PointerMarks {
    std::unordered_set<const SyntaxNode*> marked;
};

bool is_arithmetic_binary(const SyntaxNode& n) {
    if (n.kind != k::binary_expression) return false;
    for (const auto& child : n.children) {
        if (child.field == f::operator_) return child.kind == "+" || child.kind == "-";
    }
    return false;
}

bool mark_pointers(const SyntaxTree& tree, const SyntaxNode& node,
                   const std::unordered_set<std::string>& names, PointerMarks& marks) {
    bool any_child_marked = false;
    for (const auto& child : node.children) {
        if (mark_pointers(tree, child, names, marks)) any_child_marked = true;
    }

    bool marked = false;
    if (node.kind == k::identifier && names.count(std::string(tree.text(node)))) {
        marked = true;
    } else if (node.kind == k::pointer_expression) {
        for (const auto& child : node.children) {
            if (child.field == f::operator_ && child.kind == "&") marked = true;
        }
    } else if (node.kind == k::parenthesized_expression) {
        marked = any_child_marked;
    } else if (node.kind == k::unary_expression || is_arithmetic_binary(node)) {
        for (const auto& child : node.children) {
            if (child.field == f::operator_) continue;
            if (marks.marked.count(&child)) marked = true;
        }
    }
    if (marked) marks.marked.insert(&node);
    return marked;
}

std::shared_ptr<PointerMarks> compute_pointer_marks(const SyntaxTree& tree) {
    std::unordered_set<std::string> names;
    for (const SyntaxNode* n : iter_named_nodes(tree)) {
        if (n->kind == k::declaration || n->kind == k::parameter_declaration ||
            n->kind == k::field_declaration || n->kind == k::for_range_loop) {
            for (const auto& child : n->children) {
                if (child.field == f::declarator) {
                    collect_declared_names(tree, child, /*pointerish=*/false, names);
                }
            }
        }
    }
    auto marks = std::make_shared<PointerMarks>();
    mark_pointers(tree, tree.root(), names, *marks);
    return marks;
}

// ---------------------------------------------------------------------------
// Metric evaluation.
// ---------------------------------------------------------------------------

class Evaluator {
public:
    Evaluator(const SyntaxTree& tree, const MetricCatalog& catalog, const NodeCategoryTable& table)
        : tree_(tree), catalog_(catalog), table_(table) {}

    double evaluate(const MetricSpec& spec) {
        std::vector<MatchResult> matches = compiled(spec).match_all(tree_);
        return reduce(spec.reduce, spec, matches);
    }

private:
    CompiledQuery& compiled(const MetricSpec& spec) {
        auto it = compiled_.find(&spec);
        if (it == compiled_.end()) {
            it = compiled_.emplace(&spec, CompiledQuery(spec.filter, table_, oracle_for(spec)))
                     .first;
        }
        return it->second;
    }

    const AttributeOracle& oracle_for(const MetricSpec& spec) {
        if (needs_oracle(spec) && !oracle_) {
            auto marks = compute_pointer_marks(tree_);
            oracle_ = [marks](const SyntaxNode& n, std::string_view key, std::string_view value) {
                return key == "type" && value == "pointer" && marks->marked.count(&n) > 0;
            };
        }
        return oracle_;
    }

    static bool pattern_has_attributes(const QueryPattern& p) {
        if (!p.attributes.empty()) return true;
        for (const auto& b : p.branches) {
            if (pattern_has_attributes(b)) return true;
        }
        for (const auto& item : p.items) {
            if (pattern_has_attributes(item.pattern)) return true;
        }
        return false;
    }

    bool needs_oracle(const MetricSpec& spec) {
        if (pattern_has_attributes(spec.filter)) return true;
        for (const auto& aux : spec.map.aux_ids) {
            if (pattern_has_attributes(catalog_.find(aux).filter)) return true;
        }
        return false;
    }

    double reduce(ReduceKind kind, const MetricSpec& spec, const std::vector<MatchResult>& ms) {
        if (ms.empty()) return 0.0;
        double acc = 0.0;
        bool first = true;
        for (const auto& m : ms) {
            double v = map_value(spec, m);
            switch (kind) {
            case ReduceKind::Sum:
            case ReduceKind::Avg:
                acc += v;
                break;
            case ReduceKind::Max:
                acc = first ? v : std::max(acc, v);
                break;
            }
            first = false;
        }
        if (kind == ReduceKind::Avg) return acc / static_cast<double>(ms.size());
        return acc;
    }

    double map_value(const MetricSpec& spec, const MatchResult& m) {
        const MapKind& map = spec.map;
        switch (map.op) {
        case MapKind::Op::ConstantOne:
            return 1.0;
        case MapKind::Op::MagicNumberIndicator: {
            auto value = parse_number_literal(std::string(tree_.text(*m.root)));
            if (!value) return 1.0; // unparseable literals are never -1/0/1
            long double v = *value;
            if (is_negated_literal(*m.root)) v = -v;
            return (v == -1.0L || v == 0.0L || v == 1.0L) ? 0.0 : 1.0;
        }
        case MapKind::Op::CaptureTextInSet: {
            auto it = m.captures.find(map.capture);
            if (it == m.captures.end() || it->second.empty()) return 0.0;
            std::string_view text = tree_.text(*it->second.front());
            for (const auto& s : map.text_set) {
                if (text == s) return 1.0;
            }
            return 0.0;
        }
        case MapKind::Op::CaptureTextContains: {
            auto it = m.captures.find(map.capture);
            if (it == m.captures.end() || it->second.empty()) return 0.0;
            return contains_ci(tree_.text(*it->second.front()), map.needle) ? 1.0 : 0.0;
        }
        case MapKind::Op::ConditionAuxPlusOne: {
            const SyntaxNode* scope = condition_scope(*m.root);
            double aux = scope ? evaluate_over(catalog_.find(map.aux_ids.front()), *scope) : 0.0;
            return 1.0 + aux;
        }
        case MapKind::Op::AuxPositiveIndicator: {
            double aux = evaluate_over(catalog_.find(map.aux_ids.front()), *m.root);
            return aux > 0 ? 1.0 : 0.0;
        }
        case MapKind::Op::AuxRootSum: {
            double total = 0;
            for (const auto& id : map.aux_ids) {
                const MetricSpec& aux = catalog_.find(id);
                auto results = compiled(aux).results_at(tree_, *m.root);
                for (const auto& r : results) total += map_value(aux, r);
            }
            return total;
        }
        case MapKind::Op::SubtreeHeight:
            return subtree_height(*m.root);
        case MapKind::Op::CaptureCardinality: {
            auto it = m.captures.find(map.capture);
            return it == m.captures.end() ? 0.0 : static_cast<double>(it->second.size());
        }
        case MapKind::Op::OperandCount: {
            double count = 0;
            for (const SyntaxNode* n : iter_named_nodes(*m.root)) {
                for (const auto& cat : map.categories) {
                    if (category_matches(*n, cat, table_)) {
                        count += 1;
                        break;
                    }
                }
            }
            return count;
        }
        case MapKind::Op::CategoryNestingDepth: {
            ensure_index();
            double depth = 1;
            const SyntaxNode* p = index_->parent(m.root);
            while (p != nullptr) {
                if (category_matches(*p, map.categories.front(), table_)) depth += 1;
                p = index_->parent(p);
            }
            return depth;
        }
        case MapKind::Op::CategoryNestedIndicator: {
            ensure_index();
            const SyntaxNode* p = index_->parent(m.root);
            while (p != nullptr) {
                if (category_matches(*p, map.categories.front(), table_)) return 1.0;
                p = index_->parent(p);
            }
            return 0.0;
        }
        case MapKind::Op::CategoryDescendantCount: {
            double count = 0;
            for (const SyntaxNode* n : iter_named_nodes(*m.root)) {
                if (n == m.root) continue;
                if (category_matches(*n, map.categories.front(), table_)) count += 1;
            }
            return count;
        }
        }
        return 0.0;
    }

    // Aux metric over the subtree rooted at `scope`.
    double evaluate_over(const MetricSpec& aux, const SyntaxNode& scope) {
        CompiledQuery& query = compiled(aux);
        std::vector<MatchResult> matches;
        for (const SyntaxNode* n : iter_named_nodes(scope)) {
            auto rs = query.results_at(tree_, *n);
            for (auto& r : rs) matches.push_back(std::move(r));
        }
        return reduce(aux.reduce, aux, matches);
    }

    const SyntaxNode* condition_scope(const SyntaxNode& node) const {
        std::string_view wanted = node.kind == k::case_statement ? f::value : f::condition;
        for (const auto& child : node.children) {
            if (child.field == wanted) return &child;
        }
        return nullptr;
    }

    bool is_negated_literal(const SyntaxNode& literal) {
        ensure_index();
        const SyntaxNode* p = index_->parent(&literal);
        if (p == nullptr || p->kind != k::unary_expression) return false;
        bool minus = false;
        for (const auto& child : p->children) {
            if (child.field == f::operator_) minus = child.kind == "-";
        }
        return minus;
    }

    void ensure_index() {
        if (!index_) index_ = std::make_unique<TreeIndex>(tree_);
    }

    const SyntaxTree& tree_;
    const MetricCatalog& catalog_;
    const NodeCategoryTable& table_;
    AttributeOracle oracle_;
    std::unique_ptr<TreeIndex> index_;
    std::unordered_map<const MetricSpec*, CompiledQuery> compiled_;
};

} // namespace

AttributeOracle pointer_attribute_oracle(const SyntaxTree& tree) {
    auto marks = compute_pointer_marks(tree);
    return [marks](const SyntaxNode& n, std::string_view key, std::string_view value) {
        return key == "type" && value == "pointer" && marks->marked.count(&n) > 0;
    };
}

double evaluate_metric(const SyntaxTree& tree, const MetricSpec& spec,
                       const MetricCatalog& catalog, const NodeCategoryTable& table) {
    Evaluator evaluator(tree, catalog, table);
    return evaluator.evaluate(spec);
}

FeatureVector extract_features(const SyntaxTree& tree, const MetricCatalog& catalog,
                               const NodeCategoryTable& table) {
    Evaluator evaluator(tree, catalog, table);
    FeatureVector out;
    out.parse_error = tree.parse_error();
    const auto& exported = catalog.exported();
    for (std::size_t i = 0; i < exported.size() && i < kFeatureCount; ++i) {
        out.values[i] = evaluator.evaluate(*exported[i]);
    }
    return out;
}

} // namespace metriscope
