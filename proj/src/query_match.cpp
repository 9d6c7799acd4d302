#include <cassert>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "metriscope/query.hpp"

namespace metriscope {

namespace {

// ---------------------------------------------------------------------------
// Pattern compilation: resolve kind names against the category table once,
// expand `+` into `one` + `*` (same pattern object, so captures merge), and
// flatten everything into pointer-stable nodes.
// ---------------------------------------------------------------------------

struct CompiledPattern;

struct CompiledItem {
    const CompiledPattern* pattern = nullptr;
    Quantifier quantifier = Quantifier::One;
};

struct CompiledPattern {
    QueryPattern::Head head = QueryPattern::Head::Wildcard;
    // Kind/Negation resolution: either a concrete kind or a category.
    bool is_category = false;
    std::string_view kind;
    std::string category; // owned copy for table lookups
    std::vector<const CompiledPattern*> branches;
    std::vector<CompiledItem> items;
    std::vector<std::string_view> negated_fields;
    std::string_view field;
    const std::vector<AttributePredicate>* attributes = nullptr;
    std::string_view capture;
};

struct Compiler {
    const NodeCategoryTable& table;
    std::deque<CompiledPattern> arena;
    bool any_capture = false;
    bool any_attribute = false;

    explicit Compiler(const NodeCategoryTable& t) : table(t) {}

    const CompiledPattern* compile(const QueryPattern& p) {
        CompiledPattern& cp = arena.emplace_back();
        cp.head = p.head;
        if (p.head == QueryPattern::Head::Kind || p.head == QueryPattern::Head::Negation) {
            cp.kind = p.kind;
            if (table.contains(p.kind)) {
                cp.is_category = true;
                cp.category = p.kind;
            } else {
                bool known = false;
                for (auto k : known_node_kinds()) {
                    if (k == p.kind) known = true;
                }
                if (!known) {
                    std::string msg = "pattern references unknown kind or category '" + p.kind +
                                      "'; known categories:";
                    for (const auto& c : table.known_categories()) msg += " " + c;
                    throw Error(msg);
                }
            }
        }
        for (const auto& b : p.branches) cp.branches.push_back(compile(b));
        for (const auto& item : p.items) {
            const CompiledPattern* sub = compile(item.pattern);
            if (item.quantifier == Quantifier::Plus) {
                cp.items.push_back({sub, Quantifier::One});
                cp.items.push_back({sub, Quantifier::Star});
            } else {
                cp.items.push_back({sub, item.quantifier});
            }
        }
        for (const auto& nf : p.negated_fields) cp.negated_fields.push_back(nf);
        cp.field = p.field;
        if (!p.attributes.empty()) {
            cp.attributes = &p.attributes;
            any_attribute = true;
        }
        cp.capture = p.capture;
        if (!p.capture.empty()) any_capture = true;
        return &cp;
    }
};

// ---------------------------------------------------------------------------
// Matching. States of the child-list walk are (context node, cursor, item
// index); memoization over states keeps the search polynomial. Semantics are
// documented in query.hpp; the brute-force oracle in the test suite
// re-implements them independently.
// ---------------------------------------------------------------------------

struct StateKey {
    const void* list;
    const SyntaxNode* ctx;
    std::uint32_t cursor;
    std::uint32_t item;
    bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const {
        std::size_t h = std::hash<const void*>()(k.list);
        h ^= std::hash<const void*>()(k.ctx) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= (static_cast<std::size_t>(k.cursor) << 17) ^ k.item;
        return h;
    }
};

struct NodeKey {
    const CompiledPattern* pat;
    const SyntaxNode* node;
    bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const {
        std::size_t h = std::hash<const void*>()(k.pat);
        h ^= std::hash<const void*>()(k.node) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

class Matcher {
public:
    Matcher(const NodeCategoryTable& table, const AttributeOracle& oracle)
        : table_(table), oracle_(oracle) {}

    void reset() {
        match_memo_.clear();
        exists_memo_.clear();
        endpoint_memo_.clear();
    }

    bool full_match(const SyntaxNode& n, const CompiledPattern& p) {
        NodeKey key{&p, &n};
        auto it = match_memo_.find(key);
        if (it != match_memo_.end()) return it->second;
        match_memo_.emplace(key, false); // guards against pathological cycles
        bool ok = full_match_uncached(n, p);
        match_memo_[key] = ok;
        return ok;
    }

    // Enumerates every (item, node) binding participating in some complete
    // assignment for root `n`, assuming full_match(n, p) holds.
    void collect(const SyntaxNode& n, const CompiledPattern& p, MatchResult& out) {
        collect_pattern(n, p, out);
    }

private:
    bool kind_match(const SyntaxNode& n, const CompiledPattern& p) {
        if (p.is_category) return category_matches(n, p.category, table_);
        return n.named && n.kind == p.kind;
    }

    bool full_match_uncached(const SyntaxNode& n, const CompiledPattern& p) {
        switch (p.head) {
        case QueryPattern::Head::Kind:
            if (!kind_match(n, p)) return false;
            break;
        case QueryPattern::Head::Wildcard:
        case QueryPattern::Head::Sequence:
            if (!n.named) return false;
            break;
        case QueryPattern::Head::Negation:
            if (!n.named || kind_match(n, p)) return false;
            break;
        case QueryPattern::Head::Alternative: {
            bool any = false;
            for (const auto* b : p.branches) {
                if (full_match(n, *b)) any = true;
            }
            if (!any) return false;
            break;
        }
        }
        if (!p.field.empty() && n.field != p.field) return false;
        for (auto nf : p.negated_fields) {
            for (const auto& child : n.children) {
                if (child.field == nf) return false;
            }
        }
        if (p.attributes != nullptr) {
            if (!oracle_) throw Error("pattern uses attribute predicates but no oracle was given");
            for (const auto& attr : *p.attributes) {
                if (!oracle_(n, attr.key, attr.value)) return false;
            }
        }
        if (p.head == QueryPattern::Head::Alternative) return true;
        return exists_from(n, 0, p.items, 0);
    }

    // Does items[k..] admit a valid assignment starting at (ctx, cursor)?
    bool exists_from(const SyntaxNode& ctx, std::uint32_t cursor,
                     const std::vector<CompiledItem>& items, std::uint32_t k) {
        if (k >= items.size()) return true;
        StateKey key{&items, &ctx, cursor, k};
        auto it = exists_memo_.find(key);
        if (it != exists_memo_.end()) return it->second;
        exists_memo_.emplace(key, false);
        bool ok = exists_uncached(ctx, cursor, items, k);
        exists_memo_[key] = ok;
        return ok;
    }

    bool exists_uncached(const SyntaxNode& ctx, std::uint32_t cursor,
                         const std::vector<CompiledItem>& items, std::uint32_t k) {
        const CompiledItem& item = items[k];
        const auto& ch = ctx.children;
        switch (item.quantifier) {
        case Quantifier::One:
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern) && exists_from(ctx, j + 1, items, k + 1)) {
                    return true;
                }
            }
            return false;
        case Quantifier::Star:
            if (exists_from(ctx, cursor, items, k + 1)) return true;
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern) && exists_from(ctx, j + 1, items, k)) {
                    return true;
                }
            }
            return false;
        case Quantifier::DescendStar:
        case Quantifier::DescendPlus: {
            if (item.quantifier == Quantifier::DescendStar &&
                exists_from(ctx, cursor, items, k + 1)) {
                return true;
            }
            if (item.pattern->head == QueryPattern::Head::Sequence) {
                return group_chain_exists(ctx, *item.pattern, items, k);
            }
            for (const auto& child : ch) {
                if (full_match(child, *item.pattern) && chain_exists(child, *item.pattern, items, k)) {
                    return true;
                }
            }
            return false;
        }
        default:
            return false; // Plus is expanded at compile time
        }
    }

    // v is a chain node (already matched); succeed if the rest of the list
    // fits at v or the chain can grow downward.
    bool chain_exists(const SyntaxNode& v, const CompiledPattern& p,
                      const std::vector<CompiledItem>& items, std::uint32_t k) {
        if (exists_from(v, 0, items, k + 1)) return true;
        for (const auto& child : v.children) {
            if (full_match(child, p) && chain_exists(child, p, items, k)) return true;
        }
        return false;
    }

    // Group chains: the sequence is applied repeatedly, each application
    // starting at the previous endpoint (the last node it consumed). Every
    // application consumes at least one node, so endpoints strictly descend.
    bool group_chain_exists(const SyntaxNode& start, const CompiledPattern& group,
                            const std::vector<CompiledItem>& items, std::uint32_t k) {
        std::vector<const SyntaxNode*> frontier{&start};
        std::unordered_set<const SyntaxNode*> seen{&start};
        while (!frontier.empty()) {
            const SyntaxNode* e = frontier.back();
            frontier.pop_back();
            for (const SyntaxNode* next : inner_endpoints(*e, group)) {
                if (!seen.insert(next).second) continue;
                if (exists_from(*next, 0, items, k + 1)) return true;
                frontier.push_back(next);
            }
        }
        return false;
    }

    // All nodes that can be the last consumed node of a complete assignment
    // of `group.items` at context e.
    std::vector<const SyntaxNode*> inner_endpoints(const SyntaxNode& e,
                                                   const CompiledPattern& group) {
        auto it = endpoint_memo_.find({&group, &e});
        if (it != endpoint_memo_.end()) return it->second;
        std::set<const SyntaxNode*> acc;
        std::set<std::tuple<std::uint32_t, std::uint32_t, const SyntaxNode*, const SyntaxNode*>>
            seen;
        endpoints_walk(e, 0, group.items, 0, nullptr, acc, seen);
        std::vector<const SyntaxNode*> out(acc.begin(), acc.end());
        endpoint_memo_[{&group, &e}] = out;
        return out;
    }

    void endpoints_walk(
        const SyntaxNode& ctx, std::uint32_t cursor, const std::vector<CompiledItem>& items,
        std::uint32_t k, const SyntaxNode* last, std::set<const SyntaxNode*>& acc,
        std::set<std::tuple<std::uint32_t, std::uint32_t, const SyntaxNode*, const SyntaxNode*>>&
            seen) {
        if (!seen.insert({k, cursor, &ctx, last}).second) return;
        if (k >= items.size()) {
            if (last != nullptr) acc.insert(last);
            return;
        }
        const CompiledItem& item = items[k];
        const auto& ch = ctx.children;
        switch (item.quantifier) {
        case Quantifier::One:
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern)) {
                    endpoints_walk(ctx, j + 1, items, k + 1, &ch[j], acc, seen);
                }
            }
            break;
        case Quantifier::Star:
            endpoints_walk(ctx, cursor, items, k + 1, last, acc, seen);
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern)) {
                    endpoints_walk(ctx, j + 1, items, k, &ch[j], acc, seen);
                }
            }
            break;
        case Quantifier::DescendStar:
        case Quantifier::DescendPlus: {
            if (item.quantifier == Quantifier::DescendStar) {
                endpoints_walk(ctx, cursor, items, k + 1, last, acc, seen);
            }
            // Chains inside a group: enumerate chain nodes; the next item
            // continues at the chain endpoint.
            std::vector<const SyntaxNode*> stack;
            for (const auto& child : ch) {
                if (full_match(child, *item.pattern)) stack.push_back(&child);
            }
            std::unordered_set<const SyntaxNode*> visited;
            while (!stack.empty()) {
                const SyntaxNode* v = stack.back();
                stack.pop_back();
                if (!visited.insert(v).second) continue;
                endpoints_walk(*v, 0, items, k + 1, v, acc, seen);
                for (const auto& child : v->children) {
                    if (full_match(child, *item.pattern)) stack.push_back(&child);
                }
            }
            break;
        }
        default:
            break;
        }
    }

    // ---- binding collection ------------------------------------------------

    void collect_pattern(const SyntaxNode& n, const CompiledPattern& p, MatchResult& out) {
        if (!p.capture.empty()) bind(out, p.capture, &n);
        if (p.head == QueryPattern::Head::Alternative) {
            for (const auto* b : p.branches) {
                if (full_match(n, *b)) collect_pattern(n, *b, out);
            }
            return;
        }
        if (!p.items.empty()) {
            std::set<StateKey_> visited;
            collect_walk(n, 0, p.items, 0, out, visited);
        }
    }

    using StateKey_ = std::tuple<const void*, const SyntaxNode*, std::uint32_t, std::uint32_t>;

    // Walks every reachable-and-completable state of the child-list match,
    // recording bindings along the way.
    void collect_walk(const SyntaxNode& ctx, std::uint32_t cursor,
                      const std::vector<CompiledItem>& items, std::uint32_t k, MatchResult& out,
                      std::set<StateKey_>& visited) {
        if (k >= items.size()) return;
        if (!visited.insert({&items, &ctx, cursor, k}).second) return;
        const CompiledItem& item = items[k];
        const auto& ch = ctx.children;
        switch (item.quantifier) {
        case Quantifier::One:
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern) && exists_from(ctx, j + 1, items, k + 1)) {
                    collect_pattern(ch[j], *item.pattern, out);
                    collect_walk(ctx, j + 1, items, k + 1, out, visited);
                }
            }
            break;
        case Quantifier::Star:
            if (exists_from(ctx, cursor, items, k + 1)) {
                collect_walk(ctx, cursor, items, k + 1, out, visited);
            }
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern) && exists_from(ctx, j + 1, items, k)) {
                    collect_pattern(ch[j], *item.pattern, out);
                    collect_walk(ctx, j + 1, items, k, out, visited);
                }
            }
            break;
        case Quantifier::DescendStar:
        case Quantifier::DescendPlus: {
            if (item.quantifier == Quantifier::DescendStar &&
                exists_from(ctx, cursor, items, k + 1)) {
                collect_walk(ctx, cursor, items, k + 1, out, visited);
            }
            if (item.pattern->head == QueryPattern::Head::Sequence) {
                collect_group_chain(ctx, *item.pattern, items, k, out, visited);
                break;
            }
            for (const auto& child : ch) {
                if (full_match(child, *item.pattern)) {
                    collect_chain(child, *item.pattern, items, k, out, visited);
                }
            }
            break;
        }
        default:
            break;
        }
    }

    // Chain node v participates iff some chain through v completes.
    bool chain_completes(const SyntaxNode& v, const CompiledPattern& p,
                         const std::vector<CompiledItem>& items, std::uint32_t k) {
        return chain_exists(v, p, items, k);
    }

    void collect_chain(const SyntaxNode& v, const CompiledPattern& p,
                       const std::vector<CompiledItem>& items, std::uint32_t k, MatchResult& out,
                       std::set<StateKey_>& visited) {
        if (!chain_completes(v, p, items, k)) return;
        collect_pattern(v, p, out);
        if (exists_from(v, 0, items, k + 1)) collect_walk(v, 0, items, k + 1, out, visited);
        for (const auto& child : v.children) {
            if (full_match(child, p)) collect_chain(child, p, items, k, out, visited);
        }
    }

    bool group_chain_completes(const SyntaxNode& e, const CompiledPattern& group,
                               const std::vector<CompiledItem>& items, std::uint32_t k,
                               std::unordered_map<const SyntaxNode*, char>& memo) {
        auto it = memo.find(&e);
        if (it != memo.end()) return it->second != 0;
        memo[&e] = 0;
        bool ok = false;
        for (const SyntaxNode* next : inner_endpoints(e, group)) {
            if (exists_from(*next, 0, items, k + 1) ||
                group_chain_completes(*next, group, items, k, memo)) {
                ok = true;
                break;
            }
        }
        memo[&e] = ok ? 1 : 0;
        return ok;
    }

    void collect_group_chain(const SyntaxNode& start, const CompiledPattern& group,
                             const std::vector<CompiledItem>& items, std::uint32_t k,
                             MatchResult& out, std::set<StateKey_>& visited) {
        std::unordered_map<const SyntaxNode*, char> memo;
        std::vector<const SyntaxNode*> frontier{&start};
        std::unordered_set<const SyntaxNode*> seen{&start};
        while (!frontier.empty()) {
            const SyntaxNode* e = frontier.back();
            frontier.pop_back();
            for (const SyntaxNode* next : inner_endpoints(*e, group)) {
                bool completes = exists_from(*next, 0, items, k + 1) ||
                                 group_chain_completes(*next, group, items, k, memo);
                if (!completes) continue;
                collect_inner(*e, group, next, out);
                if (exists_from(*next, 0, items, k + 1)) {
                    collect_walk(*next, 0, items, k + 1, out, visited);
                }
                if (seen.insert(next).second) frontier.push_back(next);
            }
        }
    }

    // Bindings of one group application at `ctx` whose endpoint is `target`.
    void collect_inner(const SyntaxNode& ctx, const CompiledPattern& group,
                       const SyntaxNode* target, MatchResult& out) {
        std::set<StateKey_> visited;
        inner_walk(ctx, 0, group.items, 0, nullptr, target, out, visited);
    }

    bool inner_exists(const SyntaxNode& ctx, std::uint32_t cursor,
                      const std::vector<CompiledItem>& items, std::uint32_t k,
                      const SyntaxNode* last, const SyntaxNode* target) {
        if (k >= items.size()) return last == target;
        const CompiledItem& item = items[k];
        const auto& ch = ctx.children;
        switch (item.quantifier) {
        case Quantifier::One:
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern) &&
                    inner_exists(ctx, j + 1, items, k + 1, &ch[j], target)) {
                    return true;
                }
            }
            return false;
        case Quantifier::Star:
            if (inner_exists(ctx, cursor, items, k + 1, last, target)) return true;
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (full_match(ch[j], *item.pattern) &&
                    inner_exists(ctx, j + 1, items, k, &ch[j], target)) {
                    return true;
                }
            }
            return false;
        case Quantifier::DescendStar:
        case Quantifier::DescendPlus: {
            if (item.quantifier == Quantifier::DescendStar &&
                inner_exists(ctx, cursor, items, k + 1, last, target)) {
                return true;
            }
            std::vector<const SyntaxNode*> stack;
            for (const auto& child : ch) {
                if (full_match(child, *item.pattern)) stack.push_back(&child);
            }
            std::unordered_set<const SyntaxNode*> visited;
            while (!stack.empty()) {
                const SyntaxNode* v = stack.back();
                stack.pop_back();
                if (!visited.insert(v).second) continue;
                if (inner_exists(*v, 0, items, k + 1, v, target)) return true;
                for (const auto& child : v->children) {
                    if (full_match(child, *item.pattern)) stack.push_back(&child);
                }
            }
            return false;
        }
        default:
            return false;
        }
    }

    void inner_walk(const SyntaxNode& ctx, std::uint32_t cursor,
                    const std::vector<CompiledItem>& items, std::uint32_t k,
                    const SyntaxNode* last, const SyntaxNode* target, MatchResult& out,
                    std::set<StateKey_>& visited) {
        if (k >= items.size()) return;
        if (!visited.insert({&items, &ctx, cursor, k}).second) return;
        const CompiledItem& item = items[k];
        const auto& ch = ctx.children;
        switch (item.quantifier) {
        case Quantifier::One:
        case Quantifier::Star: {
            bool star = item.quantifier == Quantifier::Star;
            if (star && inner_exists(ctx, cursor, items, k + 1, last, target)) {
                inner_walk(ctx, cursor, items, k + 1, last, target, out, visited);
            }
            for (std::uint32_t j = cursor; j < ch.size(); ++j) {
                if (!full_match(ch[j], *item.pattern)) continue;
                std::uint32_t next_k = star ? k : k + 1;
                if (inner_exists(ctx, j + 1, items, next_k, &ch[j], target)) {
                    collect_pattern(ch[j], *item.pattern, out);
                    inner_walk(ctx, j + 1, items, next_k, &ch[j], target, out, visited);
                }
            }
            break;
        }
        case Quantifier::DescendStar:
        case Quantifier::DescendPlus: {
            if (item.quantifier == Quantifier::DescendStar &&
                inner_exists(ctx, cursor, items, k + 1, last, target)) {
                inner_walk(ctx, cursor, items, k + 1, last, target, out, visited);
            }
            for (const auto& child : ch) {
                if (full_match(child, *item.pattern)) {
                    inner_collect_chain(child, *item.pattern, items, k, target, out, visited);
                }
            }
            break;
        }
        default:
            break;
        }
    }

    void inner_collect_chain(const SyntaxNode& v, const CompiledPattern& p,
                             const std::vector<CompiledItem>& items, std::uint32_t k,
                             const SyntaxNode* target, MatchResult& out,
                             std::set<StateKey_>& visited) {
        bool completes = inner_chain_completes(v, p, items, k, target);
        if (!completes) return;
        collect_pattern(v, p, out);
        if (inner_exists(v, 0, items, k + 1, &v, target)) {
            inner_walk(v, 0, items, k + 1, &v, target, out, visited);
        }
        for (const auto& child : v.children) {
            if (full_match(child, p)) {
                inner_collect_chain(child, p, items, k, target, out, visited);
            }
        }
    }

    bool inner_chain_completes(const SyntaxNode& v, const CompiledPattern& p,
                               const std::vector<CompiledItem>& items, std::uint32_t k,
                               const SyntaxNode* target) {
        if (inner_exists(v, 0, items, k + 1, &v, target)) return true;
        for (const auto& child : v.children) {
            if (full_match(child, p) && inner_chain_completes(child, p, items, k, target)) {
                return true;
            }
        }
        return false;
    }

    void bind(MatchResult& out, std::string_view name, const SyntaxNode* node) {
        auto& vec = out.captures[std::string(name)];
        for (const auto* existing : vec) {
            if (existing == node) return;
        }
        vec.push_back(node);
    }

    const NodeCategoryTable& table_;
    AttributeOracle oracle_;
    std::unordered_map<NodeKey, bool, NodeKeyHash> match_memo_;
    std::unordered_map<StateKey, bool, StateKeyHash> exists_memo_;
    std::map<std::pair<const CompiledPattern*, const SyntaxNode*>,
             std::vector<const SyntaxNode*>>
        endpoint_memo_;
};

void order_captures(MatchResult& result) {
    // Document order; insertion already deduplicates.
    for (auto& [name, nodes] : result.captures) {
        std::stable_sort(nodes.begin(), nodes.end(),
                         [](const SyntaxNode* a, const SyntaxNode* b) {
                             if (a->begin != b->begin) return a->begin < b->begin;
                             return a->end > b->end; // outer nodes first
                         });
    }
}

} // namespace

struct CompiledQuery::Impl {
    QueryPattern pattern; // owns the storage the compiled view points into
    Compiler compiler;
    const CompiledPattern* root;
    Matcher matcher;
    const SyntaxNode* tree_id = nullptr;

    Impl(const QueryPattern& p, const NodeCategoryTable& table, AttributeOracle oracle)
        : pattern(p), compiler(table), root(compiler.compile(pattern)),
          matcher(table, std::move(oracle)) {}

    void bind_tree(const SyntaxTree& tree) {
        const SyntaxNode* id = &tree.root();
        if (id != tree_id) {
            matcher.reset();
            tree_id = id;
        }
    }
};

CompiledQuery::CompiledQuery(const QueryPattern& pattern, const NodeCategoryTable& table,
                             AttributeOracle oracle)
    : impl_(std::make_unique<Impl>(pattern, table, std::move(oracle))) {}

CompiledQuery::~CompiledQuery() = default;
CompiledQuery::CompiledQuery(CompiledQuery&&) noexcept = default;
CompiledQuery& CompiledQuery::operator=(CompiledQuery&&) noexcept = default;

std::vector<MatchResult> CompiledQuery::match_all(const SyntaxTree& tree) {
    impl_->bind_tree(tree);
    std::vector<MatchResult> results;
    for (const SyntaxNode* node : iter_named_nodes(tree)) {
        if (!impl_->matcher.full_match(*node, *impl_->root)) continue;
        MatchResult r;
        r.root = node;
        if (impl_->compiler.any_capture) {
            impl_->matcher.collect(*node, *impl_->root, r);
            order_captures(r);
        }
        results.push_back(std::move(r));
    }
    return results;
}

bool CompiledQuery::matches_at(const SyntaxTree& tree, const SyntaxNode& node) {
    impl_->bind_tree(tree);
    return node.named && impl_->matcher.full_match(node, *impl_->root);
}

std::vector<MatchResult> CompiledQuery::results_at(const SyntaxTree& tree,
                                                   const SyntaxNode& node) {
    impl_->bind_tree(tree);
    std::vector<MatchResult> results;
    if (node.named && impl_->matcher.full_match(node, *impl_->root)) {
        MatchResult r;
        r.root = &node;
        if (impl_->compiler.any_capture) {
            impl_->matcher.collect(node, *impl_->root, r);
            order_captures(r);
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<MatchResult> match_pattern(const SyntaxTree& tree, const QueryPattern& pattern,
                                       const NodeCategoryTable& table,
                                       const AttributeOracle& oracle) {
    CompiledQuery query(pattern, table, oracle);
    return query.match_all(tree);
}

} // namespace metriscope
