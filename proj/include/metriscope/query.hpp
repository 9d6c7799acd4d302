#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "metriscope/categories.hpp"
#include "metriscope/syntax.hpp"

namespace metriscope {

// S-expression tree queries.
//
// Construct                  Example                          Meaning
//   node                      (a)                             node of kind/category a
//   wildcard                  (_)                             any named node
//   negation                  (!a)                            named node not matching a
//   alternative               ((a) | (b))                     either pattern
//   child                     (a (b))                         a with a child matching b
//   siblings                  (a (b) (c))                     children matching b then c,
//                                                             in order, other children allowed
//   sibling quantifier        (a (b)*)   (a (b)+)             zero/one-or-more children b
//   descendant quantifier     (a (b)^*)  (a (b)^+)            downward chain of b nodes,
//                                                             length >= 0 / >= 1
//   group                     (a ((!b)^* (b)))                items applied along a descent
//   group chain               (a ((!b)^* (b))^*)              group re-applied at each endpoint
//   negated field             (a !alternative)                no child occupies the field
//   field constraint          (a field: (b))                  the child must occupy the field
//   attribute                 ({type: 'pointer'})             resolved by an injected oracle
//   annotation                (a) @x                          capture the matched node
//
// Child items consume an ordered subsequence of the node's children; extra
// children are always permitted. A descendant chain may start at any child
// position; an item following it continues at the chain endpoint. At most one
// descendant-quantified item may appear per child list, and sibling
// quantifiers apply to plain patterns only (both enforced at parse time).

enum class Quantifier { One, Star, Plus, DescendStar, DescendPlus };

struct QueryItem;

struct AttributePredicate {
    std::string key;
    std::string value;
    bool operator==(const AttributePredicate&) const = default;
};

struct QueryPattern {
    enum class Head { Kind, Wildcard, Negation, Alternative, Sequence };

    Head head = Head::Wildcard;
    std::string kind;                     // Head::Kind / Head::Negation
    std::vector<QueryPattern> branches;   // Head::Alternative
    std::vector<QueryItem> items;         // child items; sequence items for Head::Sequence
    std::vector<std::string> negated_fields;
    std::string field;                    // required field label when used as a child
    std::vector<AttributePredicate> attributes;
    std::string capture;

    bool operator==(const QueryPattern&) const;
};

struct QueryItem {
    QueryPattern pattern;
    Quantifier quantifier = Quantifier::One;
    bool operator==(const QueryItem&) const = default;
};

/// Parses query text into a pattern AST. Throws QuerySyntaxError with the
/// byte offset of the offending token on malformed input (unbalanced
/// parentheses, unknown quantifiers, duplicate captures, ...).
QueryPattern parse_query(std::string_view text);

/// Canonical text for a pattern; parse_query(render_query(p)) == p.
std::string render_query(const QueryPattern& pattern);

struct MatchResult {
    const SyntaxNode* root = nullptr;
    // Capture name -> all nodes the name binds to in any valid assignment
    // for this root, in document order, deduplicated.
    std::map<std::string, std::vector<const SyntaxNode*>> captures;
};

/// Resolves attribute predicates such as {type: 'pointer'}. Returns whether
/// the node satisfies key=value.
using AttributeOracle =
    std::function<bool(const SyntaxNode&, std::string_view key, std::string_view value)>;

/// A pattern compiled against a category table, with per-node memoization.
/// Compile once, then match repeatedly over one tree; results are cached by
/// node identity and reset automatically when a different tree is passed.
class CompiledQuery {
public:
    CompiledQuery(const QueryPattern& pattern, const NodeCategoryTable& table,
                  AttributeOracle oracle = nullptr);
    ~CompiledQuery();
    CompiledQuery(CompiledQuery&&) noexcept;
    CompiledQuery& operator=(CompiledQuery&&) noexcept;

    /// Every named node at which the pattern matches, pre-order, one result
    /// per root.
    std::vector<MatchResult> match_all(const SyntaxTree& tree);

    /// Anchored match with root exactly at `node`.
    bool matches_at(const SyntaxTree& tree, const SyntaxNode& node);

    /// Anchored match with captures; empty when the pattern does not match.
    std::vector<MatchResult> results_at(const SyntaxTree& tree, const SyntaxNode& node);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Returns every named node at which the pattern matches, in pre-order,
/// one result per root. Kind names must be either categories of `table` or
/// concrete grammar kinds; anything else raises Error. Patterns with
/// attribute predicates require an oracle.
std::vector<MatchResult> match_pattern(const SyntaxTree& tree, const QueryPattern& pattern,
                                       const NodeCategoryTable& table,
                                       const AttributeOracle& oracle = nullptr);

} // namespace metriscope
