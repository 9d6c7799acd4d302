#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metriscope/error.hpp"

namespace metriscope {

enum class Dialect { Auto, C, Cpp };

std::string_view to_string(Dialect d);

/// One function definition to be parsed. `code` is UTF-8 source text.
struct SourceFunction {
    std::string id;
    std::string code;
    Dialect dialect = Dialect::Auto;
};

/// Node of the concrete syntax tree. `kind` and `field` point into static
/// storage (the grammar's kind table), so nodes never dangle when the tree
/// is copied. Spans are byte offsets into the source text. Anonymous nodes
/// are operator/keyword tokens and are always leaves.
struct SyntaxNode {
    std::string_view kind;
    std::string_view field;
    bool named = false;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::vector<SyntaxNode> children;

    bool is_error() const { return kind == "ERROR"; }
};

/// Immutable parse result. Copies share the underlying storage, so trees
/// can be passed around by value and read concurrently.
class SyntaxTree {
public:
    SyntaxTree(SourceFunction source, SyntaxNode root, bool parse_error, Dialect parsed_as);

    const SyntaxNode& root() const { return impl_->root; }
    const SourceFunction& source() const { return impl_->source; }
    bool parse_error() const { return impl_->parse_error; }
    Dialect parsed_dialect() const { return impl_->parsed_as; }

    /// Source text covered by a node of this tree.
    std::string_view text(const SyntaxNode& node) const;

private:
    struct Impl {
        SourceFunction source;
        SyntaxNode root;
        bool parse_error;
        Dialect parsed_as;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Parses one function definition. Malformed code is parsed best-effort:
/// the grammar emits ERROR nodes and the tree's parse_error flag is set,
/// but a tree covering the whole input is always produced. With
/// Dialect::Auto the C++ grammar is attempted first and the C parse is
/// used instead when it yields fewer error nodes.
SyntaxTree parse_function(const SourceFunction& source);

/// Pre-order sequence of all named nodes (root first).
std::vector<const SyntaxNode*> iter_named_nodes(const SyntaxTree& tree);
std::vector<const SyntaxNode*> iter_named_nodes(const SyntaxNode& root);

/// Number of named nodes on the longest downward path starting at `node`
/// (a leaf has height 1).
int subtree_height(const SyntaxNode& node);

/// All node kinds the grammar can emit for named nodes. Used to validate
/// query patterns against typos.
const std::vector<std::string_view>& known_node_kinds();

/// Flat, read-only view over one tree: pre-order ids, parent links and the
/// named-node sequence. Built once per tree by evaluators that need
/// ancestor access.
class TreeIndex {
public:
    explicit TreeIndex(const SyntaxTree& tree);

    const SyntaxTree& tree() const { return tree_; }
    const std::vector<const SyntaxNode*>& preorder() const { return preorder_; }
    const std::vector<const SyntaxNode*>& named_preorder() const { return named_; }

    /// Actual parent node, nullptr for the root. Anonymous nodes are leaves,
    /// so every parent is named.
    const SyntaxNode* parent(const SyntaxNode* node) const;

private:
    SyntaxTree tree_;
    std::vector<const SyntaxNode*> preorder_;
    std::vector<const SyntaxNode*> named_;
    std::unordered_map<const SyntaxNode*, const SyntaxNode*> parent_;
};

/// Renders the named part of the tree as an indented s-expression dump,
/// one node per line with field labels and spans. Debug/inspection aid.
std::string dump_tree(const SyntaxTree& tree);

} // namespace metriscope
