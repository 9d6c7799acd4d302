#include "metriscope/syntax.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "kinds.hpp"

namespace metriscope {

std::string_view to_string(Dialect d) {
    switch (d) {
    case Dialect::C: return "c";
    case Dialect::Cpp: return "cpp";
    default: return "auto";
    }
}

SyntaxTree::SyntaxTree(SourceFunction source, SyntaxNode root, bool parse_error, Dialect parsed_as)
    : impl_(std::make_shared<Impl>(
          Impl{std::move(source), std::move(root), parse_error, parsed_as})) {}

std::string_view SyntaxTree::text(const SyntaxNode& node) const {
    const std::string& code = impl_->source.code;
    std::size_t begin = std::min<std::size_t>(node.begin, code.size());
    std::size_t end = std::min<std::size_t>(node.end, code.size());
    return std::string_view(code).substr(begin, end - begin);
}

namespace {

void collect_named(const SyntaxNode& node, std::vector<const SyntaxNode*>& out) {
    if (node.named) out.push_back(&node);
    for (const auto& child : node.children) collect_named(child, out);
}

} // namespace

std::vector<const SyntaxNode*> iter_named_nodes(const SyntaxNode& root) {
    std::vector<const SyntaxNode*> out;
    collect_named(root, out);
    return out;
}

std::vector<const SyntaxNode*> iter_named_nodes(const SyntaxTree& tree) {
    return iter_named_nodes(tree.root());
}

int subtree_height(const SyntaxNode& node) {
    int best = 0;
    for (const auto& child : node.children) {
        best = std::max(best, subtree_height(child));
    }
    return best + (node.named ? 1 : 0);
}

TreeIndex::TreeIndex(const SyntaxTree& tree) : tree_(tree) {
    // Iterative walk; parse depth is capped, but keep this robust anyway.
    std::vector<const SyntaxNode*> stack{&tree_.root()};
    parent_[&tree_.root()] = nullptr;
    while (!stack.empty()) {
        const SyntaxNode* n = stack.back();
        stack.pop_back();
        preorder_.push_back(n);
        if (n->named) named_.push_back(n);
        for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
            parent_[&*it] = n;
            stack.push_back(&*it);
        }
    }
}

const SyntaxNode* TreeIndex::parent(const SyntaxNode* node) const {
    auto it = parent_.find(node);
    return it == parent_.end() ? nullptr : it->second;
}

namespace {

void dump_node(const SyntaxTree& tree, const SyntaxNode& node, int indent, std::ostringstream& os) {
    if (node.named) {
        os << std::string(static_cast<std::size_t>(indent) * 2, ' ');
        if (!node.field.empty()) os << node.field << ": ";
        os << "(" << node.kind << " [" << node.begin << ".." << node.end << "]";
        bool leaf = true;
        for (const auto& c : node.children) {
            if (c.named) leaf = false;
        }
        if (leaf) {
            std::string_view text = tree.text(node);
            if (text.size() <= 40) os << " \"" << text << "\"";
        }
        os << ")\n";
        ++indent;
    }
    for (const auto& child : node.children) dump_node(tree, child, indent, os);
}

} // namespace

std::string dump_tree(const SyntaxTree& tree) {
    std::ostringstream os;
    dump_node(tree, tree.root(), 0, os);
    return os.str();
}

const std::vector<std::string_view>& known_node_kinds() {
    namespace k = kinds;
    static const std::vector<std::string_view> all = {
        k::translation_unit, k::function_definition, k::declaration, k::preproc_directive,
        k::error, k::compound_statement, k::expression_statement, k::if_statement,
        k::while_statement, k::do_statement, k::for_statement, k::for_range_loop,
        k::switch_statement, k::case_statement, k::labeled_statement, k::goto_statement,
        k::return_statement, k::break_statement, k::continue_statement, k::try_statement,
        k::catch_clause, k::throw_statement, k::asm_statement, k::init_declarator,
        k::pointer_declarator, k::reference_declarator, k::array_declarator,
        k::function_declarator, k::parenthesized_declarator, k::parameter_list,
        k::parameter_declaration, k::variadic_parameter, k::storage_class_specifier,
        k::type_qualifier, k::primitive_type, k::sized_type_specifier, k::type_identifier,
        k::struct_specifier, k::union_specifier, k::enum_specifier, k::class_specifier,
        k::field_declaration_list, k::field_declaration, k::enumerator_list, k::enumerator,
        k::type_descriptor, k::template_type, k::template_argument_list, k::identifier,
        k::field_identifier, k::statement_identifier, k::qualified_identifier,
        k::number_literal, k::char_literal, k::string_literal, k::concatenated_string,
        k::true_kind, k::false_kind, k::null_kind, k::call_expression, k::argument_list,
        k::field_expression, k::subscript_expression, k::pointer_expression,
        k::unary_expression, k::update_expression, k::binary_expression,
        k::assignment_expression, k::conditional_expression, k::cast_expression,
        k::compound_literal_expression, k::sizeof_expression, k::parenthesized_expression,
        k::comma_expression, k::initializer_list, k::initializer_pair, k::new_expression,
        k::delete_expression, k::lambda_expression,
    };
    return all;
}

} // namespace metriscope

namespace metriscope::kinds {

std::string_view intern_operator(std::string_view text) {
    static constexpr std::array<std::string_view, 36> kOps = {
        "+",  "-",  "*",  "/",  "%",  "<<", ">>", "<",  "<=", ">",  ">=", "==",
        "!=", "&",  "|",  "^",  "&&", "||", "=",  "+=", "-=", "*=", "/=", "%=",
        "<<=", ">>=", "&=", "|=", "^=", "++", "--", ".",  "->", "!",  "~",  "?",
    };
    for (auto op : kOps) {
        if (op == text) return op;
    }
    return "?";
}

} // namespace metriscope::kinds
