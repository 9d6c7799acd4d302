#include "metriscope/categories.hpp"

#include <sstream>

#include "kinds.hpp"

namespace metriscope {

namespace k = kinds;

void NodeCategoryTable::add(const std::string& category, CategoryMember member,
                            bool allow_anonymous) {
    auto& entry = entries_[category];
    entry.allow_anonymous = entry.allow_anonymous || allow_anonymous;
    entry.members.push_back(std::move(member));
}

bool NodeCategoryTable::contains(std::string_view category) const {
    return entries_.find(category) != entries_.end();
}

bool NodeCategoryTable::allows_anonymous(std::string_view category) const {
    auto it = entries_.find(category);
    return it != entries_.end() && it->second.allow_anonymous;
}

const std::vector<CategoryMember>& NodeCategoryTable::members(std::string_view category) const {
    auto it = entries_.find(category);
    if (it == entries_.end()) {
        std::ostringstream os;
        os << "unknown category '" << category << "'; known categories:";
        for (const auto& name : known_categories()) os << " " << name;
        throw Error(os.str());
    }
    return it->second.members;
}

std::vector<std::string> NodeCategoryTable::known_categories() const {
    std::vector<std::string> names;
    names.reserve(entries_.size());
    for (const auto& [name, entry] : entries_) names.push_back(name);
    return names;
}

namespace {

const SyntaxNode* operator_child(const SyntaxNode& node) {
    for (const auto& child : node.children) {
        if (child.field == k::fields::operator_) return &child;
    }
    return nullptr;
}

NodeCategoryTable build_default_table() {
    NodeCategoryTable t;
    auto alias = [&t](const char* category, std::string_view kind) {
        t.add(category, CategoryMember{std::string(kind), "", ""});
    };

    const std::string_view loops[] = {k::for_statement, k::while_statement, k::do_statement,
                                      k::for_range_loop};
    for (auto kind : loops) alias("loop_stmt", kind);

    // Decision points: ifs, case labels, ternaries and loops.
    const std::string_view conds[] = {k::if_statement, k::case_statement,
                                      k::conditional_expression};
    for (auto kind : conds) alias("cond_stmt", kind);
    for (auto kind : loops) alias("cond_stmt", kind);

    for (auto kind : conds) alias("ctrl_stmt", kind);
    for (auto kind : loops) alias("ctrl_stmt", kind);
    alias("ctrl_stmt", k::switch_statement);

    alias("goto_stmt", k::goto_statement);
    alias("if_stmt", k::if_statement);
    alias("expr_stmt", k::expression_statement);
    alias("return_stmt", k::return_statement);

    alias("call_expr", k::call_expression);
    alias("binary_expr", k::binary_expression);
    alias("unary_expr", k::unary_expression);
    alias("subscript_expr", k::subscript_expression);
    alias("cast_expr", k::cast_expression);
    alias("new_expr", k::new_expression);

    // Dereferences only: `*p` but not `&p`, `a->b` but not `a.b`.
    t.add("pointer_expr", CategoryMember{std::string(k::pointer_expression), "", "*"});
    t.add("field_expr", CategoryMember{std::string(k::field_expression), "", "->"});

    alias("declaration", k::declaration);
    alias("init_declarator", k::init_declarator);
    alias("function_declarator", k::function_declarator);
    alias("parameter_declaration", k::parameter_declaration);

    alias("number_literal", k::number_literal);
    alias("identifier", k::identifier);

    const std::string_view literals[] = {k::number_literal, k::char_literal, k::string_literal,
                                         k::true_kind, k::false_kind};
    for (auto kind : literals) alias("literal", kind);

    // Anonymous operator tokens, addressed by the field they occupy.
    t.add("operator", CategoryMember{"", std::string(k::fields::operator_), ""},
          /*allow_anonymous=*/true);
    return t;
}

} // namespace

const NodeCategoryTable& default_category_table() {
    static const NodeCategoryTable table = build_default_table();
    return table;
}

bool category_matches(const SyntaxNode& node, std::string_view category,
                      const NodeCategoryTable& table) {
    const auto& members = table.members(category); // throws on unknown category
    if (!node.named && !table.allows_anonymous(category)) return false;
    for (const auto& m : members) {
        if (!m.kind.empty() && node.kind != m.kind) continue;
        if (!m.field.empty() && node.field != m.field) continue;
        if (!m.operator_token.empty()) {
            const SyntaxNode* op = operator_child(node);
            if (op == nullptr || op->kind != m.operator_token) continue;
        }
        return true;
    }
    return false;
}

} // namespace metriscope
