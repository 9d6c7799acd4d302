#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "metriscope/syntax.hpp"

namespace metriscope {

/// One admissible shape for a category: a concrete kind, optionally narrowed
/// by the field the node occupies and/or by the kind of its `operator` field
/// child (e.g. field_expr is a field_expression whose operator is "->").
/// An empty kind matches any node, which lets purely field-based categories
/// (such as `operator`) be expressed in the same table.
struct CategoryMember {
    std::string kind;
    std::string field;
    std::string operator_token;
};

/// Maps abstract category names used by metric filters (loop_stmt,
/// cond_stmt, ...) to sets of concrete grammar kinds. The table is the single
/// auditable source of truth for which concrete nodes each metric sees.
class NodeCategoryTable {
public:
    void add(const std::string& category, CategoryMember member, bool allow_anonymous = false);

    bool contains(std::string_view category) const;
    bool allows_anonymous(std::string_view category) const;
    const std::vector<CategoryMember>& members(std::string_view category) const;
    std::vector<std::string> known_categories() const;

private:
    struct Entry {
        std::vector<CategoryMember> members;
        bool allow_anonymous = false;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

/// The default table used by the metric catalog. Highlights:
///   - loop_stmt covers for/while/do and range-based for
///   - cond_stmt covers if, case labels, ternaries and all loops
///   - ctrl_stmt is cond_stmt plus switch
///   - pointer_expr is restricted to the dereference operator `*`
///   - field_expr is restricted to arrow accesses `->`
///   - literal covers number, char, string and boolean literals
///   - operator matches the (anonymous) token in an `operator` field
const NodeCategoryTable& default_category_table();

/// True iff the node belongs to the category. Throws Error for a category
/// missing from the table, listing the known categories.
bool category_matches(const SyntaxNode& node, std::string_view category,
                      const NodeCategoryTable& table);

} // namespace metriscope
