#pragma once

#include <string_view>

namespace metriscope::kinds {

// Named node kinds emitted by the grammar. Every SyntaxNode::kind points at
// one of these constants (or at an interned operator token for anonymous
// nodes), so kind comparison is cheap and views never dangle.

inline constexpr std::string_view translation_unit = "translation_unit";
inline constexpr std::string_view function_definition = "function_definition";
inline constexpr std::string_view declaration = "declaration";
inline constexpr std::string_view preproc_directive = "preproc_directive";
inline constexpr std::string_view error = "ERROR";

inline constexpr std::string_view compound_statement = "compound_statement";
inline constexpr std::string_view expression_statement = "expression_statement";
inline constexpr std::string_view if_statement = "if_statement";
inline constexpr std::string_view while_statement = "while_statement";
inline constexpr std::string_view do_statement = "do_statement";
inline constexpr std::string_view for_statement = "for_statement";
inline constexpr std::string_view for_range_loop = "for_range_loop";
inline constexpr std::string_view switch_statement = "switch_statement";
inline constexpr std::string_view case_statement = "case_statement";
inline constexpr std::string_view labeled_statement = "labeled_statement";
inline constexpr std::string_view goto_statement = "goto_statement";
inline constexpr std::string_view return_statement = "return_statement";
inline constexpr std::string_view break_statement = "break_statement";
inline constexpr std::string_view continue_statement = "continue_statement";
inline constexpr std::string_view try_statement = "try_statement";
inline constexpr std::string_view catch_clause = "catch_clause";
inline constexpr std::string_view throw_statement = "throw_statement";
inline constexpr std::string_view asm_statement = "asm_statement";

inline constexpr std::string_view init_declarator = "init_declarator";
inline constexpr std::string_view pointer_declarator = "pointer_declarator";
inline constexpr std::string_view reference_declarator = "reference_declarator";
inline constexpr std::string_view array_declarator = "array_declarator";
inline constexpr std::string_view function_declarator = "function_declarator";
inline constexpr std::string_view parenthesized_declarator = "parenthesized_declarator";
inline constexpr std::string_view parameter_list = "parameter_list";
inline constexpr std::string_view parameter_declaration = "parameter_declaration";
inline constexpr std::string_view variadic_parameter = "variadic_parameter";

inline constexpr std::string_view storage_class_specifier = "storage_class_specifier";
inline constexpr std::string_view type_qualifier = "type_qualifier";
inline constexpr std::string_view primitive_type = "primitive_type";
inline constexpr std::string_view sized_type_specifier = "sized_type_specifier";
inline constexpr std::string_view type_identifier = "type_identifier";
inline constexpr std::string_view struct_specifier = "struct_specifier";
inline constexpr std::string_view union_specifier = "union_specifier";
inline constexpr std::string_view enum_specifier = "enum_specifier";
inline constexpr std::string_view class_specifier = "class_specifier";
inline constexpr std::string_view field_declaration_list = "field_declaration_list";
inline constexpr std::string_view field_declaration = "field_declaration";
inline constexpr std::string_view enumerator_list = "enumerator_list";
inline constexpr std::string_view enumerator = "enumerator";
inline constexpr std::string_view type_descriptor = "type_descriptor";
inline constexpr std::string_view template_type = "template_type";
inline constexpr std::string_view template_argument_list = "template_argument_list";

inline constexpr std::string_view identifier = "identifier";
inline constexpr std::string_view field_identifier = "field_identifier";
inline constexpr std::string_view statement_identifier = "statement_identifier";
inline constexpr std::string_view qualified_identifier = "qualified_identifier";

inline constexpr std::string_view number_literal = "number_literal";
inline constexpr std::string_view char_literal = "char_literal";
inline constexpr std::string_view string_literal = "string_literal";
inline constexpr std::string_view concatenated_string = "concatenated_string";
inline constexpr std::string_view true_kind = "true";
inline constexpr std::string_view false_kind = "false";
inline constexpr std::string_view null_kind = "null";

inline constexpr std::string_view call_expression = "call_expression";
inline constexpr std::string_view argument_list = "argument_list";
inline constexpr std::string_view field_expression = "field_expression";
inline constexpr std::string_view subscript_expression = "subscript_expression";
inline constexpr std::string_view pointer_expression = "pointer_expression";
inline constexpr std::string_view unary_expression = "unary_expression";
inline constexpr std::string_view update_expression = "update_expression";
inline constexpr std::string_view binary_expression = "binary_expression";
inline constexpr std::string_view assignment_expression = "assignment_expression";
inline constexpr std::string_view conditional_expression = "conditional_expression";
inline constexpr std::string_view cast_expression = "cast_expression";
inline constexpr std::string_view compound_literal_expression = "compound_literal_expression";
inline constexpr std::string_view sizeof_expression = "sizeof_expression";
inline constexpr std::string_view parenthesized_expression = "parenthesized_expression";
inline constexpr std::string_view comma_expression = "comma_expression";
inline constexpr std::string_view initializer_list = "initializer_list";
inline constexpr std::string_view initializer_pair = "initializer_pair";
inline constexpr std::string_view new_expression = "new_expression";
inline constexpr std::string_view delete_expression = "delete_expression";
inline constexpr std::string_view lambda_expression = "lambda_expression";

// Field labels.
namespace fields {
inline constexpr std::string_view type = "type";
inline constexpr std::string_view declarator = "declarator";
inline constexpr std::string_view body = "body";
inline constexpr std::string_view condition = "condition";
inline constexpr std::string_view consequence = "consequence";
inline constexpr std::string_view alternative = "alternative";
inline constexpr std::string_view initializer = "initializer";
inline constexpr std::string_view update = "update";
inline constexpr std::string_view value = "value";
inline constexpr std::string_view label = "label";
inline constexpr std::string_view function = "function";
inline constexpr std::string_view arguments = "arguments";
inline constexpr std::string_view argument = "argument";
inline constexpr std::string_view index = "index";
inline constexpr std::string_view field = "field";
inline constexpr std::string_view operator_ = "operator";
inline constexpr std::string_view left = "left";
inline constexpr std::string_view right = "right";
inline constexpr std::string_view parameters = "parameters";
inline constexpr std::string_view size = "size";
inline constexpr std::string_view name = "name";
inline constexpr std::string_view scope = "scope";
} // namespace fields

/// Interns an operator token's text so anonymous nodes can reference static
/// storage. Unknown tokens map to "?".
std::string_view intern_operator(std::string_view text);

} // namespace metriscope::kinds
