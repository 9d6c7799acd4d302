#include <doctest.h>

#include "metriscope/metrics.hpp"
#include "metriscope/query.hpp"
#include "support/brute_match.hpp"
#include "support/random_cases.hpp"

using namespace metriscope;
using metriscope::testing::brute_force_match;

namespace {

SyntaxTree parse(const char* code) { return parse_function({"q", code, Dialect::Auto}); }

std::size_t count_matches(const SyntaxTree& t, const char* pattern) {
    return match_pattern(t, parse_query(pattern), default_category_table()).size();
}

} // namespace

TEST_CASE("query parsing round-trips") {
    const char* queries[] = {
        "(goto_stmt)",
        "(if_stmt !alternative)",
        "(_)",
        "(!loop_stmt)",
        "((a) | (b))",
        "(expr_stmt (call_expr))",
        "(cond_stmt (_))",
        "(binary_expr (operator) @op)",
        "(loop_stmt ((!loop_stmt)^* (loop_stmt)))",
        "(loop_stmt ((!loop_stmt)^* (loop_stmt))^*)",
        "(call_expr function: (identifier) @name)",
        "({type: 'pointer'})",
        "(_ (_)+ @children)",
        "(_ (_)^*)",
        "(a (b)* (c)+)",
        "((declaration (init_declarator (function_declarator))) | "
        "(parameter_declaration (function_declarator)))",
    };
    for (const char* q : queries) {
        CAPTURE(q);
        QueryPattern p = parse_query(q);
        QueryPattern again = parse_query(render_query(p));
        CHECK(again == p);
    }
}

TEST_CASE("query syntax errors carry positions") {
    CHECK_THROWS_AS(parse_query("(a (b)* (c"), QuerySyntaxError);
    try {
        parse_query("(a (b)* (c");
    } catch (const QuerySyntaxError& e) {
        CHECK(e.offset() >= 8); // at or after "(c"
    }
    CHECK_THROWS_AS(parse_query("(a)^"), QuerySyntaxError);           // unknown quantifier
    CHECK_THROWS_AS(parse_query("((a) @x (b) @x)"), QuerySyntaxError); // duplicate capture
    CHECK_THROWS_AS(parse_query("(a))"), QuerySyntaxError);            // trailing input
    CHECK_THROWS_AS(parse_query("(a (b)^* (c)^*)"), QuerySyntaxError); // two descend items
}

TEST_CASE("S1 pattern shape") {
    QueryPattern p = parse_query("(goto_stmt)");
    CHECK(p.head == QueryPattern::Head::Kind);
    CHECK(p.kind == "goto_stmt");
    CHECK(p.items.empty());

    QueryPattern s5 = parse_query("(if_stmt !alternative)");
    CHECK(s5.kind == "if_stmt");
    REQUIRE(s5.negated_fields.size() == 1);
    CHECK(s5.negated_fields[0] == "alternative");
}

TEST_CASE("unknown kinds are rejected with the category list") {
    SyntaxTree t = parse("void f(){}");
    CHECK_THROWS_WITH_AS(
        match_pattern(t, parse_query("(no_such_kind)"), default_category_table()),
        doctest::Contains("known categories"), Error);
}

// Table 7 constructs: one positive and one negative case each.

TEST_CASE("node: matches each node of its type") {
    SyntaxTree t = parse("void f(){ goto x; x: return; }");
    CHECK(count_matches(t, "(goto_statement)") == 1);   // concrete kind
    CHECK(count_matches(t, "(goto_stmt)") == 1);        // category alias
    CHECK(count_matches(t, "(while_statement)") == 0);  // negative
}

TEST_CASE("parent-child: node with a matching child") {
    SyntaxTree t = parse("void f(){ g(); x = h(); }");
    // g() is an expression statement whose child is a call; x = h() is not.
    CHECK(count_matches(t, "(expr_stmt (call_expr))") == 1);
    CHECK(count_matches(t, "(expr_stmt (goto_stmt))") == 0);
}

TEST_CASE("siblings: ordered subsequence, extra children permitted") {
    SyntaxTree t = parse("int f(int a, char b){}");
    CHECK(count_matches(t, "(parameter_list (parameter_declaration) (parameter_declaration))") ==
          1);
    // Order matters: primitive_type precedes the declarator inside each
    // parameter.
    CHECK(count_matches(t, "(parameter_declaration (primitive_type) (identifier))") == 2);
    CHECK(count_matches(t, "(parameter_declaration (identifier) (primitive_type))") == 0);
}

TEST_CASE("sibling quantifiers: star accepts zero, plus needs one") {
    SyntaxTree t = parse("void f(){ { } { g(); } }");
    // Every compound matches with star.
    CHECK(count_matches(t, "(compound_statement (expression_statement)*)") == 3);
    // Plus requires at least one statement child.
    CHECK(count_matches(t, "(compound_statement (expression_statement)+)") == 1);
}

TEST_CASE("descendant quantifier: path of matching nodes") {
    SyntaxTree t = parse("void f(){ while(a) { for(;;) g(); } }");
    // while directly containing (through non-loop nodes) a for.
    CHECK(count_matches(t, "(while_statement ((!loop_stmt)^* (for_statement)))") == 1);
    CHECK(count_matches(t, "(for_statement ((!loop_stmt)^* (while_statement)))") == 0);
    // Zero-length path: base case matches every node of the head kind.
    CHECK(count_matches(t, "(while_statement (_)^*)") == 1);
}

TEST_CASE("alternative: union of branches") {
    SyntaxTree t = parse("void f(){ goto x; x: return; }");
    CHECK(count_matches(t, "((goto_stmt) | (return_stmt))") == 2);
    CHECK(count_matches(t, "((while_statement) | (for_statement))") == 0);
}

TEST_CASE("negation: complement within named nodes") {
    SyntaxTree t = parse("void f(){ goto x; x: return; }");
    std::size_t total = iter_named_nodes(t).size();
    CHECK(count_matches(t, "(goto_statement)") + count_matches(t, "(!goto_statement)") == total);
    CHECK(count_matches(t, "(!goto_statement)") == total - 1);
}

TEST_CASE("wildcard totality") {
    for (const char* code : {"void f(){}", "int g(){ return 1+2*3; }",
                             "void h(){ if(a&&b) c(); else d(); }"}) {
        SyntaxTree t = parse(code);
        CHECK(count_matches(t, "(_)") == iter_named_nodes(t).size());
    }
}

TEST_CASE("annotation: captures bind the matched nodes") {
    SyntaxTree t = parse("int f(){ return a + b; }");
    auto results = match_pattern(t, parse_query("(binary_expr (identifier) @x)"),
                                 default_category_table());
    REQUIRE(results.size() == 1);
    const auto& captured = results[0].captures.at("x");
    REQUIRE(captured.size() == 2); // all bindings for this root
    CHECK(t.text(*captured[0]) == "a");
    CHECK(t.text(*captured[1]) == "b");
}

TEST_CASE("field constraints and negated fields") {
    SyntaxTree t = parse("void f(){ if(a) b(); else c(); if(d) e(); }");
    CHECK(count_matches(t, "(if_stmt !alternative)") == 1);
    CHECK(count_matches(t, "(if_stmt alternative: (_))") == 1);
    CHECK(count_matches(t, "(call_expr function: (identifier))") == 3);
    CHECK(count_matches(t, "(call_expr arguments: (identifier))") == 0);
}

TEST_CASE("operator category reaches anonymous tokens") {
    SyntaxTree t = parse("int f(){ return a && b || c + 1; }");
    auto results = match_pattern(t, parse_query("(binary_expr (operator) @op)"),
                                 default_category_table());
    REQUIRE(results.size() == 3);
    int logical = 0;
    for (const auto& r : results) {
        std::string_view op = t.text(*r.captures.at("op").front());
        if (op == "&&" || op == "||") ++logical;
    }
    CHECK(logical == 2);
    // Anonymous tokens never count as plain matches.
    CHECK(count_matches(t, "(_)") == iter_named_nodes(t).size());
}

TEST_CASE("attribute predicates require an oracle and filter by it") {
    SyntaxTree t = parse("void f(int *p, int q){ p+1; q+2; }");
    QueryPattern pat = parse_query("({type: 'pointer'})");
    CHECK_THROWS_AS(match_pattern(t, pat, default_category_table()), Error);
    AttributeOracle oracle = pointer_attribute_oracle(t);
    auto marked = match_pattern(t, pat, default_category_table(), oracle);
    // p (use) and the arithmetic over it; q stays unmarked.
    CHECK(marked.size() >= 2);
    for (const auto& r : marked) {
        CHECK(t.text(*r.root) != "q");
    }
}

TEST_CASE("group chains: nesting patterns match as in the catalog") {
    SyntaxTree t = parse("void f(){ while(a){ if(b){ for(;;) g(); } } }");
    // while > (non-loop path) > for.
    CHECK(count_matches(t, "(loop_stmt ((!loop_stmt)^* (loop_stmt)))") == 1);
    // Chained form matches every loop (zero applications allowed).
    CHECK(count_matches(t, "(loop_stmt ((!loop_stmt)^* (loop_stmt))^*)") == 2);
}

TEST_CASE("match results are deterministic and in pre-order") {
    SyntaxTree t = parse("void f(){ g(); h(); i(); }");
    auto a = match_pattern(t, parse_query("(call_expr)"), default_category_table());
    auto b = match_pattern(t, parse_query("(call_expr)"), default_category_table());
    REQUIRE(a.size() == 3);
    REQUIRE(b.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].root == b[i].root);
    CHECK(a[0].root->begin < a[1].root->begin);
    CHECK(a[1].root->begin < a[2].root->begin);
}

TEST_CASE("brute force agrees on the conformance snippets") {
    const char* codes[] = {
        "void f(){ goto x; x: return; }",
        "void f(){ if(a) b(); else c(); if(d) e(); }",
        "void f(){ while(a) { for(;;) g(); } }",
        "int f(int a, char b){ return a+b*2; }",
        "void f(){ { } { g(); h(); } }",
    };
    const char* patterns[] = {
        "(_)",
        "(!identifier)",
        "(expr_stmt (call_expr))",
        "(if_stmt !alternative)",
        "(compound_statement (expression_statement)+)",
        "(loop_stmt ((!loop_stmt)^* (loop_stmt)))",
        "(loop_stmt ((!loop_stmt)^* (loop_stmt))^*)",
        "(binary_expr (operator) @op)",
        "((goto_stmt) | (return_stmt)) @r",
        "(_ (_)+ @children)",
    };
    for (const char* code : codes) {
        SyntaxTree t = parse(code);
        for (const char* pattern : patterns) {
            CAPTURE(code);
            CAPTURE(pattern);
            QueryPattern p = parse_query(pattern);
            auto fast = match_pattern(t, p, default_category_table());
            auto slow = brute_force_match(t, p, default_category_table());
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i].root == slow[i].root);
                CHECK(fast[i].captures == slow[i].captures);
            }
        }
    }
}

TEST_CASE("random patterns round-trip through render_query") {
    std::mt19937_64 rng(77001);
    for (int iter = 0; iter < 500; ++iter) {
        std::string text = metriscope::testing::random_pattern_text(rng);
        CAPTURE(text);
        QueryPattern p = parse_query(text);
        QueryPattern again = parse_query(render_query(p));
        REQUIRE(again == p);
    }
}

TEST_CASE("brute force equals the matcher on seeded random cases") {
    std::mt19937_64 rng(20240817);
    const auto& table = metriscope::testing::synthetic_table();
    for (int iter = 0; iter < 300; ++iter) {
        SyntaxTree t = metriscope::testing::random_tree(rng);
        std::string pattern_text = metriscope::testing::random_pattern_text(rng);
        CAPTURE(iter);
        CAPTURE(pattern_text);
        QueryPattern p = parse_query(pattern_text);
        auto fast = match_pattern(t, p, table);
        auto slow = brute_force_match(t, p, table);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            REQUIRE(fast[i].root == slow[i].root);
            REQUIRE(fast[i].captures == slow[i].captures);
        }
    }
}
