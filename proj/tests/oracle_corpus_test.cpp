#include <doctest.h>

#include "support/oracle_corpus.hpp"

using namespace metriscope;

TEST_CASE("hand-derived corpus matches extract_features exactly") {
    const auto& cases = metriscope::testing::oracle_corpus();
    CHECK(cases.size() >= 40);
    const MetricCatalog& catalog = default_catalog();
    const NodeCategoryTable& table = default_category_table();
    for (const auto& oc : cases) {
        CAPTURE(oc.name);
        SyntaxTree tree = parse_function({oc.name, oc.code, Dialect::Auto});
        CHECK(tree.parse_error() == oc.parse_error);
        FeatureVector fv = extract_features(tree, catalog, table);
        for (int i = 0; i < kFeatureCount; ++i) {
            CAPTURE(feature_names()[static_cast<std::size_t>(i)]);
            double got = fv.values[static_cast<std::size_t>(i)];
            double want = oc.expected[static_cast<std::size_t>(i)];
            if (feature_names()[static_cast<std::size_t>(i)] == "T3") {
                CHECK(got == doctest::Approx(want).epsilon(1e-9));
            } else {
                CHECK(got == want); // counts are integer-exact
            }
        }
    }
}
