#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metriscope/categories.hpp"
#include "metriscope/query.hpp"
#include "metriscope/syntax.hpp"

namespace metriscope {

inline constexpr int kFeatureCount = 23;

enum class ReduceKind { Sum, Max, Avg };

std::string_view to_string(ReduceKind r);

/// Per-match valuation. The simple metrics map every match to 1; the richer
/// ones read captures, auxiliary metrics or tree shape at the matched node.
struct MapKind {
    enum class Op {
        ConstantOne,
        MagicNumberIndicator,   // numeric value of the literal outside {-1,0,1}
        CaptureTextInSet,       // capture text equals one of text_set
        CaptureTextContains,    // capture text contains needle (case-insensitive)
        ConditionAuxPlusOne,    // 1 + aux metric over the node's condition subtree
        AuxPositiveIndicator,   // 1 if aux metric over the subtree is positive
        AuxRootSum,             // sum of aux metrics anchored at the node itself
        SubtreeHeight,
        CaptureCardinality,     // number of distinct nodes bound by `capture`
        OperandCount,           // nodes of the given categories in the subtree
        CategoryNestingDepth,   // 1 + proper ancestors in the category
        CategoryNestedIndicator,// 1 if a proper ancestor is in the category
        CategoryDescendantCount,// category nodes in the proper subtree
    };

    Op op = Op::ConstantOne;
    std::string capture;
    std::vector<std::string> text_set;
    std::string needle;
    std::vector<std::string> aux_ids;
    std::vector<std::string> categories;

    std::string describe() const;
};

struct MetricSpec {
    std::string id;
    std::string description;
    std::string filter_text;
    QueryPattern filter;
    MapKind map;
    ReduceKind reduce = ReduceKind::Sum;
    bool exported = true;
};

/// The 23 exported metrics in feature order plus the auxiliary measures
/// (C1.1, M1.1, M1.2, M3.1) they reference.
class MetricCatalog {
public:
    explicit MetricCatalog(std::vector<MetricSpec> specs);

    const std::vector<MetricSpec>& all() const { return specs_; }
    const std::vector<const MetricSpec*>& exported() const { return exported_; }
    const MetricSpec& find(std::string_view id) const; // throws on unknown id

private:
    std::vector<MetricSpec> specs_;
    std::vector<const MetricSpec*> exported_;
};

const MetricCatalog& default_catalog();

/// Feature names in vector order: S1..S5, C1..C12, M1..M3, T1..T3.
const std::array<std::string, kFeatureCount>& feature_names();

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    bool parse_error = false;
};

/// Heuristic pointer-typing over one tree, used by the {type: 'pointer'}
/// attribute of M3/M3.1: identifiers declared with pointer or array
/// declarators, address-of expressions, and +/- arithmetic over such values.
AttributeOracle pointer_attribute_oracle(const SyntaxTree& tree);

/// reduce(map(filter matches)). Empty match sets reduce to 0.
double evaluate_metric(const SyntaxTree& tree, const MetricSpec& spec,
                       const MetricCatalog& catalog, const NodeCategoryTable& table);

/// All 23 exported metrics in fixed order.
FeatureVector extract_features(const SyntaxTree& tree, const MetricCatalog& catalog,
                               const NodeCategoryTable& table);

/// Human-readable manifest (JSON text) and a stable hash of it.
std::string catalog_manifest(const MetricCatalog& catalog);
std::uint64_t catalog_hash(const MetricCatalog& catalog);

/// Numeric value of a C/C++ number literal (hex, octal, binary, separators,
/// suffixes). Returns nullopt when the text is not a recognizable number.
std::optional<long double> parse_number_literal(std::string_view text);

} // namespace metriscope
