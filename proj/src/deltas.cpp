#include "metriscope/corpus.hpp"

namespace metriscope {

DeltaTable compute_metric_deltas(const std::vector<RevisionPair>& pairs,
                                 const MetricCatalog& catalog, const NodeCategoryTable& table,
                                 const ExtractOptions& options) {
    struct Row {
        std::string id;
        Eigen::RowVectorXd delta;
        std::optional<double> dy;
        bool flagged;
    };
    std::vector<Row> rows;
    for (const auto& pair : pairs) {
        try {
            SyntaxTree before = parse_function({pair.id + ":before", pair.code_before,
                                                options.dialect});
            SyntaxTree after = parse_function({pair.id + ":after", pair.code_after,
                                               options.dialect});
            FeatureVector fb = extract_features(before, catalog, table);
            FeatureVector fa = extract_features(after, catalog, table);
            Row row;
            row.id = pair.id;
            row.delta.resize(kFeatureCount);
            for (int j = 0; j < kFeatureCount; ++j) {
                row.delta(j) = fa.values[static_cast<std::size_t>(j)] -
                               fb.values[static_cast<std::size_t>(j)];
            }
            if (pair.prediction_before && pair.prediction_after) {
                row.dy = *pair.prediction_after - *pair.prediction_before;
            }
            row.flagged = fb.parse_error || fa.parse_error;
            rows.push_back(std::move(row));
        } catch (const Error&) {
            // Either version entirely unusable: drop the pair.
        }
    }
    if (rows.empty()) throw Error("no usable revision pairs");

    DeltaTable out;
    out.delta_features.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.ids.push_back(rows[i].id);
        out.delta_features.row(static_cast<Eigen::Index>(i)) = rows[i].delta;
        out.delta_predictions.push_back(rows[i].dy);
        out.parse_flagged.push_back(rows[i].flagged);
    }
    return out;
}

} // namespace metriscope
