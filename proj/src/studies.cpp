#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "metriscope/stats.hpp"
#include "metriscope/studies.hpp"

namespace metriscope {

namespace {

// Rows of `features` reordered to the embedding ids. Throws on any id the
// feature table does not contain.
std::vector<const FeatureRow*> align_rows(const EmbeddingFile& embeddings,
                                          const FeatureTable& features) {
    std::unordered_map<std::string_view, const FeatureRow*> by_id;
    by_id.reserve(features.rows.size());
    for (const auto& row : features.rows) by_id.emplace(row.id, &row);
    std::vector<const FeatureRow*> out;
    out.reserve(embeddings.ids.size());
    for (const auto& id : embeddings.ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw Error("sample id '" + id + "' has an embedding but no feature row");
        }
        out.push_back(it->second);
    }
    return out;
}

Eigen::VectorXi labels_of(const std::vector<const FeatureRow*>& rows) {
    Eigen::VectorXi y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i]->label;
    return y;
}

Eigen::MatrixXd features_of(const std::vector<const FeatureRow*>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < kFeatureCount; ++j) {
            m(static_cast<Eigen::Index>(i), j) = rows[i]->values[static_cast<std::size_t>(j)];
        }
    }
    return m;
}

double fit_and_score_f1(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                        const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                        const TrainConfig& config) {
    BaselineModel model = fit(train_X, train_y, config);
    return evaluate_model(model, test_X, test_y).f1;
}

} // namespace

ProbeReport linear_probe(const EmbeddingFile& train_embeddings, const FeatureTable& train_features,
                         const EmbeddingFile& test_embeddings, const FeatureTable& test_features,
                         const std::string& source_id) {
    if (train_embeddings.rows.cols() != test_embeddings.rows.cols()) {
        throw Error("linear_probe: train/test embedding dimensions differ");
    }
    if (train_embeddings.rows.cols() < 1) throw Error("linear_probe: empty embeddings");
    auto train_rows = align_rows(train_embeddings, train_features);
    auto test_rows = align_rows(test_embeddings, test_features);

    const Eigen::MatrixXd& X = train_embeddings.rows;
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n < 2) throw Error("linear_probe: need at least two training rows");

    Eigen::RowVectorXd x_mean = X.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    Eigen::MatrixXd gram = Xc.transpose() * Xc;
    double lambda = 1e-6 * gram.trace() / static_cast<double>(d);
    if (!(lambda > 0)) lambda = 1e-12;
    gram.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) {
        throw Error("linear_probe: singular design despite ridge stabilizer");
    }

    ProbeReport report;
    report.source_id = source_id;
    report.r2.resize(kFeatureCount, 0.0);
    Eigen::MatrixXd Xt_c = test_embeddings.rows.rowwise() - x_mean;

    for (int j = 0; j < kFeatureCount; ++j) {
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i) = std::log1p(train_rows[static_cast<std::size_t>(i)]
                                  ->values[static_cast<std::size_t>(j)]);
        }
        double z_mean = z.mean();
        Eigen::VectorXd w = solver.solve(Xc.transpose() * (z.array() - z_mean).matrix());
        Eigen::VectorXd pred = (Xt_c * w).array() + z_mean;

        std::vector<double> y_true, y_pred;
        y_true.reserve(test_rows.size());
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            y_true.push_back(std::log1p(test_rows[i]->values[static_cast<std::size_t>(j)]));
            y_pred.push_back(pred(static_cast<Eigen::Index>(i)));
        }
        // Constant held-out targets leave R^2 undefined; report 0.
        report.r2[static_cast<std::size_t>(j)] = r_squared(y_true, y_pred).value_or(0.0);
    }
    return report;
}

XGainReport cross_information_gain(const EmbeddingFile& train_embeddings,
                                   const FeatureTable& train_features,
                                   const EmbeddingFile& test_embeddings,
                                   const FeatureTable& test_features, const TrainConfig& config,
                                   int k) {
    auto train_rows = align_rows(train_embeddings, train_features);
    auto test_rows = align_rows(test_embeddings, test_features);
    Eigen::VectorXi train_y = labels_of(train_rows);
    Eigen::VectorXi test_y = labels_of(test_rows);

    Eigen::MatrixXd train_base = train_embeddings.rows;
    Eigen::MatrixXd test_base = test_embeddings.rows;

    Eigen::MatrixXd train_aug(train_base.rows(), train_base.cols() + kFeatureCount);
    train_aug << train_base, features_of(train_rows);
    Eigen::MatrixXd test_aug(test_base.rows(), test_base.cols() + kFeatureCount);
    test_aug << test_base, features_of(test_rows);

    XGainReport report;
    report.runs = std::max(1, k);
    for (int run = 0; run < report.runs; ++run) {
        TrainConfig run_config = config;
        run_config.seed = config.seed + static_cast<std::uint64_t>(run);
        report.f1_embeddings.push_back(
            fit_and_score_f1(train_base, train_y, test_base, test_y, run_config));
        report.f1_combined.push_back(
            fit_and_score_f1(train_aug, train_y, test_aug, test_y, run_config));
    }
    report.f1_embeddings_mean = mean(report.f1_embeddings);
    report.f1_combined_mean = mean(report.f1_combined);
    report.delta_f1 = report.f1_combined_mean - report.f1_embeddings_mean;
    return report;
}

CorrelationReport prediction_correlation(const FeatureTable& features,
                                         const PredictionFile& predictions) {
    std::unordered_map<std::string_view, const FeatureRow*> by_id;
    for (const auto& row : features.rows) by_id.emplace(row.id, &row);

    std::vector<const FeatureRow*> rows;
    rows.reserve(predictions.ids.size());
    for (const auto& id : predictions.ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw Error("sample id '" + id + "' has a prediction but no feature row");
        }
        rows.push_back(it->second);
    }
    if (rows.size() < 2) throw Error("prediction_correlation: need at least two samples");

    CorrelationReport report;
    report.r.resize(kFeatureCount);
    for (int j = 0; j < kFeatureCount; ++j) {
        std::vector<double> xs;
        xs.reserve(rows.size());
        for (const auto* row : rows) xs.push_back(row->values[static_cast<std::size_t>(j)]);
        report.r[static_cast<std::size_t>(j)] = pearson(xs, predictions.scores);
    }
    return report;
}

CausalReport causal_dependence(const Eigen::MatrixXd& delta_features,
                               const Eigen::VectorXd& delta_y) {
    const Eigen::Index n = delta_features.rows(), d = delta_features.cols();
    if (delta_y.size() != n) throw Error("causal_dependence: row mismatch");
    if (n < d + 1) {
        throw Error("causal_dependence: need more pairs than features (" + std::to_string(n) +
                    " <= " + std::to_string(d) + ")");
    }
    double y_mean = delta_y.mean();
    double ss_tot = (delta_y.array() - y_mean).square().sum();
    if (ss_tot <= 0) throw Error("causal_dependence: prediction deltas have zero variance");

    Eigen::MatrixXd design(n, d + 1);
    design << delta_features, Eigen::VectorXd::Ones(n);
    Eigen::VectorXd coef = design.colPivHouseholderQr().solve(delta_y);

    CausalReport report;
    report.weights = coef.head(d);
    report.intercept = coef(d);
    report.pairs_used = static_cast<std::size_t>(n);
    Eigen::VectorXd pred = design * coef;
    double ss_res = (delta_y - pred).squaredNorm();
    report.r2 = 1.0 - ss_res / ss_tot;
    return report;
}

CausalReport causal_dependence_holdout(const Eigen::MatrixXd& delta_features,
                                       const Eigen::VectorXd& delta_y, double holdout,
                                       std::uint64_t seed) {
    if (holdout <= 0.0 || holdout >= 1.0) {
        throw Error("causal_dependence_holdout: holdout must be in (0,1)");
    }
    const Eigen::Index n = delta_features.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::Index n_test = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                                        holdout * static_cast<double>(n)));
    Eigen::Index n_fit = n - n_test;

    Eigen::MatrixXd fit_X(n_fit, delta_features.cols());
    Eigen::VectorXd fit_y(n_fit);
    for (Eigen::Index i = 0; i < n_fit; ++i) {
        fit_X.row(i) = delta_features.row(order[static_cast<std::size_t>(i)]);
        fit_y(i) = delta_y(order[static_cast<std::size_t>(i)]);
    }
    CausalReport fitted = causal_dependence(fit_X, fit_y);

    std::vector<double> y_true, y_pred;
    for (Eigen::Index i = n_fit; i < n; ++i) {
        Eigen::Index row = order[static_cast<std::size_t>(i)];
        y_true.push_back(delta_y(row));
        y_pred.push_back(delta_features.row(row).dot(fitted.weights) + fitted.intercept);
    }
    auto r2 = r_squared(y_true, y_pred);
    if (!r2.has_value()) throw Error("causal_dependence_holdout: held-out deltas are constant");

    CausalReport report = fitted;
    report.r2 = *r2;
    report.pairs_used = static_cast<std::size_t>(n_fit);
    return report;
}

StudyReport isolation_study(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                            const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                            const TrainConfig& config) {
    StudyReport report;
    report.full_f1 = fit_and_score_f1(train_X, train_y, test_X, test_y, config);
    if (report.full_f1 <= 0) throw Error("isolation_study: full-catalog F1 is zero");
    for (Eigen::Index j = 0; j < train_X.cols(); ++j) {
        double f1 = fit_and_score_f1(train_X.col(j), train_y, test_X.col(j), test_y, config);
        report.relative_f1.push_back(100.0 * f1 / report.full_f1);
    }
    return report;
}

StudyReport leave_one_out_study(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                                const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                                const TrainConfig& config) {
    StudyReport report;
    report.full_f1 = fit_and_score_f1(train_X, train_y, test_X, test_y, config);
    if (report.full_f1 <= 0) throw Error("leave_one_out_study: full-catalog F1 is zero");
    const Eigen::Index d = train_X.cols();
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::MatrixXd train_drop(train_X.rows(), d - 1);
        Eigen::MatrixXd test_drop(test_X.rows(), d - 1);
        Eigen::Index col = 0;
        for (Eigen::Index c = 0; c < d; ++c) {
            if (c == j) continue;
            train_drop.col(col) = train_X.col(c);
            test_drop.col(col) = test_X.col(c);
            ++col;
        }
        double f1 = fit_and_score_f1(train_drop, train_y, test_drop, test_y, config);
        report.relative_f1.push_back(100.0 * f1 / report.full_f1);
    }
    return report;
}

std::vector<double> feature_mutual_information(const FeatureTable& features, int bins) {
    std::vector<int> labels;
    labels.reserve(features.rows.size());
    for (const auto& row : features.rows) labels.push_back(row.label);
    std::vector<double> out;
    out.reserve(kFeatureCount);
    for (int j = 0; j < kFeatureCount; ++j) {
        std::vector<double> xs;
        xs.reserve(features.rows.size());
        for (const auto& row : features.rows) xs.push_back(row.values[static_cast<std::size_t>(j)]);
        out.push_back(mutual_information(xs, labels, bins));
    }
    return out;
}

} // namespace metriscope
