#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "metriscope/corpus.hpp"
#include "metriscope/learner.hpp"

namespace metriscope {

/// Per-metric R-squared of linear probes from embeddings to log(1+metric).
struct ProbeReport {
    std::string source_id;
    std::vector<double> r2; // 23 entries, catalog order; negative on held-out data is possible
};

/// Ridge-stabilized least squares from embeddings to each metric's
/// log(1+value), fitted on the train rows and scored on the test rows
/// (aligned by id). lambda = 1e-6 * trace(X^T X)/d.
ProbeReport linear_probe(const EmbeddingFile& train_embeddings, const FeatureTable& train_features,
                         const EmbeddingFile& test_embeddings, const FeatureTable& test_features,
                         const std::string& source_id = "");

struct XGainReport {
    int runs = 0;
    double f1_embeddings_mean = 0;
    double f1_combined_mean = 0;
    double delta_f1 = 0; // combined - embeddings, percentage points
    std::vector<double> f1_embeddings;
    std::vector<double> f1_combined;
};

/// Trains the baseline head on embeddings alone vs embeddings concatenated
/// with the 23 features, k seeds each, and reports the mean F1 difference.
/// Rows are aligned by id; misaligned inputs raise Error.
XGainReport cross_information_gain(const EmbeddingFile& train_embeddings,
                                   const FeatureTable& train_features,
                                   const EmbeddingFile& test_embeddings,
                                   const FeatureTable& test_features, const TrainConfig& config,
                                   int k = 10);

struct CorrelationReport {
    std::vector<std::optional<double>> r; // 23 entries; nullopt for constant inputs
};

/// Pearson correlation between each metric column and the prediction scores,
/// aligned by id.
CorrelationReport prediction_correlation(const FeatureTable& features,
                                         const PredictionFile& predictions);

struct CausalReport {
    Eigen::VectorXd weights; // 23 regression weights
    double intercept = 0;
    double r2 = 0; // in-sample, per construction
    std::size_t pairs_used = 0;
};

/// Linear regression of prediction deltas on metric deltas; R^2 is the
/// share of prediction-delta variance the metrics explain. In-sample by
/// construction: the regression is fitted and scored on the same pairs.
CausalReport causal_dependence(const Eigen::MatrixXd& delta_features,
                               const Eigen::VectorXd& delta_y);

/// Split mode: fit on a seeded (1 - holdout) share of the pairs and compute
/// R^2 on the held-out rest. holdout in (0, 1).
CausalReport causal_dependence_holdout(const Eigen::MatrixXd& delta_features,
                                       const Eigen::VectorXd& delta_y, double holdout,
                                       std::uint64_t seed);

struct StudyReport {
    double full_f1 = 0;                  // percent, all 23 features
    std::vector<double> relative_f1;     // 23 entries, percent of full_f1
};

/// Retrains on each single metric alone; F1 relative to the full catalog.
StudyReport isolation_study(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                            const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                            const TrainConfig& config);

/// Retrains with each metric left out (22-feature sets).
StudyReport leave_one_out_study(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                                const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                                const TrainConfig& config);

/// Per-metric mutual information with the label, used to order study
/// reports.
std::vector<double> feature_mutual_information(const FeatureTable& features, int bins = 16);

} // namespace metriscope
