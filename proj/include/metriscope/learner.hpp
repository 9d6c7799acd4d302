#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metriscope/error.hpp"

namespace metriscope {

/// Configuration of the baseline learner: an ensemble of class-weighted
/// logistic models over sign-preserving log1p + standardized features, with
/// the decision threshold tuned on a held-out validation part.
struct TrainConfig {
    double learning_rate = 0.5;
    int epochs = 300;
    double l2 = 1e-4;
    double positive_weight = 0; // 0: use n_negative / n_positive
    std::uint64_t seed = 1;
    int ensemble = 5;
    double valid_fraction = 0.2; // held out for threshold tuning
};

struct BaselineModel {
    Eigen::VectorXd shift; // per-feature, applied after the log transform
    Eigen::VectorXd scale;
    std::vector<Eigen::VectorXd> weights; // one per ensemble member
    std::vector<double> biases;
    double threshold = 0.5;
    TrainConfig config;

    int feature_count() const { return static_cast<int>(shift.size()); }
    long parameter_count() const;
};

/// Trains the baseline. X is n x d raw feature rows, y in {0,1}.
/// Deterministic under a fixed config.seed. Throws when only one class is
/// present.
BaselineModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const TrainConfig& config);

/// Mean sigmoid score of the ensemble, in [0,1]. Throws on dimension
/// mismatch.
double predict_score(const BaselineModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict_scores(const BaselineModel& model, const Eigen::MatrixXd& X);

struct ClassificationScores {
    double f1 = 0;   // percent
    double mcc = 0;  // percent, [-100, 100]
    double bacc = 0; // percent
    bool mcc_degenerate = false;
};

/// Confusion-matrix scores at the given threshold (prediction = score >=
/// threshold). MCC of a degenerate confusion matrix is reported as 0 with
/// the flag set.
ClassificationScores classification_scores(std::span<const double> scores,
                                           std::span<const int> labels, double threshold);

/// Area under the precision-recall curve, percent. Ties in scores are
/// grouped before the curve is built. Throws when no positive labels exist.
double auprc(std::span<const double> scores, std::span<const int> labels);

/// Vulnerability detection score: the minimum false negative rate over all
/// thresholds whose false positive rate stays within the budget, percent.
double vd_s(std::span<const double> scores, std::span<const int> labels,
            double fpr_budget = 0.0005);

/// Student-t confidence interval half-width over per-run values. Throws for
/// fewer than two runs.
double confidence_interval(const std::vector<double>& per_run_values, double level = 0.90);

struct RunScores {
    double f1 = 0, auprc = 0, mcc = 0, bacc = 0, vds = 0, threshold = 0.5;
};

struct EvalReport {
    int runs = 0;
    bool ci_defined = false;
    std::vector<RunScores> per_run;
    RunScores mean;
    RunScores ci_half_width; // zeros when ci_defined is false
    long parameter_count = 0;
    double random_baseline_f1 = 0; // seeded random scorer on the same test split
    double parameter_efficiency = 0; // (F1 - random F1) per million parameters
};

/// The repeated-run protocol: k independently seeded fits on reshuffled
/// train data, all evaluated on the fixed test split, aggregated with 90%
/// confidence intervals.
EvalReport run_repeated(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                        const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                        const TrainConfig& config, int k = 10, double fpr_budget = 0.0005);

/// Scores a fitted model on one split.
RunScores evaluate_model(const BaselineModel& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXi& y, double fpr_budget = 0.0005);

/// Expected F1 of a uniform random scorer at threshold 0.5, averaged over k
/// seeded draws; the paper-style floor for parameter efficiency.
double random_baseline_f1(const Eigen::VectorXi& y, std::uint64_t seed, int k);

std::string model_to_json(const BaselineModel& model);
BaselineModel model_from_json(const std::string& text);

} // namespace metriscope
