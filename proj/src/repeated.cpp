#include <cmath>

#include "metriscope/learner.hpp"
#include "metriscope/stats.hpp"

namespace metriscope {

EvalReport run_repeated(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                        const Eigen::MatrixXd& test_X, const Eigen::VectorXi& test_y,
                        const TrainConfig& config, int k, double fpr_budget) {
    if (k < 1) throw Error("run_repeated: k must be >= 1");
    EvalReport report;
    report.runs = k;

    long params = 0;
    for (int run = 0; run < k; ++run) {
        TrainConfig run_config = config;
        run_config.seed = config.seed + static_cast<std::uint64_t>(run);
        BaselineModel model = fit(train_X, train_y, run_config);
        if (run == 0) params = model.parameter_count();
        report.per_run.push_back(evaluate_model(model, test_X, test_y, fpr_budget));
    }
    report.parameter_count = params;

    auto column = [&report](double RunScores::*field) {
        std::vector<double> xs;
        xs.reserve(report.per_run.size());
        for (const auto& r : report.per_run) xs.push_back(r.*field);
        return xs;
    };
    auto summarize = [&](double RunScores::*field, double RunScores::*mean_slot,
                         double RunScores::*ci_slot) {
        std::vector<double> xs = column(field);
        report.mean.*mean_slot = mean(xs);
        report.ci_half_width.*ci_slot = xs.size() >= 2 ? confidence_interval(xs) : 0.0;
    };
    summarize(&RunScores::f1, &RunScores::f1, &RunScores::f1);
    summarize(&RunScores::auprc, &RunScores::auprc, &RunScores::auprc);
    summarize(&RunScores::mcc, &RunScores::mcc, &RunScores::mcc);
    summarize(&RunScores::bacc, &RunScores::bacc, &RunScores::bacc);
    summarize(&RunScores::vds, &RunScores::vds, &RunScores::vds);
    summarize(&RunScores::threshold, &RunScores::threshold, &RunScores::threshold);
    report.ci_defined = k >= 2;

    report.random_baseline_f1 = random_baseline_f1(test_y, config.seed, k);
    double millions = static_cast<double>(params) / 1e6;
    report.parameter_efficiency =
        millions > 0 ? (report.mean.f1 - report.random_baseline_f1) / millions : 0.0;
    return report;
}

} // namespace metriscope
