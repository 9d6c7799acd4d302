#include <algorithm>
#include <cmath>

#include "metriscope/learner.hpp"
#include "metriscope/stats.hpp"

namespace metriscope {

namespace {

struct Confusion {
    double tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels,
                       double threshold) {
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] >= threshold;
        bool pos = labels[i] != 0;
        if (pred && pos) c.tp += 1;
        if (pred && !pos) c.fp += 1;
        if (!pred && pos) c.fn += 1;
        if (!pred && !pos) c.tn += 1;
    }
    return c;
}

} // namespace

ClassificationScores classification_scores(std::span<const double> scores,
                                           std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size()) throw Error("classification_scores: length mismatch");
    Confusion c = confusion_at(scores, labels, threshold);
    ClassificationScores out;

    double f1_den = 2 * c.tp + c.fp + c.fn;
    out.f1 = f1_den > 0 ? 100.0 * 2 * c.tp / f1_den : 0.0;

    double mcc_den = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn);
    if (mcc_den > 0) {
        out.mcc = 100.0 * (c.tp * c.tn - c.fp * c.fn) / std::sqrt(mcc_den);
    } else {
        out.mcc = 0.0;
        out.mcc_degenerate = true;
    }

    double tpr = c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 0.0;
    double tnr = c.tn + c.fp > 0 ? c.tn / (c.tn + c.fp) : 0.0;
    out.bacc = 100.0 * (tpr + tnr) / 2.0;
    return out;
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error("auprc: length mismatch");
    double total_pos = 0;
    for (int l : labels) total_pos += l != 0 ? 1 : 0;
    if (total_pos == 0) throw Error("auprc: no positive labels");

    // Group ties, sweep thresholds in descending score order.
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double tp = 0, fp = 0, area = 0, prev_recall = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] != 0) {
                tp += 1;
            } else {
                fp += 1;
            }
            ++i;
        }
        double precision = tp / (tp + fp);
        double recall = tp / total_pos;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return 100.0 * area;
}

double vd_s(std::span<const double> scores, std::span<const int> labels, double fpr_budget) {
    if (scores.size() != labels.size()) throw Error("vd_s: length mismatch");
    double total_pos = 0, total_neg = 0;
    for (int l : labels) {
        if (l != 0) {
            total_pos += 1;
        } else {
            total_neg += 1;
        }
    }
    if (total_pos == 0 || total_neg == 0) throw Error("vd_s: both classes required");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Threshold above all scores: nothing predicted positive.
    double best_fnr = 1.0; // FPR = 0 <= budget by definition
    double tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] != 0) {
                tp += 1;
            } else {
                fp += 1;
            }
            ++i;
        }
        double fpr = fp / total_neg;
        double fnr = (total_pos - tp) / total_pos;
        if (fpr <= fpr_budget) best_fnr = std::min(best_fnr, fnr);
    }
    return 100.0 * best_fnr;
}

double confidence_interval(const std::vector<double>& per_run_values, double level) {
    if (per_run_values.size() < 2) {
        throw Error("confidence_interval: need at least two runs");
    }
    if (level <= 0.0 || level >= 1.0) throw Error("confidence_interval: level in (0,1)");
    double sd = sample_stdev(per_run_values);
    if (sd == 0.0) return 0.0;
    int df = static_cast<int>(per_run_values.size()) - 1;
    double t = student_t_quantile(0.5 + level / 2.0, df);
    return t * sd / std::sqrt(static_cast<double>(per_run_values.size()));
}

} // namespace metriscope
