#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "metriscope/learner.hpp"

namespace metriscope {

namespace {

// Sign-preserving log compression: equals log1p on the nonnegative metric
// values and stays monotone for negative inputs (embedding coordinates).
double slog1p(double x) { return x >= 0 ? std::log1p(x) : -std::log1p(-x); }

Eigen::MatrixXd transform_raw(const Eigen::MatrixXd& X) {
    return X.unaryExpr([](double v) { return slog1p(v); });
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& T, const Eigen::VectorXd& shift,
                            const Eigen::VectorXd& scale) {
    Eigen::MatrixXd Z = T.rowwise() - shift.transpose();
    Z.array().rowwise() /= scale.transpose().array();
    return Z;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

struct Member {
    Eigen::VectorXd w;
    double b = 0;
};

Member train_member(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& sample_weight, const TrainConfig& cfg) {
    const Eigen::Index n = Z.rows(), d = Z.cols();
    Member m;
    m.w = Eigen::VectorXd::Zero(d);
    double wsum = sample_weight.sum();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Eigen::VectorXd z = Z * m.w;
        z.array() += m.b;
        Eigen::VectorXd p = z.unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd err = (p - y).cwiseProduct(sample_weight);
        Eigen::VectorXd grad_w = Z.transpose() * err / wsum + cfg.l2 * m.w;
        double grad_b = err.sum() / wsum;
        m.w -= cfg.learning_rate * grad_w;
        m.b -= cfg.learning_rate * grad_b;
    }
    (void)n;
    return m;
}

Eigen::VectorXd ensemble_scores(const std::vector<Member>& members, const Eigen::MatrixXd& Z) {
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(Z.rows());
    for (const auto& m : members) {
        Eigen::VectorXd z = Z * m.w;
        z.array() += m.b;
        scores += z.unaryExpr([](double v) { return sigmoid(v); });
    }
    return scores / static_cast<double>(members.size());
}

double tune_threshold(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
    std::vector<double> s(scores.data(), scores.data() + scores.size());
    std::vector<int> l(labels.data(), labels.data() + labels.size());
    std::vector<double> candidates = s;
    candidates.push_back(0.5);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best_threshold = 0.5;
    double best_f1 = classification_scores(s, l, 0.5).f1;
    for (double t : candidates) {
        double f1 = classification_scores(s, l, t).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_threshold = t;
        }
    }
    return best_threshold;
}

} // namespace

long BaselineModel::parameter_count() const {
    long count = 2 * static_cast<long>(shift.size()) + 1; // transform + threshold
    for (const auto& w : weights) count += static_cast<long>(w.size()) + 1;
    return count;
}

BaselineModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const TrainConfig& config) {
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n != y.size()) throw Error("fit: feature/label row mismatch");
    Eigen::Index n_pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) n_pos += y(i) != 0 ? 1 : 0;
    if (n_pos == 0 || n_pos == n) throw Error("fit: training data contains a single class");

    std::mt19937_64 rng(config.seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);

    // Hold out the tail of the shuffle for threshold tuning, but keep both
    // classes in the fitting part.
    Eigen::Index n_valid =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(config.valid_fraction *
                                                         static_cast<double>(n)),
                               n - 2);
    n_valid = std::max<Eigen::Index>(n_valid, 0);
    for (;;) {
        Eigen::Index fit_pos = 0, fit_n = n - n_valid;
        for (Eigen::Index i = 0; i < fit_n; ++i) fit_pos += y(order[static_cast<std::size_t>(i)]);
        if ((fit_pos > 0 && fit_pos < fit_n) || n_valid == 0) break;
        --n_valid;
    }
    Eigen::Index n_fit = n - n_valid;

    Eigen::MatrixXd fit_X(n_fit, d);
    Eigen::VectorXd fit_y(n_fit);
    for (Eigen::Index i = 0; i < n_fit; ++i) {
        fit_X.row(i) = X.row(order[static_cast<std::size_t>(i)]);
        fit_y(i) = y(order[static_cast<std::size_t>(i)]) != 0 ? 1.0 : 0.0;
    }

    BaselineModel model;
    model.config = config;
    Eigen::MatrixXd fit_T = transform_raw(fit_X);
    Eigen::RowVectorXd mean_row = fit_T.colwise().mean();
    model.shift = mean_row.transpose();
    Eigen::MatrixXd centered = fit_T.rowwise() - mean_row;
    Eigen::RowVectorXd variance =
        centered.array().square().colwise().sum() /
        std::max<double>(1.0, static_cast<double>(n_fit - 1));
    model.scale = variance.array().sqrt().transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
        if (model.scale(j) < 1e-12) model.scale(j) = 1.0;
    }
    Eigen::MatrixXd fit_Z = standardize(fit_T, model.shift, model.scale);

    double pos_weight = config.positive_weight;
    if (pos_weight <= 0) {
        double fp = fit_y.sum();
        pos_weight = (static_cast<double>(n_fit) - fp) / std::max(1.0, fp);
    }
    Eigen::VectorXd base_weight(n_fit);
    for (Eigen::Index i = 0; i < n_fit; ++i) base_weight(i) = fit_y(i) != 0 ? pos_weight : 1.0;

    int ensemble = std::max(1, config.ensemble);
    std::vector<Member> members;
    members.reserve(static_cast<std::size_t>(ensemble));
    for (int e = 0; e < ensemble; ++e) {
        if (e == 0) {
            // First member sees the full fitting part.
            members.push_back(train_member(fit_Z, fit_y, base_weight, config));
            continue;
        }
        std::mt19937_64 member_rng(config.seed ^ (0x9e3779b97f4a7c15ULL * (e + 1)));
        std::uniform_int_distribution<Eigen::Index> pick(0, n_fit - 1);
        Eigen::MatrixXd bag_Z(n_fit, d);
        Eigen::VectorXd bag_y(n_fit), bag_w(n_fit);
        Eigen::Index bag_pos = 0;
        for (Eigen::Index i = 0; i < n_fit; ++i) {
            Eigen::Index k = pick(member_rng);
            bag_Z.row(i) = fit_Z.row(k);
            bag_y(i) = fit_y(k);
            bag_w(i) = base_weight(k);
            bag_pos += bag_y(i) != 0 ? 1 : 0;
        }
        if (bag_pos == 0 || bag_pos == n_fit) {
            members.push_back(train_member(fit_Z, fit_y, base_weight, config));
        } else {
            members.push_back(train_member(bag_Z, bag_y, bag_w, config));
        }
    }
    if (n_valid > 0) {
        Eigen::MatrixXd valid_X(n_valid, d);
        Eigen::VectorXi valid_y(n_valid);
        for (Eigen::Index i = 0; i < n_valid; ++i) {
            valid_X.row(i) = X.row(order[static_cast<std::size_t>(n_fit + i)]);
            valid_y(i) = y(order[static_cast<std::size_t>(n_fit + i)]);
        }
        bool has_pos = (valid_y.array() != 0).any();
        bool has_neg = (valid_y.array() == 0).any();
        if (has_pos && has_neg) {
            Eigen::MatrixXd valid_Z =
                standardize(transform_raw(valid_X), model.shift, model.scale);
            model.threshold = tune_threshold(ensemble_scores(members, valid_Z), valid_y);
        }
    }
    for (auto& m : members) {
        model.weights.push_back(std::move(m.w));
        model.biases.push_back(m.b);
    }
    return model;
}

Eigen::VectorXd predict_scores(const BaselineModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.shift.size()) {
        throw Error("predict: expected " + std::to_string(model.shift.size()) +
                    " features, got " + std::to_string(X.cols()));
    }
    Eigen::MatrixXd Z = standardize(transform_raw(X), model.shift, model.scale);
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(X.rows());
    for (std::size_t e = 0; e < model.weights.size(); ++e) {
        Eigen::VectorXd z = Z * model.weights[e];
        z.array() += model.biases[e];
        scores += z.unaryExpr([](double v) { return sigmoid(v); });
    }
    return scores / static_cast<double>(model.weights.size());
}

double predict_score(const BaselineModel& model, const Eigen::VectorXd& x) {
    Eigen::MatrixXd X(1, x.size());
    X.row(0) = x;
    return predict_scores(model, X)(0);
}

RunScores evaluate_model(const BaselineModel& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXi& y, double fpr_budget) {
    Eigen::VectorXd scores = predict_scores(model, X);
    std::vector<double> s(scores.data(), scores.data() + scores.size());
    std::vector<int> l(y.data(), y.data() + y.size());
    RunScores out;
    ClassificationScores cs = classification_scores(s, l, model.threshold);
    out.f1 = cs.f1;
    out.mcc = cs.mcc;
    out.bacc = cs.bacc;
    out.auprc = auprc(s, l);
    out.vds = vd_s(s, l, fpr_budget);
    out.threshold = model.threshold;
    return out;
}

double random_baseline_f1(const Eigen::VectorXi& y, std::uint64_t seed, int k) {
    std::vector<int> labels(y.data(), y.data() + y.size());
    double total = 0;
    for (int run = 0; run < std::max(1, k); ++run) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(run));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<double> scores(labels.size());
        for (auto& s : scores) s = uni(rng);
        total += classification_scores(scores, labels, 0.5).f1;
    }
    return total / static_cast<double>(std::max(1, k));
}

std::string model_to_json(const BaselineModel& model) {
    nlohmann::ordered_json j;
    j["schema"] = "metriscope-model-v1";
    j["feature_count"] = model.feature_count();
    j["threshold"] = model.threshold;
    j["shift"] = std::vector<double>(model.shift.data(), model.shift.data() + model.shift.size());
    j["scale"] = std::vector<double>(model.scale.data(), model.scale.data() + model.scale.size());
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < model.weights.size(); ++e) {
        nlohmann::ordered_json m;
        m["weights"] = std::vector<double>(model.weights[e].data(),
                                           model.weights[e].data() + model.weights[e].size());
        m["bias"] = model.biases[e];
        members.push_back(std::move(m));
    }
    j["members"] = std::move(members);
    nlohmann::ordered_json cfg;
    cfg["learning_rate"] = model.config.learning_rate;
    cfg["epochs"] = model.config.epochs;
    cfg["l2"] = model.config.l2;
    cfg["positive_weight"] = model.config.positive_weight;
    cfg["seed"] = model.config.seed;
    cfg["ensemble"] = model.config.ensemble;
    cfg["valid_fraction"] = model.config.valid_fraction;
    j["config"] = std::move(cfg);
    return j.dump(2) + "\n";
}

BaselineModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || j.value("schema", "") != "metriscope-model-v1") {
        throw Error("not a metriscope model file");
    }
    BaselineModel model;
    auto shift = j.at("shift").get<std::vector<double>>();
    auto scale = j.at("scale").get<std::vector<double>>();
    model.shift = Eigen::Map<Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size()));
    model.scale = Eigen::Map<Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
    model.threshold = j.at("threshold").get<double>();
    for (const auto& m : j.at("members")) {
        auto w = m.at("weights").get<std::vector<double>>();
        model.weights.push_back(
            Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
        model.biases.push_back(m.at("bias").get<double>());
    }
    const auto& cfg = j.at("config");
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.epochs = cfg.at("epochs").get<int>();
    model.config.l2 = cfg.at("l2").get<double>();
    model.config.positive_weight = cfg.at("positive_weight").get<double>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.ensemble = cfg.at("ensemble").get<int>();
    model.config.valid_fraction = cfg.at("valid_fraction").get<double>();
    return model;
}

} // namespace metriscope
