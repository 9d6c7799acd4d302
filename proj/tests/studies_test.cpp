#include <doctest.h>

#include <cmath>
#include <random>

#include "metriscope/stats.hpp"
#include "metriscope/studies.hpp"

using namespace metriscope;

namespace {

FeatureTable table_from(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                        const std::string& prefix) {
    FeatureTable t;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        FeatureRow row;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%06lld", prefix.c_str(),
                      static_cast<long long>(i));
        row.id = buf;
        for (int j = 0; j < kFeatureCount && j < X.cols(); ++j) {
            row.values[static_cast<std::size_t>(j)] = X(i, j);
        }
        row.label = y(i);
        t.rows.push_back(std::move(row));
    }
    return t;
}

EmbeddingFile embeddings_from(const Eigen::MatrixXd& E, const std::string& prefix) {
    EmbeddingFile f;
    for (Eigen::Index i = 0; i < E.rows(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%06lld", prefix.c_str(),
                      static_cast<long long>(i));
        f.ids.push_back(buf);
    }
    f.rows = E;
    return f;
}

} // namespace

TEST_CASE("pearson and r_squared basics") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    CHECK(*pearson(x, x) == doctest::Approx(1.0));

    std::vector<double> neg = {5, 4, 3, 2, 1};
    CHECK(*pearson(x, neg) == doctest::Approx(-1.0));

    std::vector<double> constant = {2, 2, 2, 2, 2};
    CHECK_FALSE(pearson(x, constant).has_value());

    // Scale invariance and sign equivariance.
    std::vector<double> y = {2, 1, 4, 3, 6};
    std::vector<double> y_scaled(y.size()), y_negated(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_scaled[i] = 5.0 * y[i] + 3.0;
        y_negated[i] = -y[i];
    }
    CHECK(*pearson(x, y_scaled) == doctest::Approx(*pearson(x, y)));
    CHECK(*pearson(x, y_negated) == doctest::Approx(-*pearson(x, y)));
    CHECK(*pearson(y, x) == doctest::Approx(*pearson(x, y)));

    // r_squared(y, mean) = 0; hand case 1 - 1/2 = 0.5.
    std::vector<double> ys = {1, 2, 3};
    std::vector<double> mean_hat = {2, 2, 2};
    CHECK(*r_squared(ys, mean_hat) == doctest::Approx(0.0));
    std::vector<double> close = {1, 2, 4};
    CHECK(*r_squared(ys, close) == doctest::Approx(0.5));
    CHECK(*r_squared(ys, ys) == doctest::Approx(1.0));
}

TEST_CASE("causal dependence recovers exact linear structure") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 500;
    Eigen::MatrixXd dmu(n, kFeatureCount);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) dmu(i, j) = g(rng);
    }
    Eigen::VectorXd dy = 2.0 * dmu.col(0);
    CausalReport report = causal_dependence(dmu, dy);
    CHECK(report.r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.weights(0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(report.pairs_used == static_cast<std::size_t>(n));
}

TEST_CASE("causal dependence on independent noise stays near the fitting floor") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 10000;
    Eigen::MatrixXd dmu(n, kFeatureCount);
    Eigen::VectorXd dy(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) dmu(i, j) = g(rng);
        dy(i) = g(rng);
    }
    CausalReport report = causal_dependence(dmu, dy);
    CHECK(report.r2 <= 0.01 + static_cast<double>(kFeatureCount) / n);
    CHECK(report.r2 >= 0.0);
}

TEST_CASE("causal dependence input validation") {
    Eigen::MatrixXd few(5, kFeatureCount);
    few.setRandom();
    Eigen::VectorXd dy(5);
    dy.setRandom();
    CHECK_THROWS_AS(causal_dependence(few, dy), Error);

    Eigen::MatrixXd ok(50, kFeatureCount);
    ok.setRandom();
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(50, 0.25);
    CHECK_THROWS_AS(causal_dependence(ok, flat), Error);
}

TEST_CASE("causal holdout mode scores unseen pairs") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 2000;
    Eigen::MatrixXd dmu(n, kFeatureCount);
    Eigen::VectorXd dy(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) dmu(i, j) = g(rng);
        dy(i) = 1.5 * dmu(i, 1) - 0.5 * dmu(i, 9);
    }
    CausalReport held = causal_dependence_holdout(dmu, dy, 0.25, 3);
    CHECK(held.r2 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(held.pairs_used == 1500);

    // On pure noise the held-out R2 has no fitting inflation and sits at or
    // below zero on average.
    Eigen::VectorXd noise(n);
    for (int i = 0; i < n; ++i) noise(i) = g(rng);
    CausalReport noise_held = causal_dependence_holdout(dmu, noise, 0.25, 3);
    CHECK(noise_held.r2 < 0.05);
    CHECK_THROWS_AS(causal_dependence_holdout(dmu, dy, 1.5, 3), Error);
}

TEST_CASE("causal R2 is invariant under column rescaling and permutation") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 400;
    Eigen::MatrixXd dmu(n, kFeatureCount);
    Eigen::VectorXd dy(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) dmu(i, j) = g(rng);
        dy(i) = 0.5 * dmu(i, 2) - 1.5 * dmu(i, 7) + 0.2 * g(rng);
    }
    double base = causal_dependence(dmu, dy).r2;
    CHECK(causal_dependence(3.7 * dmu, dy).r2 == doctest::Approx(base).epsilon(1e-10));

    Eigen::MatrixXd permuted = dmu;
    permuted.col(0).swap(permuted.col(11));
    permuted.col(3).swap(permuted.col(19));
    CHECK(causal_dependence(permuted, dy).r2 == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("linear probe recovers linearly encoded metrics") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 400, d = 8;
    Eigen::MatrixXd X(n, kFeatureCount);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) {
            X(i, j) = std::floor(std::abs(g(rng)) * 5.0); // count-like metrics
        }
    }
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
    for (int i = 0; i < n; i += 3) y(i) = 1;

    // Embeddings carry log(1+metric_j) coordinates for a few metrics plus
    // noise dimensions.
    Eigen::MatrixXd E(n, d);
    for (int i = 0; i < n; ++i) {
        E(i, 0) = std::log1p(X(i, 0));
        E(i, 1) = std::log1p(X(i, 5));
        E(i, 2) = std::log1p(X(i, 22));
        for (int j = 3; j < d; ++j) E(i, j) = g(rng);
    }
    FeatureTable train_t = table_from(X.topRows(n / 2), y.head(n / 2), "tr");
    FeatureTable test_t = table_from(X.bottomRows(n / 2), y.tail(n / 2), "te");
    EmbeddingFile train_e = embeddings_from(E.topRows(n / 2), "tr");
    EmbeddingFile test_e = embeddings_from(E.bottomRows(n / 2), "te");

    ProbeReport report = linear_probe(train_e, train_t, test_e, test_t, "unit");
    CHECK(report.r2[0] >= 0.99);
    CHECK(report.r2[5] >= 0.99);
    CHECK(report.r2[22] >= 0.99);
    for (int j : {1, 2, 3}) CHECK(report.r2[static_cast<std::size_t>(j)] <= 0.2);
}

TEST_CASE("linear probe on independent noise explains nothing") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 10000, d = 4;
    Eigen::MatrixXd X(n, kFeatureCount);
    Eigen::MatrixXd E(n, d);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::floor(std::abs(g(rng)) * 4.0);
        for (int j = 0; j < d; ++j) E(i, j) = g(rng);
        y(i) = i % 7 == 0;
    }
    ProbeReport report =
        linear_probe(embeddings_from(E.topRows(n / 2), "a"), table_from(X.topRows(n / 2), y.head(n / 2), "a"),
                     embeddings_from(E.bottomRows(n / 2), "b"),
                     table_from(X.bottomRows(n / 2), y.tail(n / 2), "b"));
    for (double r2 : report.r2) CHECK(r2 <= 0.02);
}

TEST_CASE("probe train R2 grows with nested embeddings") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 300;
    Eigen::MatrixXd X(n, kFeatureCount);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::abs(g(rng)) * 3.0;
    }
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
    y.head(40).setOnes();
    FeatureTable t = table_from(X, y, "n");

    // Nested designs: each embedding extends the previous with one more
    // informative coordinate.
    Eigen::MatrixXd E1(n, 1), E2(n, 2), E3(n, 3);
    for (int i = 0; i < n; ++i) {
        E1(i, 0) = g(rng);
        E2(i, 0) = E1(i, 0);
        E2(i, 1) = 0.5 * std::log1p(X(i, 4)) + 0.1 * g(rng);
        E3(i, 0) = E2(i, 0);
        E3(i, 1) = E2(i, 1);
        E3(i, 2) = std::log1p(X(i, 4));
    }
    double r1 = linear_probe(embeddings_from(E1, "n"), t, embeddings_from(E1, "n"), t).r2[4];
    double r2 = linear_probe(embeddings_from(E2, "n"), t, embeddings_from(E2, "n"), t).r2[4];
    double r3 = linear_probe(embeddings_from(E3, "n"), t, embeddings_from(E3, "n"), t).r2[4];
    CHECK(r2 >= r1 - 1e-9);
    CHECK(r3 >= r2 - 1e-9);
}

TEST_CASE("cross information gain vanishes when features are already embedded") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 600;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, kFeatureCount);
    Eigen::VectorXi y(n);
    Eigen::MatrixXd E(n, kFeatureCount);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) {
            X(i, j) = std::abs(g(rng)) * 2.0;
            E(i, j) = X(i, j); // embeddings literally contain the features
        }
        y(i) = X(i, 0) + X(i, 1) > 2.5 ? 1 : 0;
    }
    TrainConfig config;
    config.epochs = 120;
    config.ensemble = 2;
    XGainReport report = cross_information_gain(
        embeddings_from(E.topRows(n / 2), "x"), table_from(X.topRows(n / 2), y.head(n / 2), "x"),
        embeddings_from(E.bottomRows(n / 2), "y"),
        table_from(X.bottomRows(n / 2), y.tail(n / 2), "y"), config, 3);
    CHECK(std::abs(report.delta_f1) < 3.0);
}

TEST_CASE("cross information gain is large when embeddings are noise") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 600;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, kFeatureCount);
    Eigen::VectorXi y(n);
    Eigen::MatrixXd E(n, 6);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::abs(g(rng)) * 2.0;
        for (int j = 0; j < 6; ++j) E(i, j) = g(rng);
        y(i) = X(i, 2) > 1.6 ? 1 : 0; // label depends on features only
    }
    TrainConfig config;
    config.epochs = 150;
    config.ensemble = 2;
    XGainReport report = cross_information_gain(
        embeddings_from(E.topRows(n / 2), "x"), table_from(X.topRows(n / 2), y.head(n / 2), "x"),
        embeddings_from(E.bottomRows(n / 2), "y"),
        table_from(X.bottomRows(n / 2), y.tail(n / 2), "y"), config, 3);
    CHECK(report.delta_f1 > 15.0);
}

TEST_CASE("prediction correlation") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 500;
    Eigen::MatrixXd X(n, kFeatureCount);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::abs(g(rng));
        X(i, 3) = 0.0; // constant column
    }
    FeatureTable t = table_from(X, y, "p");
    PredictionFile pred;
    for (const auto& row : t.rows) pred.ids.push_back(row.id);
    // Predictions equal to C5 (column index 9) exactly.
    for (Eigen::Index i = 0; i < n; ++i) pred.scores.push_back(X(i, 9));
    CorrelationReport report = prediction_correlation(t, pred);
    CHECK(report.r[9].has_value());
    CHECK(*report.r[9] == doctest::Approx(1.0));
    CHECK_FALSE(report.r[3].has_value()); // constant column: undefined, not 0

    for (auto& s : pred.scores) s = -s;
    CorrelationReport negated = prediction_correlation(t, pred);
    CHECK(*negated.r[9] == doctest::Approx(-1.0));
}

TEST_CASE("prediction correlation of independent noise is small") {
    std::mt19937_64 rng(81);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int n = 10000;
    Eigen::MatrixXd X(n, kFeatureCount);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = g(rng);
    }
    FeatureTable t = table_from(X, y, "q");
    PredictionFile pred;
    for (const auto& row : t.rows) pred.ids.push_back(row.id);
    for (int i = 0; i < n; ++i) pred.scores.push_back(uni(rng));
    CorrelationReport report = prediction_correlation(t, pred);
    for (const auto& r : report.r) {
        REQUIRE(r.has_value());
        CHECK(std::abs(*r) <= 0.03);
    }
}

TEST_CASE("mutual information estimator") {
    std::mt19937_64 rng(91);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 10000;
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = g(rng);
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[static_cast<std::size_t>(n / 2)];
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)] > median ? 1 : 0;
    }
    // label = 1[x > median] with 2 bins: MI = ln 2 up to estimator bias.
    CHECK(mutual_information(xs, labels, 2) == doctest::Approx(std::log(2.0)).epsilon(0.015));

    // Independent labels: MI near zero.
    std::vector<int> coin(static_cast<std::size_t>(n));
    for (auto& c : coin) c = rng() % 2;
    CHECK(mutual_information(xs, coin, 16) <= 0.01);

    // Constant metric: zero.
    std::vector<double> constant(100, 3.0);
    std::vector<int> l(100);
    for (int i = 0; i < 100; ++i) l[static_cast<std::size_t>(i)] = i % 2;
    CHECK(mutual_information(constant, l, 16) == 0.0);
}

TEST_CASE("isolation study finds the single informative metric") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 800;
    Eigen::MatrixXd X(n, kFeatureCount);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::abs(g(rng));
        X(i, 7) = 3.0; // constant across the corpus
        y(i) = X(i, 4) > 0.8 ? 1 : 0; // label depends only on metric index 4
    }
    TrainConfig config;
    config.epochs = 150;
    config.ensemble = 1;
    StudyReport report = isolation_study(X.topRows(n / 2), y.head(n / 2), X.bottomRows(n / 2),
                                         y.tail(n / 2), config);
    REQUIRE(report.relative_f1.size() == 23);
    CHECK(report.relative_f1[4] >= 95.0);
    // Constant-free noise columns score like a constant-feature baseline.
    double best_other = 0;
    for (int j = 0; j < kFeatureCount; ++j) {
        if (j != 4) best_other = std::max(best_other, report.relative_f1[static_cast<std::size_t>(j)]);
    }
    CHECK(best_other < report.relative_f1[4]);

    // Constant feature: the model degenerates to a constant scorer, whose F1
    // is that of the better of predict-all-positive / predict-all-negative on
    // the test labels (the threshold is tuned). Derive that oracle directly.
    std::vector<int> test_labels(y.data() + n / 2, y.data() + n);
    std::vector<double> all_pos(test_labels.size(), 1.0);
    double pos_f1 = classification_scores(all_pos, test_labels, 0.5).f1;
    double constant_oracle = std::max(pos_f1, 0.0) / report.full_f1 * 100.0;
    CHECK(report.relative_f1[7] == doctest::Approx(constant_oracle).epsilon(1e-9));
}

TEST_CASE("leave-one-out tolerates duplicated columns and mourns unique ones") {
    std::mt19937_64 rng(111);
    std::normal_distribution<double> g(0.0, 1.0);
    int n = 800;
    Eigen::MatrixXd X(n, kFeatureCount);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::abs(g(rng));
        X(i, 1) = X(i, 0); // duplicated informative columns
        y(i) = X(i, 0) > 0.9 ? 1 : 0;
    }
    TrainConfig config;
    config.epochs = 150;
    config.ensemble = 1;
    StudyReport report = leave_one_out_study(X.topRows(n / 2), y.head(n / 2),
                                             X.bottomRows(n / 2), y.tail(n / 2), config);
    REQUIRE(report.relative_f1.size() == 23);
    // Removing one of the duplicated pair barely matters.
    CHECK(report.relative_f1[0] >= 90.0);
    CHECK(report.relative_f1[1] >= 90.0);

    // Label depending only on one unique column: removing it collapses F1.
    Eigen::MatrixXd Xu(n, kFeatureCount);
    Eigen::VectorXi yu(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) Xu(i, j) = std::abs(g(rng));
        yu(i) = Xu(i, 6) > 0.9 ? 1 : 0;
    }
    StudyReport unique = leave_one_out_study(Xu.topRows(n / 2), yu.head(n / 2),
                                             Xu.bottomRows(n / 2), yu.tail(n / 2), config);
    double without_6 = unique.relative_f1[6];
    double min_other = 1e9;
    for (int j = 0; j < kFeatureCount; ++j) {
        if (j != 6) min_other = std::min(min_other, unique.relative_f1[static_cast<std::size_t>(j)]);
    }
    CHECK(without_6 < 75.0);
    CHECK(min_other > without_6);
}
