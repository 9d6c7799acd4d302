#include <algorithm>
#include <cmath>
#include <map>

#include "metriscope/error.hpp"
#include "metriscope/stats.hpp"

namespace metriscope {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0;
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_stdev(std::span<const double> xs) {
    if (xs.size() < 2) return 0;
    double m = mean(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

namespace {

// Regularized incomplete beta function by continued fraction (Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                     b * std::log(1.0 - x);
    double front = std::exp(ln_beta);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int df) {
    double nu = static_cast<double>(df);
    double x = nu / (nu + t * t);
    double p = 0.5 * reg_incomplete_beta(nu / 2.0, 0.5, x);
    return t >= 0 ? 1.0 - p : p;
}

} // namespace

double student_t_quantile(double p, int df) {
    if (df < 1) throw Error("student_t_quantile: df must be >= 1");
    if (p <= 0.0 || p >= 1.0) throw Error("student_t_quantile: p must be in (0,1)");
    if (p == 0.5) return 0.0;
    bool upper = p > 0.5;
    double target = upper ? p : 1.0 - p;
    // CDF is monotone; bisection is plenty for the df we use.
    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, df) < target && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double q = 0.5 * (lo + hi);
    return upper ? q : -q;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("pearson: length mismatch");
    if (x.size() < 2) return std::nullopt;
    double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> r_squared(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw Error("r_squared: length mismatch");
    if (y.empty()) return std::nullopt;
    double my = mean(y);
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    if (ss_tot <= 0) return std::nullopt;
    return 1.0 - ss_res / ss_tot;
}

double mutual_information(std::span<const double> values, std::span<const int> labels, int bins) {
    if (values.size() != labels.size()) throw Error("mutual_information: length mismatch");
    if (bins < 2) throw Error("mutual_information: bins must be >= 2");
    if (values.empty()) return 0;

    // Equal-frequency bin edges, deduplicated so ties collapse.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (int b = 1; b < bins; ++b) {
        std::size_t idx = static_cast<std::size_t>(
            static_cast<double>(b) * static_cast<double>(sorted.size()) /
            static_cast<double>(bins));
        idx = std::min(idx, sorted.size() - 1);
        double edge = sorted[idx];
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }

    auto bin_of = [&edges](double v) {
        return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
    };

    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> p_bin;
    double p_label[2] = {0, 0};
    double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int b = bin_of(values[i]);
        int l = labels[i] != 0 ? 1 : 0;
        joint[{b, l}] += 1.0 / n;
        p_bin[b] += 1.0 / n;
        p_label[l] += 1.0 / n;
    }
    double mi = 0;
    for (const auto& [key, pxy] : joint) {
        double px = p_bin[key.first];
        double py = p_label[key.second];
        if (pxy > 0 && px > 0 && py > 0) mi += pxy * std::log(pxy / (px * py));
    }
    return std::max(mi, 0.0);
}

} // namespace metriscope
