#pragma once

#include <optional>
#include <span>
#include <vector>

namespace metriscope {

double mean(std::span<const double> xs);
double sample_stdev(std::span<const double> xs); // n-1 denominator, 0 for n < 2

/// Quantile of Student's t distribution with df degrees of freedom,
/// p in (0, 1). Used for confidence intervals.
double student_t_quantile(double p, int df);

/// Pearson correlation; nullopt when either input has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Coefficient of determination 1 - SS_res/SS_tot; may be negative for poor
/// predictions. nullopt when y has zero variance.
std::optional<double> r_squared(std::span<const double> y, std::span<const double> y_hat);

/// Plug-in mutual information (nats) between an equal-frequency binning of
/// `values` and binary labels. Constant values give 0.
double mutual_information(std::span<const double> values, std::span<const int> labels, int bins);

} // namespace metriscope
