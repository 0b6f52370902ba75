#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dyson::stats {

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double fourth_central = 0.0;

    double standard_error() const;
    /// Standard error of the sample variance, sqrt((m4 - s^4)/n).
    double variance_standard_error() const;
};

Summary summarize(std::span<const double> xs);

/// sup_x |F_n(x) - cdf(x)|.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

/// sup_x |F_a(x) - F_b(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// (mean_a - mean_b) / combined standard error.
double mean_z(const Summary& a, const Summary& b);
double variance_z(const Summary& a, const Summary& b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_standard_error = 0.0;
};

/// Ordinary least squares y = intercept + slope x; needs two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Least squares on (log x, log y); all values must be positive.
LinearFit log_log_fit(std::span<const double> x, std::span<const double> y);

}  // namespace dyson::stats
