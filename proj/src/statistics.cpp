#include "dyson/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dyson::stats {

double Summary::standard_error() const { return std::sqrt(variance / static_cast<double>(count)); }

double Summary::variance_standard_error() const {
    return std::sqrt(std::max(fourth_central - variance * variance, 0.0) / static_cast<double>(count));
}

Summary summarize(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("summary needs at least two values");
    Summary s;
    s.count = xs.size();
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - s.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    s.variance = m2 / (n - 1.0);
    s.fourth_central = m4 / n;
    return s;
}

double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    if (xs.empty()) throw std::invalid_argument("KS statistic of an empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic of an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double mean_z(const Summary& a, const Summary& b) {
    const double se = std::sqrt(a.variance / a.count + b.variance / b.count);
    return se == 0.0 ? 0.0 : (a.mean - b.mean) / se;
}

double variance_z(const Summary& a, const Summary& b) {
    const double se = std::hypot(a.variance_standard_error(), b.variance_standard_error());
    return se == 0.0 ? 0.0 : (a.variance - b.variance) / se;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs matching x, y with >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear fit needs two distinct abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_standard_error = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return fit;
}

LinearFit log_log_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw std::domain_error("log-log fit needs positive abscissae");
        lx[i] = std::log(x[i]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::domain_error("log-log fit needs positive ordinates");
        ly[i] = std::log(y[i]);
    }
    return linear_fit(lx, ly);
}

}  // namespace dyson::stats
