#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "rcm/errors.hpp"

namespace rcm {

inline constexpr double kZ95 = 1.959963984540054;

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t hits, std::uint64_t n, double z = kZ95)
{
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, std::min(center - half, phat)), std::min(1.0, std::max(center + half, phat))};
}

inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

inline double chi_square_quantile(double df, double p)
{
    return boost::math::quantile(boost::math::chi_squared(df), p);
}

inline double chi_square_sf(double df, double x)
{
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

/// Survival function of the limiting Kolmogorov distribution, P[K > x].
inline double kolmogorov_sf(double x)
{
    if (x <= 0.0) {
        return 1.0;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) {
            break;
        }
    }
    return std::clamp(s, 0.0, 1.0);
}

/// Upper alpha critical value of the one-sample Kolmogorov-Smirnov statistic D_n
/// (Stephens' finite-n adjustment of the limiting law).
inline double ks_critical_value(std::size_t n, double alpha)
{
    double lo = 0.0;
    double hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
    }
    const double rn = std::sqrt(static_cast<double>(n));
    return 0.5 * (lo + hi) / (rn + 0.12 + 0.11 / rn);
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and Uniform[0,1).
inline double ks_uniform_statistic(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        dmax = std::max({dmax, xs[i] - lo, hi - xs[i]});
    }
    return dmax;
}

/// Sample mean with standard error, accumulated in a fixed order.
class MeanAccumulator {
public:
    void add(double x) noexcept
    {
        ++n_;
        sum_.add(x);
        sq_.add(x * x);
    }
    [[nodiscard]] std::uint64_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }
    [[nodiscard]] double variance() const noexcept
    {
        if (n_ < 2) {
            return 0.0;
        }
        const double nn = static_cast<double>(n_);
        const double m = mean();
        return std::max(0.0, (sq_.value() - nn * m * m) / (nn - 1.0));
    }
    [[nodiscard]] double stderr_of_mean() const noexcept
    {
        return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::uint64_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sq_;
};

/// Weighted least-squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// sqrt(1 / sum w (x - xbar)^2): the slope error when w are inverse variances of independent y.
    double slope_se = 0.0;
    /// Weighted coefficient of determination.
    double r2 = 0.0;
    /// slope = sum_i coefficients[i] * y[i]; used for sandwich variances under correlated y.
    std::vector<double> coefficients;
};

inline LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w)
{
    if (x.size() != y.size() || x.size() != w.size()) {
        throw UsageError("weighted_line_fit: size mismatch");
    }
    if (x.size() < 2) {
        throw EstimationError("weighted_line_fit: need at least two points");
    }
    CompensatedSum sw;
    CompensatedSum swx;
    CompensatedSum swy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw.add(w[i]);
        swx.add(w[i] * x[i]);
        swy.add(w[i] * y[i]);
    }
    const double xbar = swx.value() / sw.value();
    const double ybar = swy.value() / sw.value();
    CompensatedSum sxx;
    CompensatedSum sxy;
    CompensatedSum syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar;
        const double dy = y[i] - ybar;
        sxx.add(w[i] * dx * dx);
        sxy.add(w[i] * dx * dy);
        syy.add(w[i] * dy * dy);
    }
    if (!(sxx.value() > 0.0)) {
        throw EstimationError("weighted_line_fit: abscissae are degenerate");
    }
    LineFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = ybar - fit.slope * xbar;
    fit.slope_se = std::sqrt(1.0 / sxx.value());
    fit.r2 = syy.value() > 0.0 ? (sxy.value() * sxy.value()) / (sxx.value() * syy.value()) : 1.0;
    fit.coefficients.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        fit.coefficients[i] = w[i] * (x[i] - xbar) / sxx.value();
    }
    return fit;
}

} // namespace rcm
