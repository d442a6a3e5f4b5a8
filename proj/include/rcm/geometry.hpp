#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "rcm/errors.hpp"

namespace rcm {

inline constexpr int kMaxDim = 4;

/// Coordinates in R^d, d <= kMaxDim. Unused trailing coordinates stay zero.
using Point = std::array<double, kMaxDim>;

/// Stable identifier of a point. Sampled points have non-negative ids,
/// forced (inserted) points take the reserved range -1, -2, ...
struct PointId {
    std::int64_t value = 0;

    [[nodiscard]] constexpr bool forced() const noexcept { return value < 0; }
    friend constexpr auto operator<=>(PointId, PointId) = default;
};

inline void check_dimension(int d)
{
    if (d < 1 || d > kMaxDim) {
        throw UsageError("dimension must be in 1.." + std::to_string(kMaxDim) + ", got " + std::to_string(d));
    }
}

inline double squared_distance(const Point& a, const Point& b, int d) noexcept
{
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

inline double norm(std::span<const double> x) noexcept
{
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

/// Strict lexicographic order on the first d coordinates.
inline bool lexicographic_less(const Point& a, const Point& b, int d) noexcept
{
    return std::lexicographical_compare(a.begin(), a.begin() + d, b.begin(), b.begin() + d);
}

/// Volume of the d-dimensional ball of radius r.
inline double ball_volume(int d, double r)
{
    check_dimension(d);
    constexpr double pi = std::numbers::pi;
    switch (d) {
    case 1: return 2.0 * r;
    case 2: return pi * r * r;
    case 3: return 4.0 / 3.0 * pi * r * r * r;
    default: return pi * pi / 2.0 * r * r * r * r;
    }
}

/// Volume of the intersection of two d-balls of radius r whose centers are s apart.
inline double ball_intersection_volume(int d, double r, double s)
{
    check_dimension(d);
    s = std::fabs(s);
    if (s >= 2.0 * r) {
        return 0.0;
    }
    constexpr double pi = std::numbers::pi;
    switch (d) {
    case 1: return 2.0 * r - s;
    case 2: return 2.0 * r * r * std::acos(s / (2.0 * r)) - 0.5 * s * std::sqrt(4.0 * r * r - s * s);
    case 3: return pi * (4.0 * r + s) * (2.0 * r - s) * (2.0 * r - s) / 12.0;
    default: {
        // two hyperspherical caps of height r - s/2
        const double x = 1.0 - (s * s) / (4.0 * r * r);
        return ball_volume(d, r) * boost::math::ibeta((d + 1) / 2.0, 0.5, x);
    }
    }
}

/// Closed axis-aligned cube center + [-side/2, side/2]^d.
class BoxWindow {
public:
    BoxWindow(int d, double side, Point center = {}) : d_(d), side_(side), center_(center)
    {
        check_dimension(d);
        if (!(side > 0.0) || !std::isfinite(side)) {
            throw UsageError("BoxWindow: side must be positive and finite");
        }
        for (int k = d; k < kMaxDim; ++k) {
            center_[k] = 0.0;
        }
    }

    /// Λ_side centered at the origin.
    static BoxWindow centered(int d, double side) { return BoxWindow(d, side); }

    [[nodiscard]] int dimension() const noexcept { return d_; }
    [[nodiscard]] double side() const noexcept { return side_; }
    [[nodiscard]] const Point& center() const noexcept { return center_; }
    [[nodiscard]] double lower(int k) const noexcept { return center_[k] - side_ / 2.0; }
    [[nodiscard]] double upper(int k) const noexcept { return center_[k] + side_ / 2.0; }
    [[nodiscard]] double volume() const noexcept { return std::pow(side_, d_); }

    [[nodiscard]] bool contains(const Point& x) const noexcept
    {
        const double h = side_ / 2.0;
        for (int k = 0; k < d_; ++k) {
            if (std::fabs(x[k] - center_[k]) > h) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] bool contains(const BoxWindow& inner) const noexcept
    {
        for (int k = 0; k < d_; ++k) {
            if (inner.lower(k) < lower(k) || inner.upper(k) > upper(k)) {
                return false;
            }
        }
        return true;
    }

    /// Same center, each face pushed outward by `margin` (negative shrinks).
    [[nodiscard]] BoxWindow dilated(double margin) const { return BoxWindow(d_, side_ + 2.0 * margin, center_); }

    friend bool operator==(const BoxWindow&, const BoxWindow&) = default;

private:
    int d_;
    double side_;
    Point center_;
};

/// Smallest origin-centered box containing both `box` and the origin.
inline BoxWindow centered_hull(const BoxWindow& box)
{
    double half = 0.0;
    for (int k = 0; k < box.dimension(); ++k) {
        half = std::max({half, std::fabs(box.lower(k)), std::fabs(box.upper(k))});
    }
    return BoxWindow(box.dimension(), 2.0 * half);
}

} // namespace rcm
