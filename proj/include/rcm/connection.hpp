#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rcm/errors.hpp"
#include "rcm/geometry.hpp"

namespace rcm {

/// One interpolation node of a radial connection profile.
struct ProfileKnot {
    double radius = 0.0;
    double probability = 0.0;
    friend bool operator==(const ProfileKnot&, const ProfileKnot&) = default;
};

/// Radial connection function psi(x) = profile(|x|) with finite support radius.
///
/// BooleanDisk(p, r): psi(x) = p * 1{|x| <= r}.
/// RadialProfile: piecewise-linear interpolation between knots, held at the
/// first/last knot value outside the knot range, zero beyond r_max.
class ConnectionSpec {
public:
    enum class Kind { BooleanDisk, RadialProfile };

    static ConnectionSpec boolean_disk(int d, double p, double r = 1.0)
    {
        check_dimension(d);
        if (!(p >= 0.0 && p <= 1.0)) {
            throw UsageError("BooleanDisk: p must lie in [0,1]");
        }
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw UsageError("BooleanDisk: r must be positive and finite");
        }
        ConnectionSpec s;
        s.kind_ = Kind::BooleanDisk;
        s.d_ = d;
        s.p_ = p;
        s.radius_ = r;
        return s;
    }

    /// psi identically zero (expressed as a BooleanDisk with p = 0).
    static ConnectionSpec zero(int d, double r = 1.0) { return boolean_disk(d, 0.0, r); }

    static ConnectionSpec radial_profile(int d, std::vector<ProfileKnot> knots, double r_max)
    {
        check_dimension(d);
        if (knots.empty()) {
            throw UsageError("RadialProfile: at least one knot required");
        }
        if (!(r_max > 0.0) || !std::isfinite(r_max)) {
            throw UsageError("RadialProfile: r_max must be positive and finite");
        }
        for (std::size_t i = 0; i < knots.size(); ++i) {
            const auto& k = knots[i];
            if (!(k.probability >= 0.0 && k.probability <= 1.0)) {
                throw UsageError("RadialProfile: knot probability outside [0,1]");
            }
            if (!(k.radius >= 0.0) || k.radius > r_max) {
                throw UsageError("RadialProfile: knot radius outside [0, r_max]");
            }
            if (i > 0 && !(k.radius > knots[i - 1].radius)) {
                throw UsageError("RadialProfile: knot radii must be strictly increasing");
            }
        }
        ConnectionSpec s;
        s.kind_ = Kind::RadialProfile;
        s.d_ = d;
        s.radius_ = r_max;
        s.knots_ = std::move(knots);
        return s;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int dimension() const noexcept { return d_; }
    [[nodiscard]] double support_radius() const noexcept { return radius_; }
    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] const std::vector<ProfileKnot>& knots() const noexcept { return knots_; }

    [[nodiscard]] bool identically_zero() const noexcept
    {
        if (kind_ == Kind::BooleanDisk) {
            return p_ == 0.0;
        }
        return std::all_of(knots_.begin(), knots_.end(), [](const ProfileKnot& k) { return k.probability == 0.0; });
    }

    /// psi as a function of |x|.
    [[nodiscard]] double at_radius(double rho) const noexcept
    {
        if (rho > radius_) {
            return 0.0;
        }
        if (kind_ == Kind::BooleanDisk) {
            return p_;
        }
        if (rho <= knots_.front().radius) {
            return knots_.front().probability;
        }
        if (rho >= knots_.back().radius) {
            return knots_.back().probability;
        }
        const auto hi = std::upper_bound(knots_.begin(), knots_.end(), rho,
                                         [](double v, const ProfileKnot& k) { return v < k.radius; });
        const auto lo = hi - 1;
        const double w = (rho - lo->radius) / (hi->radius - lo->radius);
        return lo->probability + w * (hi->probability - lo->probability);
    }

    /// psi(x) given the squared length of x; avoids a sqrt for the disk kind.
    [[nodiscard]] double at_squared_radius(double rho2) const noexcept
    {
        if (rho2 > radius_ * radius_) {
            return 0.0;
        }
        if (kind_ == Kind::BooleanDisk) {
            return p_;
        }
        return at_radius(std::sqrt(rho2));
    }

    friend bool operator==(const ConnectionSpec&, const ConnectionSpec&) = default;

private:
    ConnectionSpec() = default;

    Kind kind_ = Kind::BooleanDisk;
    int d_ = 2;
    double p_ = 0.0;
    double radius_ = 1.0;
    std::vector<ProfileKnot> knots_;
};

/// psi(x) for a displacement vector x with psi.dimension() components.
inline double eval_connection(const ConnectionSpec& psi, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != psi.dimension()) {
        throw UsageError("eval_connection: displacement has dimension " + std::to_string(x.size()) +
                         ", connection function has dimension " + std::to_string(psi.dimension()));
    }
    return psi.at_radius(norm(x));
}

/// Surface area of the unit sphere S^{d-1}.
inline double unit_sphere_area(int d) { return d * ball_volume(d, 1.0); }

/// Integral of psi over R^d.
inline double integral_psi(const ConnectionSpec& psi)
{
    const int d = psi.dimension();
    if (psi.kind() == ConnectionSpec::Kind::BooleanDisk) {
        return psi.p() * ball_volume(d, psi.support_radius());
    }
    // S_{d-1} * int_0^R psi(rho) rho^{d-1} drho. On each linear piece the
    // integrand is a polynomial of degree <= d <= 4, so 3-point Gauss-Legendre
    // per piece is exact up to rounding.
    constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
    constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

    std::vector<double> breaks{0.0};
    for (const auto& k : psi.knots()) {
        if (k.radius > 0.0) {
            breaks.push_back(k.radius);
        }
    }
    if (breaks.back() < psi.support_radius()) {
        breaks.push_back(psi.support_radius());
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const double rho = mid + half * nodes[q];
            total += weights[q] * half * psi.at_radius(rho) * std::pow(rho, d - 1);
        }
    }
    return unit_sphere_area(d) * total;
}

} // namespace rcm
