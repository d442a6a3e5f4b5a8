#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rcm/connection.hpp"
#include "rcm/geometry.hpp"

namespace rcm {

/// A thinning function f: R^d -> [0,1] with bounded support.
///
/// Every spec carries an explicit support bound; the function is zero outside it.
///   Zero             f = 0
///   ConstOnBox(c,B)  f = c on B
///   RadialRamp(a,b)  f = 1 for |x| <= a, linear down to 0 at |x| = b
///   Avoidance(A)     f(x) = prod_{z in A} (1 - psi(z - x)), the probability that
///                    x has no direct edge to A; truncated to the declared bound
///                    (default: bounding box of A dilated by the support radius R)
class ThinningFunctionSpec {
public:
    enum class Kind { Zero, ConstOnBox, RadialRamp, Avoidance };

    static ThinningFunctionSpec zero(int d) { return ThinningFunctionSpec(Kind::Zero, BoxWindow::centered(d, 1.0)); }

    static ThinningFunctionSpec const_on_box(double c, const BoxWindow& box)
    {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw UsageError("ConstOnBox: level must lie in [0,1]");
        }
        ThinningFunctionSpec f(Kind::ConstOnBox, box);
        f.level_ = c;
        return f;
    }

    static ThinningFunctionSpec radial_ramp(int d, double inner, double outer)
    {
        if (!(inner >= 0.0) || !(outer > inner) || !std::isfinite(outer)) {
            throw UsageError("RadialRamp: need 0 <= inner < outer < inf");
        }
        ThinningFunctionSpec f(Kind::RadialRamp, BoxWindow::centered(d, 2.0 * outer));
        f.inner_ = inner;
        f.outer_ = outer;
        return f;
    }

    static ThinningFunctionSpec avoidance(ConnectionSpec psi, std::vector<Point> anchors,
                                          std::optional<BoxWindow> bound = std::nullopt)
    {
        const int d = psi.dimension();
        if (!bound) {
            if (anchors.empty()) {
                throw UsageError("Avoidance: empty anchor set needs an explicit support bound");
            }
            Point lo = anchors.front();
            Point hi = anchors.front();
            for (const auto& a : anchors) {
                for (int k = 0; k < d; ++k) {
                    lo[k] = std::min(lo[k], a[k]);
                    hi[k] = std::max(hi[k], a[k]);
                }
            }
            double side = 0.0;
            Point center{};
            for (int k = 0; k < d; ++k) {
                side = std::max(side, hi[k] - lo[k]);
                center[k] = 0.5 * (lo[k] + hi[k]);
            }
            bound = BoxWindow(d, side + 2.0 * psi.support_radius(), center);
        }
        if (bound->dimension() != d) {
            throw UsageError("Avoidance: support bound dimension differs from psi");
        }
        ThinningFunctionSpec f(Kind::Avoidance, *bound);
        f.psi_ = std::move(psi);
        f.anchors_ = std::move(anchors);
        return f;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int dimension() const noexcept { return support_.dimension(); }
    [[nodiscard]] const BoxWindow& support() const noexcept { return support_; }
    [[nodiscard]] double level() const noexcept { return level_; }
    [[nodiscard]] double inner() const noexcept { return inner_; }
    [[nodiscard]] double outer() const noexcept { return outer_; }
    [[nodiscard]] const std::vector<Point>& anchors() const noexcept { return anchors_; }
    [[nodiscard]] const std::optional<ConnectionSpec>& connection() const noexcept { return psi_; }

    [[nodiscard]] double operator()(const Point& x) const
    {
        if (!support_.contains(x)) {
            return 0.0;
        }
        const int d = dimension();
        switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::ConstOnBox: return level_;
        case Kind::RadialRamp: {
            const double rho = std::sqrt(squared_distance(x, Point{}, d));
            if (rho <= inner_) {
                return 1.0;
            }
            if (rho >= outer_) {
                return 0.0;
            }
            return (outer_ - rho) / (outer_ - inner_);
        }
        case Kind::Avoidance: {
            double v = 1.0;
            for (const auto& z : anchors_) {
                v *= 1.0 - psi_->at_squared_radius(squared_distance(z, x, d));
            }
            return v;
        }
        }
        return 0.0;
    }

private:
    ThinningFunctionSpec(Kind kind, BoxWindow support) : kind_(kind), support_(support) {}

    Kind kind_;
    BoxWindow support_;
    double level_ = 0.0;
    double inner_ = 0.0;
    double outer_ = 0.0;
    std::optional<ConnectionSpec> psi_;
    std::vector<Point> anchors_;
};

inline double eval_thinning(const ThinningFunctionSpec& f, const Point& x) { return f(x); }

} // namespace rcm
