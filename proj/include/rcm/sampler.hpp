#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcm/errors.hpp"
#include "rcm/geometry.hpp"
#include "rcm/random.hpp"
#include "rcm/thinning.hpp"

namespace rcm {

struct MarkedPoint {
    PointId id;
    Point position{};
    /// Intensity mark. Sampled points have marks in (0, lambda_max]; forced points carry 0.
    double mark = 0.0;

    [[nodiscard]] bool forced() const noexcept { return id.forced(); }
    friend bool operator==(const MarkedPoint&, const MarkedPoint&) = default;
};

/// Integer coordinates of a unit cell [k, k+1)^d of the sampling lattice.
using CellCoord = std::array<std::int64_t, kMaxDim>;

namespace detail {

inline constexpr int kArrivalBits = 15;
inline constexpr int kCellBits = 48;

inline int bits_per_axis(int d) { return kCellBits / d; }

/// Packs cell coordinates into kCellBits bits (offset binary per axis).
inline std::uint64_t pack_cell(const CellCoord& c, int d)
{
    const int b = bits_per_axis(d);
    const std::int64_t bias = std::int64_t{1} << (b - 1);
    std::uint64_t key = 0;
    for (int k = 0; k < d; ++k) {
        const std::int64_t v = c[k] + bias;
        if (v < 0 || v >= 2 * bias) {
            throw UsageError("sampling lattice: cell coordinate " + std::to_string(c[k]) +
                             " out of range for dimension " + std::to_string(d));
        }
        key |= static_cast<std::uint64_t>(v) << (b * k);
    }
    return key;
}

} // namespace detail

/// Appends the points of one unit cell to `out`.
///
/// Each cell runs its own SplitMix64 stream seeded by mix64(mix64(seed) ^ mix64(cell key)).
/// Marks are the arrival times of a unit-rate Poisson process on [0, inf), so the
/// points with mark <= lambda form a Poisson process of intensity lambda for any
/// lambda <= lambda_max, and the content of a cell does not depend on lambda_max
/// beyond truncation. Ids are (cell key << 15) | arrival index.
inline void sample_cell(int d, double lambda_max, std::uint64_t seed, const CellCoord& cell,
                        std::vector<MarkedPoint>& out)
{
    const std::uint64_t key = detail::pack_cell(cell, d);
    SplitMix64 eng(mix64(mix64(seed) ^ mix64(key + 0xA5A5A5A5A5A5A5A5ULL)));
    double mark = 0.0;
    for (std::uint64_t arrival = 0;; ++arrival) {
        mark += standard_exponential(eng);
        if (mark > lambda_max) {
            return;
        }
        if (arrival >= (std::uint64_t{1} << detail::kArrivalBits)) {
            throw UsageError("sample_cell: intensity too large for the id layout");
        }
        MarkedPoint p;
        p.id = PointId{static_cast<std::int64_t>((key << detail::kArrivalBits) | arrival)};
        for (int k = 0; k < d; ++k) {
            p.position[k] = static_cast<double>(cell[k]) + uniform01(eng);
        }
        p.mark = mark;
        out.push_back(p);
    }
}

inline CellCoord cell_of(const Point& x, int d)
{
    CellCoord c{};
    for (int k = 0; k < d; ++k) {
        c[k] = static_cast<std::int64_t>(std::floor(x[k]));
    }
    return c;
}

/// Calls fn(cell) for every lattice cell meeting the closed box, in lexicographic order.
template <class Fn>
void for_each_cell(const BoxWindow& w, Fn&& fn)
{
    const int d = w.dimension();
    CellCoord lo{};
    CellCoord hi{};
    for (int k = 0; k < d; ++k) {
        lo[k] = static_cast<std::int64_t>(std::floor(w.lower(k)));
        hi[k] = static_cast<std::int64_t>(std::floor(w.upper(k)));
    }
    CellCoord c = lo;
    for (;;) {
        fn(static_cast<const CellCoord&>(c));
        int k = d - 1;
        while (k >= 0 && c[k] == hi[k]) {
            c[k] = lo[k];
            --k;
        }
        if (k < 0) {
            return;
        }
        ++c[k];
    }
}

/// A finite configuration of marked points inside a window.
class PointSet {
public:
    PointSet(BoxWindow window, double lambda_max, std::vector<MarkedPoint> points)
        : window_(window), lambda_max_(lambda_max), points_(std::move(points))
    {
        if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
            throw UsageError("PointSet: lambda_max must be finite and non-negative");
        }
        std::vector<std::int64_t> ids;
        ids.reserve(points_.size());
        for (const auto& p : points_) {
            if (!window_.contains(p.position)) {
                throw UsageError("PointSet: point outside window");
            }
            if (p.forced() ? p.mark != 0.0 : !(p.mark > 0.0 && p.mark <= lambda_max)) {
                throw UsageError("PointSet: mark out of range");
            }
            ids.push_back(p.id.value);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
            throw UsageError("PointSet: duplicate point id");
        }
    }

    [[nodiscard]] int dimension() const noexcept { return window_.dimension(); }
    [[nodiscard]] const BoxWindow& window() const noexcept { return window_; }
    [[nodiscard]] double lambda_max() const noexcept { return lambda_max_; }
    [[nodiscard]] const std::vector<MarkedPoint>& points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

    [[nodiscard]] std::size_t forced_count() const noexcept
    {
        return static_cast<std::size_t>(
            std::count_if(points_.begin(), points_.end(), [](const MarkedPoint& p) { return p.forced(); }));
    }

    [[nodiscard]] std::optional<std::size_t> index_of(PointId id) const noexcept
    {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (points_[i].id == id) {
                return i;
            }
        }
        return std::nullopt;
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    BoxWindow window_;
    double lambda_max_;
    std::vector<MarkedPoint> points_;
};

/// Homogeneous Poisson process of intensity lambda_max on the window, with intensity marks.
inline PointSet sample_poisson(const BoxWindow& window, double lambda_max, std::uint64_t seed)
{
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
        throw UsageError("sample_poisson: lambda_max must be finite and non-negative");
    }
    std::vector<MarkedPoint> pts;
    if (lambda_max > 0.0) {
        std::vector<MarkedPoint> cell_pts;
        const int d = window.dimension();
        for_each_cell(window, [&](const CellCoord& c) {
            cell_pts.clear();
            sample_cell(d, lambda_max, seed, c, cell_pts);
            for (const auto& p : cell_pts) {
                if (window.contains(p.position)) {
                    pts.push_back(p);
                }
            }
        });
    }
    return PointSet(window, lambda_max, std::move(pts));
}

/// Points with mark <= lambda, plus every forced point.
inline PointSet restrict(const PointSet& ps, double lambda)
{
    if (!(lambda >= 0.0) || lambda > ps.lambda_max()) {
        throw UsageError("restrict: lambda must lie in [0, lambda_max]");
    }
    std::vector<MarkedPoint> kept;
    kept.reserve(ps.size());
    for (const auto& p : ps.points()) {
        if (p.forced() || p.mark <= lambda) {
            kept.push_back(p);
        }
    }
    return PointSet(ps.window(), lambda, std::move(kept));
}

/// One point survives the f-thinning at intensity lambda iff mark/lambda <= f(x).
inline bool survives_thinning(const MarkedPoint& p, const ThinningFunctionSpec& f, double lambda)
{
    return p.forced() || p.mark / lambda <= f(p.position);
}

/// f-thinning using U_x = mark/lambda. Forced points are always kept.
inline PointSet thin(const PointSet& ps, const ThinningFunctionSpec& f, double lambda)
{
    if (!(lambda > 0.0)) {
        throw UsageError("thin: lambda must be positive");
    }
    if (f.dimension() != ps.dimension()) {
        throw UsageError("thin: thinning function dimension differs from point set");
    }
    std::vector<MarkedPoint> kept;
    for (const auto& p : ps.points()) {
        if (!p.forced() && p.mark > lambda) {
            throw UsageError("thin: point set is not restricted to intensity lambda");
        }
        if (survives_thinning(p, f, lambda)) {
            kept.push_back(p);
        }
    }
    return PointSet(ps.window(), ps.lambda_max(), std::move(kept));
}

/// Id the next forced point in `ps` will receive.
inline PointId next_forced_id(const PointSet& ps) noexcept
{
    std::int64_t lowest = 0;
    for (const auto& p : ps.points()) {
        lowest = std::min(lowest, p.id.value);
    }
    return PointId{lowest - 1};
}

/// Adds a forced point (mark 0, fresh reserved id) at `position`.
inline PointSet insert_point(const PointSet& ps, const Point& position)
{
    std::vector<MarkedPoint> pts = ps.points();
    MarkedPoint p;
    p.id = next_forced_id(ps);
    p.position = position;
    for (int k = ps.dimension(); k < kMaxDim; ++k) {
        p.position[k] = 0.0;
    }
    pts.push_back(p);
    return PointSet(ps.window(), ps.lambda_max(), std::move(pts));
}

} // namespace rcm
