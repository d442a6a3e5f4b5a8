#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rcm/geometry.hpp"
#include "rcm/sampler.hpp"

namespace rcm {

/// Uniform grid over a window with cell side exactly `cell_side`, points binned
/// in compressed-row form. Any two points within distance cell_side lie in the
/// same or adjacent cells, so a 3^d scan finds every candidate pair.
class CellList {
public:
    CellList(const std::vector<MarkedPoint>& points, const BoxWindow& window, double cell_side)
        : d_(window.dimension()), side_(cell_side)
    {
        std::size_t total = 1;
        for (int k = 0; k < d_; ++k) {
            origin_[k] = window.lower(k);
            counts_[k] = static_cast<std::size_t>(std::floor(window.side() / cell_side)) + 1;
            total *= counts_[k];
        }
        std::vector<std::size_t> cell_of_point(points.size());
        offsets_.assign(total + 1, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            cell_of_point[i] = linear(coords_of(points[i].position));
            ++offsets_[cell_of_point[i] + 1];
        }
        for (std::size_t c = 0; c < total; ++c) {
            offsets_[c + 1] += offsets_[c];
        }
        members_.resize(points.size());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < points.size(); ++i) {
            members_[fill[cell_of_point[i]]++] = i;
        }
    }

    [[nodiscard]] double cell_side() const noexcept { return side_; }

    /// Calls fn(j) for every point index j in the cells adjacent to (or equal to) the cell of x.
    template <class Fn>
    void for_each_candidate(const Point& x, Fn&& fn) const
    {
        const auto c = coords_of(x);
        std::array<std::ptrdiff_t, kMaxDim> lo{};
        std::array<std::ptrdiff_t, kMaxDim> hi{};
        for (int k = 0; k < d_; ++k) {
            lo[k] = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(c[k]) - 1);
            hi[k] = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(counts_[k]) - 1,
                                             static_cast<std::ptrdiff_t>(c[k]) + 1);
        }
        std::array<std::ptrdiff_t, kMaxDim> cur = lo;
        for (;;) {
            std::size_t lin = 0;
            for (int k = 0; k < d_; ++k) {
                lin = lin * counts_[k] + static_cast<std::size_t>(cur[k]);
            }
            for (std::size_t m = offsets_[lin]; m < offsets_[lin + 1]; ++m) {
                fn(members_[m]);
            }
            int k = d_ - 1;
            while (k >= 0 && cur[k] == hi[k]) {
                cur[k] = lo[k];
                --k;
            }
            if (k < 0) {
                return;
            }
            ++cur[k];
        }
    }

private:
    [[nodiscard]] std::array<std::size_t, kMaxDim> coords_of(const Point& x) const noexcept
    {
        std::array<std::size_t, kMaxDim> c{};
        for (int k = 0; k < d_; ++k) {
            const double rel = std::floor((x[k] - origin_[k]) / side_);
            c[k] = std::min(counts_[k] - 1, static_cast<std::size_t>(std::max(0.0, rel)));
        }
        return c;
    }

    [[nodiscard]] std::size_t linear(const std::array<std::size_t, kMaxDim>& c) const noexcept
    {
        std::size_t lin = 0;
        for (int k = 0; k < d_; ++k) {
            lin = lin * counts_[k] + c[k];
        }
        return lin;
    }

    int d_;
    double side_;
    Point origin_{};
    std::array<std::size_t, kMaxDim> counts_{};
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> members_;
};

} // namespace rcm
