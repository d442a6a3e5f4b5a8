#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <ostream>
#include <utility>
#include <vector>

#include "rcm/cell_list.hpp"
#include "rcm/connection.hpp"
#include "rcm/errors.hpp"
#include "rcm/random.hpp"
#include "rcm/sampler.hpp"
#include "rcm/union_find.hpp"

namespace rcm {

/// Whether the pair (a, b) carries an edge: |a - b| <= R and U_{a,b} < psi(a - b).
///
/// U is uniform on [0,1), so the strict comparison realizes probability psi exactly
/// and never connects a pair with psi = 0.
inline bool connected(const MarkedPoint& a, const MarkedPoint& b, const ConnectionSpec& psi,
                      const PairRandomSource& src)
{
    const double r2 = squared_distance(a.position, b.position, psi.dimension());
    const double prob = psi.at_squared_radius(r2);
    if (prob <= 0.0) {
        return false;
    }
    return src.uniform_unchecked(a.id.value, b.id.value) < prob;
}

/// The random connection graph realized on a point set.
class RealizedGraph {
public:
    using IndexEdge = std::pair<std::size_t, std::size_t>;

    RealizedGraph(std::shared_ptr<const PointSet> points, ConnectionSpec psi, PairRandomSource src,
                  std::vector<IndexEdge> edges)
        : points_(std::move(points)), psi_(std::move(psi)), src_(src), edges_(std::move(edges))
    {
        const std::size_t n = points_->size();
        offsets_.assign(n + 1, 0);
        for (const auto& [a, b] : edges_) {
            ++offsets_[a + 1];
            ++offsets_[b + 1];
        }
        for (std::size_t i = 0; i < n; ++i) {
            offsets_[i + 1] += offsets_[i];
        }
        adjacency_.resize(2 * edges_.size());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (const auto& [a, b] : edges_) {
            adjacency_[fill[a]++] = b;
            adjacency_[fill[b]++] = a;
        }
    }

    [[nodiscard]] const PointSet& point_set() const noexcept { return *points_; }
    [[nodiscard]] const std::vector<MarkedPoint>& points() const noexcept { return points_->points(); }
    [[nodiscard]] std::size_t vertex_count() const noexcept { return points_->size(); }
    [[nodiscard]] const ConnectionSpec& connection() const noexcept { return psi_; }
    [[nodiscard]] const PairRandomSource& source() const noexcept { return src_; }

    /// Edges as point-index pairs (smaller index first), in sorted order.
    [[nodiscard]] const std::vector<IndexEdge>& index_edges() const noexcept { return edges_; }

    /// Edges as id pairs (smaller id first), sorted.
    [[nodiscard]] std::vector<std::pair<PointId, PointId>> edges() const
    {
        std::vector<std::pair<PointId, PointId>> out;
        out.reserve(edges_.size());
        const auto& pts = points();
        for (const auto& [a, b] : edges_) {
            out.emplace_back(std::min(pts[a].id, pts[b].id), std::max(pts[a].id, pts[b].id));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] std::span<const std::size_t> neighbors(std::size_t i) const noexcept
    {
        return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    [[nodiscard]] std::size_t index_of(PointId id) const
    {
        const auto idx = points_->index_of(id);
        if (!idx) {
            throw UsageError("unknown point id " + std::to_string(id.value));
        }
        return *idx;
    }

private:
    std::shared_ptr<const PointSet> points_;
    ConnectionSpec psi_;
    PairRandomSource src_;
    std::vector<IndexEdge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> adjacency_;
};

inline RealizedGraph build_graph(std::shared_ptr<const PointSet> ps, const ConnectionSpec& psi,
                                 const PairRandomSource& src)
{
    if (ps->dimension() != psi.dimension()) {
        throw UsageError("build_graph: point set and connection function dimensions differ");
    }
    std::vector<RealizedGraph::IndexEdge> edges;
    if (!psi.identically_zero()) {
        const auto& pts = ps->points();
        const CellList cells(pts, ps->window(), psi.support_radius());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cells.for_each_candidate(pts[i].position, [&](std::size_t j) {
                if (j > i && connected(pts[i], pts[j], psi, src)) {
                    edges.emplace_back(i, j);
                }
            });
        }
        std::sort(edges.begin(), edges.end());
    }
    return RealizedGraph(std::move(ps), psi, src, std::move(edges));
}

inline RealizedGraph build_graph(const PointSet& ps, const ConnectionSpec& psi, const PairRandomSource& src)
{
    return build_graph(std::make_shared<const PointSet>(ps), psi, src);
}

/// Partition of the vertices into connected components.
///
/// Labels are 0..k-1, numbered in order of each component's smallest point index.
struct ClusterDecomposition {
    std::vector<std::size_t> label;
    std::vector<std::size_t> sizes;
    /// members[offsets[c] .. offsets[c+1]) are the point indices of component c, ascending.
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> members;

    [[nodiscard]] std::size_t component_count() const noexcept { return sizes.size(); }
    [[nodiscard]] std::span<const std::size_t> component(std::size_t c) const noexcept
    {
        return {members.data() + offsets[c], sizes[c]};
    }
};

inline ClusterDecomposition components(const RealizedGraph& g)
{
    const std::size_t n = g.vertex_count();
    UnionFind uf(n);
    for (const auto& [a, b] : g.index_edges()) {
        uf.unite(a, b);
    }
    ClusterDecomposition out;
    out.label.assign(n, 0);
    std::vector<std::size_t> label_of_root(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = uf.find(i);
        if (label_of_root[r] == n) {
            label_of_root[r] = out.sizes.size();
            out.sizes.push_back(0);
        }
        out.label[i] = label_of_root[r];
        ++out.sizes[out.label[i]];
    }
    out.offsets.assign(out.sizes.size() + 1, 0);
    for (std::size_t c = 0; c < out.sizes.size(); ++c) {
        out.offsets[c + 1] = out.offsets[c] + out.sizes[c];
    }
    out.members.resize(n);
    std::vector<std::size_t> fill(out.offsets.begin(), out.offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out.members[fill[out.label[i]]++] = i;
    }
    return out;
}

/// Point indices of the component containing `start`, in breadth-first order.
inline std::vector<std::size_t> bfs_component(const RealizedGraph& g, std::size_t start)
{
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<std::size_t> order{start};
    seen[start] = 1;
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (std::size_t nb : g.neighbors(order[head])) {
            if (!seen[nb]) {
                seen[nb] = 1;
                order.push_back(nb);
            }
        }
    }
    return order;
}

/// Ids of the component of `id`, sorted.
inline std::vector<PointId> cluster_of(const RealizedGraph& g, PointId id)
{
    const auto members = bfs_component(g, g.index_of(id));
    std::vector<PointId> out;
    out.reserve(members.size());
    for (std::size_t m : members) {
        out.push_back(g.points()[m].id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct LargestComponent {
    std::size_t size = 0;
    std::vector<PointId> members;
};

/// Largest component of the subgraph induced by the points inside `box`.
/// Ties go to the component containing the lexicographically largest position.
inline LargestComponent largest_component(const RealizedGraph& g, const BoxWindow& box)
{
    const auto& pts = g.points();
    const int d = g.point_set().dimension();
    const std::size_t n = pts.size();
    std::vector<char> inside(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        inside[i] = box.contains(pts[i].position) ? 1 : 0;
    }
    UnionFind uf(n);
    for (const auto& [a, b] : g.index_edges()) {
        if (inside[a] && inside[b]) {
            uf.unite(a, b);
        }
    }
    std::vector<std::size_t> size(n, 0);
    std::vector<std::size_t> top(n, n); // index of the lexicographically largest member
    for (std::size_t i = 0; i < n; ++i) {
        if (!inside[i]) {
            continue;
        }
        const std::size_t r = uf.find(i);
        ++size[r];
        if (top[r] == n || lexicographic_less(pts[top[r]].position, pts[i].position, d)) {
            top[r] = i;
        }
    }
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < n; ++r) {
        if (size[r] == 0) {
            continue;
        }
        if (!best || size[r] > size[*best] ||
            (size[r] == size[*best] && lexicographic_less(pts[top[*best]].position, pts[top[r]].position, d))) {
            best = r;
        }
    }
    LargestComponent out;
    if (!best) {
        return out;
    }
    out.size = size[*best];
    for (std::size_t i = 0; i < n; ++i) {
        if (inside[i] && uf.find(i) == *best) {
            out.members.push_back(pts[i].id);
        }
    }
    std::sort(out.members.begin(), out.members.end());
    return out;
}

/// o <-> complement of the closed box Λ_t centered at the origin point.
inline bool crossing_event(const RealizedGraph& g, PointId origin, double t)
{
    if (!(t > 0.0)) {
        throw UsageError("crossing_event: t must be positive");
    }
    const std::size_t o = g.index_of(origin);
    const auto& pts = g.points();
    const BoxWindow target(g.point_set().dimension(), t, pts[o].position);
    if (!g.point_set().window().contains(target.dilated(g.connection().support_radius()))) {
        throw UsageError("crossing_event: window must contain the box of side t + 2R around the origin");
    }
    for (std::size_t m : bfs_component(g, o)) {
        if (!target.contains(pts[m].position)) {
            return true;
        }
    }
    return false;
}

/// Λ_a <-> Λ_b^c, boxes centered at the window center.
inline bool box_crossing(const RealizedGraph& g, double a, double b)
{
    if (a > b) {
        throw UsageError("box_crossing: need a <= b");
    }
    if (a < 2.0) {
        throw UsageError("box_crossing: need a >= 2");
    }
    const auto& window = g.point_set().window();
    const int d = window.dimension();
    const BoxWindow inner(d, a, window.center());
    const BoxWindow outer(d, b, window.center());
    if (!window.contains(outer.dilated(g.connection().support_radius()))) {
        throw UsageError("box_crossing: window must contain the box of side b + 2R");
    }
    const auto dec = components(g);
    const auto& pts = g.points();
    std::vector<char> starts(dec.component_count(), 0);
    std::vector<char> escapes(dec.component_count(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (inner.contains(pts[i].position)) {
            starts[dec.label[i]] = 1;
        }
        if (!outer.contains(pts[i].position)) {
            escapes[dec.label[i]] = 1;
        }
    }
    for (std::size_t c = 0; c < dec.component_count(); ++c) {
        if (starts[c] && escapes[c]) {
            return true;
        }
    }
    return false;
}

/// Line-oriented text dump:
///   # rcm-graph d=<d> points=<n> edges=<m>
///   p <id> <x_1> ... <x_d> <mark>     (one line per point)
///   e <id> <id>                         (one line per edge, smaller id first)
/// Numbers use 17 significant digits.
inline void write_graph_dump(std::ostream& os, const RealizedGraph& g)
{
    const int d = g.point_set().dimension();
    const auto edges = g.edges();
    os << "# rcm-graph d=" << d << " points=" << g.vertex_count() << " edges=" << edges.size() << '\n';
    char buf[64];
    for (const auto& p : g.points()) {
        os << "p " << p.id.value;
        for (int k = 0; k < d; ++k) {
            std::snprintf(buf, sizeof buf, " %.17g", p.position[k]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, " %.17g", p.mark);
        os << buf << '\n';
    }
    for (const auto& [a, b] : edges) {
        os << "e " << a.value << ' ' << b.value << '\n';
    }
}

} // namespace rcm
