#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcm/explorer.hpp"
#include "rcm/graph.hpp"
#include "rcm/sampler.hpp"
#include "rcm/stats.hpp"
#include "rcm/theta.hpp"
#include "support/reference.hpp"

using namespace rcm;

namespace {

MarkedPoint sampled(std::int64_t id, Point x, double mark = 0.5) { return MarkedPoint{PointId{id}, x, mark}; }

ConnectionSpec random_connection(std::mt19937_64& gen, int d)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = std::vector<double>{0.5, 1.0, 1.7}[gen() % 3];
    if (gen() % 2 == 0) {
        return ConnectionSpec::boolean_disk(d, 0.2 + 0.8 * unit(gen), radius);
    }
    return ConnectionSpec::radial_profile(d, {{0.3 * radius, 0.9}, {0.8 * radius, 0.3 * unit(gen)}}, radius);
}

} // namespace

TEST(BuildGraph, MatchesBruteForceAndBfsOn500Instances)
{
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int inst = 0; inst < 500; ++inst) {
        const int d = 1 + inst % 3;
        const auto psi = random_connection(gen, d);
        const double lambda = 0.5 + 2.5 * unit(gen);
        const double expected_n = 40.0 + 160.0 * unit(gen);
        const double side = std::pow(expected_n / lambda, 1.0 / d);
        const auto ps = sample_poisson(BoxWindow(d, side, Point{unit(gen), -unit(gen), 0.0, 0.0}), lambda,
                                       child_seed(77, inst));
        ASSERT_LE(ps.size(), 300U) << "instance " << inst;
        const PairRandomSource src(child_seed(78, inst));
        const auto g = build_graph(ps, psi, src);
        const auto brute = ref::brute_force_edges(ps, psi, src);
        ASSERT_EQ(g.edges(), brute) << "instance " << inst;

        const auto cd = components(g);
        const auto bfs = ref::bfs_partition(ps, brute);
        ASSERT_EQ(ref::partition_of(g, cd), bfs) << "instance " << inst;

        if (ps.size() > 0) {
            const auto& probe = ps.points()[gen() % ps.size()];
            std::set<std::int64_t> expected;
            for (const auto& comp : bfs) {
                if (comp.contains(probe.id.value)) {
                    expected = comp;
                }
            }
            std::set<std::int64_t> got;
            for (auto id : cluster_of(g, probe.id)) {
                got.insert(id.value);
            }
            ASSERT_EQ(got, expected) << "instance " << inst;
        }
    }
}

TEST(BuildGraph, ZeroConnectionHasNoEdges)
{
    const auto ps = sample_poisson(BoxWindow::centered(2, 8.0), 3.0, 1);
    EXPECT_TRUE(build_graph(ps, ConnectionSpec::zero(2), PairRandomSource(1)).edges().empty());
}

TEST(BuildGraph, DeterministicDiskGivesOneEdge)
{
    const PointSet ps(BoxWindow::centered(2, 4.0), 1.0, {sampled(1, {0.0, 0.0}), sampled(2, {0.5, 0.0})});
    const auto g = build_graph(ps, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(3));
    ASSERT_EQ(g.edges().size(), 1U);
    EXPECT_EQ(g.edges()[0].first, PointId{1});
    EXPECT_EQ(g.edges()[0].second, PointId{2});
}

TEST(BuildGraph, DimensionMismatchIsUsageError)
{
    const auto ps = sample_poisson(BoxWindow::centered(2, 4.0), 1.0, 1);
    EXPECT_THROW((void)build_graph(ps, ConnectionSpec::boolean_disk(3, 0.5), PairRandomSource(1)), UsageError);
}

TEST(Components, EmptyEdgeListGivesSingletons)
{
    const auto ps = sample_poisson(BoxWindow::centered(2, 5.0), 2.0, 4);
    const auto cd = components(build_graph(ps, ConnectionSpec::zero(2), PairRandomSource(1)));
    EXPECT_EQ(cd.component_count(), ps.size());
    for (auto s : cd.sizes) {
        EXPECT_EQ(s, 1U);
    }
}

TEST(Components, PathOfFivePoints)
{
    std::vector<MarkedPoint> pts;
    for (int i = 0; i < 5; ++i) {
        pts.push_back(sampled(i + 1, {0.9 * i, 0.0}));
    }
    const PointSet ps(BoxWindow::centered(2, 10.0), 1.0, pts);
    const auto cd = components(build_graph(ps, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(5)));
    ASSERT_EQ(cd.component_count(), 1U);
    EXPECT_EQ(cd.sizes[0], 5U);
}

TEST(Components, PartitionInvariants)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto ps = sample_poisson(BoxWindow::centered(2, 12.0), 1.5, seed);
        const auto g = build_graph(ps, ConnectionSpec::boolean_disk(2, 0.5), PairRandomSource(seed));
        const auto cd = components(g);
        std::size_t total = 0;
        for (auto s : cd.sizes) {
            total += s;
        }
        EXPECT_EQ(total, ps.size());
        for (const auto& [a, b] : g.index_edges()) {
            EXPECT_EQ(cd.label[a], cd.label[b]);
        }
    }
}

TEST(ClusterOf, IsolatedOriginAndPairs)
{
    const PointSet lone(BoxWindow::centered(2, 4.0), 1.0, {MarkedPoint{PointId{-1}, Point{}, 0.0}});
    const auto g = build_graph(lone, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1));
    EXPECT_EQ(cluster_of(g, PointId{-1}), std::vector<PointId>{PointId{-1}});

    const PointSet pair(BoxWindow::centered(2, 4.0), 1.0, {sampled(4, {0.0, 0.0}), sampled(9, {0.0, 0.6})});
    const auto h = build_graph(pair, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1));
    const std::vector<PointId> both{PointId{4}, PointId{9}};
    EXPECT_EQ(cluster_of(h, PointId{4}), both);
    EXPECT_EQ(cluster_of(h, PointId{9}), both);
    EXPECT_THROW((void)cluster_of(h, PointId{5}), UsageError);
}

TEST(LargestComponent, EmptyAndSingle)
{
    const PointSet empty(BoxWindow::centered(2, 4.0), 1.0, {});
    const auto g0 = build_graph(empty, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1));
    const auto lc0 = largest_component(g0, empty.window());
    EXPECT_EQ(lc0.size, 0U);
    EXPECT_TRUE(lc0.members.empty());

    const PointSet tri(BoxWindow::centered(2, 4.0), 1.0,
                       {sampled(1, {0.0, 0.0}), sampled(2, {0.5, 0.0}), sampled(3, {0.5, 0.5})});
    const auto lc = largest_component(build_graph(tri, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1)),
                                      tri.window());
    EXPECT_EQ(lc.size, 3U);
}

TEST(LargestComponent, TieBreakOnConstructedCases)
{
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> coord(-20.0, 20.0);
    const auto psi = ConnectionSpec::boolean_disk(2, 1.0);
    for (int c = 0; c < 100; ++c) {
        const int k = 1 + c % 5;
        const bool vertical = c % 2 == 0;
        // Two chains of k points, spacing 0.5, far apart; vertical chains share an x coordinate.
        Point a{coord(gen), coord(gen)};
        Point b = vertical ? Point{a[0], a[1] + 8.0 + 5.0 * (c % 3)} : Point{coord(gen), coord(gen)};
        if (!vertical && std::hypot(a[0] - b[0], a[1] - b[1]) < 6.0) {
            b[0] += 12.0;
        }
        std::vector<MarkedPoint> pts;
        std::int64_t id = 1;
        Point max_a = a;
        Point max_b = b;
        for (int i = 0; i < k; ++i) {
            Point pa = a;
            Point pb = b;
            pa[vertical ? 1 : 0] += 0.5 * i;
            pb[vertical ? 1 : 0] -= 0.5 * i;
            pts.push_back(sampled(id++, pa));
            pts.push_back(sampled(id++, pb));
            max_a = std::max(max_a, pa, [](const Point& x, const Point& y) { return lexicographic_less(x, y, 2); });
            max_b = std::max(max_b, pb, [](const Point& x, const Point& y) { return lexicographic_less(x, y, 2); });
        }
        // shuffle the insertion order so the answer cannot depend on it
        std::shuffle(pts.begin(), pts.end(), gen);
        const PointSet ps(BoxWindow::centered(2, 100.0), 1.0, pts);
        const auto g = build_graph(ps, psi, PairRandomSource(c));
        const auto lc = largest_component(g, ps.window());
        ASSERT_EQ(lc.size, static_cast<std::size_t>(k));
        const Point winner_max = lexicographic_less(max_a, max_b, 2) ? max_b : max_a;
        bool found = false;
        for (auto m : lc.members) {
            found = found || ps.points()[*ps.index_of(m)].position == winner_max;
        }
        EXPECT_TRUE(found) << "case " << c;
    }
}

TEST(LargestComponent, RestrictedToBox)
{
    // Chain at x = -2.0, -1.1, ..., 2.5; the centered box of side 3 keeps ids 2..4 only.
    std::vector<MarkedPoint> pts;
    for (int i = 0; i < 6; ++i) {
        pts.push_back(sampled(i + 1, {0.9 * i - 2.0, 0.0}));
    }
    const PointSet ps(BoxWindow::centered(2, 12.0), 1.0, pts);
    const auto g = build_graph(ps, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(2));
    EXPECT_EQ(largest_component(g, ps.window()).size, 6U);
    const auto lc = largest_component(g, BoxWindow::centered(2, 3.0));
    EXPECT_EQ(lc.size, 3U);
    EXPECT_EQ(lc.members, (std::vector<PointId>{PointId{2}, PointId{3}, PointId{4}}));
}

TEST(CrossingEvent, ZeroConnectionNeverCrosses)
{
    auto ps = sample_poisson(BoxWindow::centered(2, 10.0), 2.0, 3);
    ps = insert_point(ps, Point{});
    const auto g = build_graph(ps, ConnectionSpec::zero(2), PairRandomSource(4));
    for (double t : {0.5, 2.0, 7.0}) {
        EXPECT_FALSE(crossing_event(g, PointId{-1}, t));
    }
}

TEST(CrossingEvent, DeterministicChainCrosses)
{
    std::vector<MarkedPoint> pts{MarkedPoint{PointId{-1}, Point{}, 0.0}};
    for (int i = 1; i <= 6; ++i) {
        pts.push_back(sampled(i, {0.9 * i, 0.0}));
    }
    const PointSet ps(BoxWindow::centered(2, 14.0), 1.0, pts);
    const auto g = build_graph(ps, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1));
    EXPECT_TRUE(crossing_event(g, PointId{-1}, 8.0));
    EXPECT_TRUE(crossing_event(g, PointId{-1}, 10.7));
    EXPECT_FALSE(crossing_event(g, PointId{-1}, 10.8)) << "last point at 5.4 lies on the boundary";
}

TEST(CrossingEvent, SmallWindowRejected)
{
    const PointSet ps(BoxWindow::centered(2, 5.0), 1.0, {MarkedPoint{PointId{-1}, Point{}, 0.0}});
    const auto g = build_graph(ps, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1));
    EXPECT_NO_THROW((void)crossing_event(g, PointId{-1}, 3.0));
    EXPECT_THROW((void)crossing_event(g, PointId{-1}, 3.5), UsageError);
}

TEST(CrossingEvent, MonotoneInLambdaUnderCoupling)
{
    const auto psi = ConnectionSpec::boolean_disk(2, 0.35);
    const double t = 4.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto base = sample_poisson(BoxWindow::centered(2, t + 2.0), 3.0, seed);
        const PairRandomSource src(child_seed(seed, 1));
        bool prev = false;
        for (int i = 0; i < 10; ++i) {
            const double lambda = 0.3 * (i + 1);
            const auto g = build_graph(insert_point(restrict(base, lambda), Point{}), psi, src);
            const bool hit = crossing_event(g, PointId{-1}, t);
            EXPECT_TRUE(!prev || hit) << "seed " << seed << " lambda " << lambda;
            prev = hit;
        }
    }
}

TEST(BoxCrossing, ArgumentChecks)
{
    const PointSet ps(BoxWindow::centered(2, 20.0), 1.0, {});
    const auto g = build_graph(ps, ConnectionSpec::zero(2), PairRandomSource(1));
    EXPECT_THROW((void)box_crossing(g, 5.0, 4.0), UsageError);
    EXPECT_THROW((void)box_crossing(g, 1.0, 4.0), UsageError);
    EXPECT_THROW((void)box_crossing(g, 4.0, 19.0), UsageError);
    EXPECT_FALSE(box_crossing(g, 2.0, 10.0));
}

TEST(BoxCrossing, EqualBoxesMatchClusterTouchingComplement)
{
    const auto psi = ConnectionSpec::boolean_disk(2, 0.6);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto ps = sample_poisson(BoxWindow::centered(2, 8.0), 1.5, seed);
        const auto g = build_graph(ps, psi, PairRandomSource(seed));
        const auto cd = components(g);
        const BoxWindow box = BoxWindow::centered(2, 4.0);
        bool expected = false;
        for (std::size_t c = 0; c < cd.component_count(); ++c) {
            bool in = false;
            bool out = false;
            for (auto i : cd.component(c)) {
                (box.contains(g.points()[i].position) ? in : out) = true;
            }
            expected = expected || (in && out);
        }
        EXPECT_EQ(box_crossing(g, 4.0, 4.0), expected);
    }
}

TEST(BoxCrossing, FrequencyDecaysWithGap)
{
    const auto psi = ConnectionSpec::boolean_disk(2, 0.35);
    const std::vector<double> bs{4.0, 6.0, 8.0, 10.0};
    const int reps = 3000;
    std::vector<int> hits(bs.size(), 0);
    for (int r = 0; r < reps; ++r) {
        const auto ps = sample_poisson(BoxWindow::centered(2, 12.0), 1.0, child_seed(31, r));
        const auto g = build_graph(ps, psi, PairRandomSource(child_seed(32, r)));
        for (std::size_t k = 0; k < bs.size(); ++k) {
            hits[k] += box_crossing(g, 2.0, bs[k]) ? 1 : 0;
        }
    }
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    for (std::size_t k = 0; k < bs.size(); ++k) {
        ASSERT_GT(hits[k], 0);
        const double f = static_cast<double>(hits[k]) / reps;
        x.push_back(bs[k] - 2.0);
        y.push_back(std::log(f));
        w.push_back(reps * f / (1.0 - f));
    }
    const auto fit = weighted_line_fit(x, y, w);
    EXPECT_LT(fit.slope + kZ95 * fit.slope_se, 0.0) << "slope " << fit.slope;
}

TEST(Coupling, ComponentsNestAcrossLambda)
{
    const auto psi = ConnectionSpec::boolean_disk(2, 0.35);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto base = sample_poisson(BoxWindow::centered(2, 10.0), 2.0, seed);
        const PairRandomSource src(child_seed(seed, 5));
        const auto lo = build_graph(restrict(base, 0.8), psi, src);
        const auto hi = build_graph(restrict(base, 1.6), psi, src);
        const auto cd_lo = components(lo);
        const auto cd_hi = components(hi);
        for (std::size_t c = 0; c < cd_lo.component_count(); ++c) {
            std::set<std::size_t> labels;
            for (auto i : cd_lo.component(c)) {
                labels.insert(cd_hi.label[hi.index_of(lo.points()[i].id)]);
            }
            EXPECT_EQ(labels.size(), 1U) << "seed " << seed;
        }
    }
}

TEST(Explorer, AgreesWithEagerGraphCluster)
{
    const auto psi = ConnectionSpec::boolean_disk(2, 0.5);
    const auto window = BoxWindow::centered(2, 14.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto seeds = ReplicationSeeds::of(seed, 0);
        const auto ps = insert_point(sample_poisson(window, 1.2, seeds.points), Point{});
        const auto g = build_graph(ps, psi, PairRandomSource(seeds.edges));
        LazyPoissonField field(window, 1.2, seeds.points);
        const MarkedPoint origin = forced_point(1, Point{});
        const auto members = explore_cluster(field, std::span<const MarkedPoint>(&origin, 1), psi,
                                             PairRandomSource(seeds.edges), [](const MarkedPoint&) { return true; },
                                             [](const MarkedPoint&) { return true; });
        std::vector<PointId> got;
        for (const auto& m : members) {
            got.push_back(m.id);
        }
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, cluster_of(g, PointId{-1})) << "seed " << seed;
    }
}

TEST(Explorer, ThetaEventMatchesEagerCrossing)
{
    const auto psi = ConnectionSpec::boolean_disk(2, 0.35);
    const double t = 4.0;
    int agree = 0;
    for (std::uint64_t r = 0; r < 300; ++r) {
        const auto seeds = ReplicationSeeds::of(8, r);
        const auto ps = insert_point(sample_poisson(BoxWindow::centered(2, t + 2.0), 1.0, seeds.points), Point{});
        const auto g = build_graph(ps, psi, PairRandomSource(seeds.edges));
        agree += crossing_event(g, PointId{-1}, t) == theta_event(1.0, t, psi, seeds) ? 1 : 0;
    }
    EXPECT_EQ(agree, 300);
}

TEST(GraphDump, FormatAndRoundTrip)
{
    const PointSet ps(BoxWindow::centered(2, 4.0), 1.0,
                      {MarkedPoint{PointId{-1}, Point{}, 0.0}, sampled(3, {0.1234567890123, -0.5}, 0.25)});
    const auto g = build_graph(ps, ConnectionSpec::boolean_disk(2, 1.0), PairRandomSource(1));
    std::ostringstream os;
    write_graph_dump(os, g);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# rcm-graph d=2 points=2 edges=1");
    int points = 0;
    int edges = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "p") {
            long long id = 0;
            double x = 0.0;
            double y = 0.0;
            double mark = 0.0;
            ls >> id >> x >> y >> mark;
            const auto& p = ps.points()[*ps.index_of(PointId{id})];
            EXPECT_EQ(x, p.position[0]);
            EXPECT_EQ(y, p.position[1]);
            EXPECT_EQ(mark, p.mark);
            ++points;
        } else if (tag == "e") {
            long long a = 0;
            long long b = 0;
            ls >> a >> b;
            EXPECT_EQ(a, -1);
            EXPECT_EQ(b, 3);
            ++edges;
        }
    }
    EXPECT_EQ(points, 2);
    EXPECT_EQ(edges, 1);
}
