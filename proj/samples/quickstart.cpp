// Samples one RCM realization, prints its component structure, then estimates
// a theta_t value and the isolation probability against the closed form.

#include <cstdio>

#include "rcm/rcm.hpp"

int main()
{
    using namespace rcm;
    const ConnectionSpec psi = ConnectionSpec::boolean_disk(2, 0.35, 1.0);
    const double lambda = 1.0;

    const BoxWindow window = BoxWindow::centered(2, 20.0);
    const PointSet points = sample_poisson(window, lambda, 42);
    const RealizedGraph graph = build_graph(points, psi, PairRandomSource(child_seed(42, 1)));
    const ClusterDecomposition cd = components(graph);
    std::printf("points %zu, edges %zu, components %zu, largest %zu\n", points.size(), graph.edges().size(),
                cd.component_count(), largest_component(graph, window).size);

    const ThetaEstimate theta = estimate_theta(lambda, 4.0, psi, 20000, 7);
    std::printf("theta_4(%.1f) = %.4f  95%% [%.4f, %.4f]\n", lambda, theta.estimate, theta.wilson95.lo,
                theta.wilson95.hi);

    const TailDistribution tail = estimate_cluster_tail(lambda, psi, 20.0, 20000, 8);
    std::printf("P[|C_o| = 1]: simulated %.4f, exact %.4f\n", tail.exact_frequency(1), exact_p1(lambda, psi));
    std::printf("P[|C_o| = 2]: simulated %.4f, exact %.4f\n", tail.exact_frequency(2), exact_p2(lambda, psi));
    return 0;
}
