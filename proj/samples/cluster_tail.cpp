// Prints the origin-cluster tail at a few subcritical intensities next to the
// Galton-Watson progeny tail at the matched offspring mean, plus the fitted zeta.
// The tree tail dominates the cluster tail.

#include <cstdio>

#include "rcm/rcm.hpp"

int main()
{
    using namespace rcm;
    const ConnectionSpec psi = ConnectionSpec::boolean_disk(2, 0.35, 1.0);
    for (double lambda : {0.3, 0.6, 0.85}) {
        const TailDistribution tail = estimate_cluster_tail(lambda, psi, 40.0, 50000, 11);
        const double alpha = lambda * integral_psi(psi);
        const ZetaEstimate z = fit_zeta(tail);
        std::printf("lambda %.2f  alpha %.3f  zeta %.4f +- %.4f  (GW lower bound %.4f)\n", lambda, alpha, z.zeta,
                    z.std_error, gw_zeta_lower_bound(alpha));
        std::printf("   n   P[|C_o|>=n]   P[|tau|>=n]\n");
        double tree_tail = 1.0;
        for (std::size_t n = 1; n <= 20; ++n) {
            if (n == 1 || n == 2 || n == 5 || n == 10 || n == 20) {
                std::printf("%4zu   %.3e     %.3e\n", n, tail.tail_frequency(n), tree_tail);
            }
            tree_tail -= borel_pmf(alpha, n);
        }
    }
    return 0;
}
