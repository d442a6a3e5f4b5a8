#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rcm/identities.hpp"
#include "rcm/lab/config.hpp"
#include "rcm/lab/csv.hpp"
#include "rcm/oracles.hpp"
#include "rcm/parallel.hpp"
#include "rcm/phi.hpp"
#include "rcm/scaling.hpp"
#include "rcm/tail.hpp"
#include "rcm/theta.hpp"

namespace rcm::lab {

/// A run that was configured correctly but could not produce its output.
class ExperimentFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every parameter of a run, parsed and checked before any sampling starts.
struct ExperimentPlan {
    ExperimentKind kind = ExperimentKind::Theta;
    ConnectionSpec psi = ConnectionSpec::zero(2);
    std::vector<double> lambdas;
    std::optional<double> alpha;
    std::vector<ThinningFunctionSpec> thinnings;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<double> t;
    std::optional<double> window;
    std::optional<double> padding;
    double inner_side = 0.0;
    std::vector<MeckeVariant> variants;
    std::size_t n_min = kDefaultZetaNMin;
    std::optional<std::size_t> n_max;
    std::vector<double> s_grid;
    L1ScalingOptions l1;
    std::optional<double> dlambda;
    std::uint64_t k_max = 0;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field, const std::string& what)
{
    throw ConfigError("field '" + field + "': " + what);
}

inline void require_single(const std::vector<double>& v, const std::string& field)
{
    if (v.size() != 1) {
        config_fail(field, "this kind takes exactly one value");
    }
}

} // namespace detail

inline ExperimentPlan plan_experiment(const ExperimentConfig& cfg)
{
    using K = ExperimentKind;
    ExperimentPlan plan;
    plan.kind = cfg.kind();
    const K kind = cfg.kind();

    const int d = cfg.integer("model.d");
    if (d < 1 || d > kMaxDim) {
        detail::config_fail("model.d", "dimension must be in 1.." + std::to_string(kMaxDim));
    }
    plan.psi = connection_from(cfg);
    const double R = plan.psi.support_radius();

    plan.reps = cfg.uint("run.reps");
    plan.seed = cfg.uint("run.seed");
    if (plan.reps < 1 && kind != K::Oracle) {
        detail::config_fail("run.reps", "must be at least 1");
    }

    if (kind == K::GW) {
        if (cfg.has("model.alpha") == cfg.has("model.lambda")) {
            throw ConfigError("kind 'gw' needs exactly one of model.alpha or model.lambda");
        }
        plan.alpha = cfg.has("model.alpha") ? cfg.real("model.alpha")
                                            : cfg.reals("model.lambda").at(0) * integral_psi(plan.psi);
        if (cfg.has("model.lambda")) {
            detail::require_single(cfg.reals("model.lambda"), "model.lambda");
        }
        if (!(*plan.alpha >= 0.0)) {
            detail::config_fail("model.alpha", "offspring mean must be non-negative");
        }
        plan.k_max = cfg.uint("run.k_max");
        if (plan.k_max < 1) {
            detail::config_fail("run.k_max", "must be at least 1");
        }
        return plan;
    }

    if (!cfg.has("model.lambda")) {
        throw ConfigError("missing required key 'model.lambda'");
    }
    plan.lambdas = cfg.reals("model.lambda");
    for (double l : plan.lambdas) {
        if (!(l >= 0.0)) {
            detail::config_fail("model.lambda", "intensities must be non-negative");
        }
    }
    const bool single_lambda = kind == K::ThetaDecay || kind == K::Tail || kind == K::L1Scaling;
    if (single_lambda) {
        detail::require_single(plan.lambdas, "model.lambda");
    }

    if (kind == K::Theta || kind == K::ThetaDecay || kind == K::Russo) {
        if (!cfg.has("run.t")) {
            throw ConfigError("missing required key 'run.t'");
        }
        plan.t = cfg.reals("run.t");
        for (double t : plan.t) {
            if (!(t > 0.0)) {
                detail::config_fail("run.t", "box sides must be positive");
            }
        }
        if (kind == K::ThetaDecay) {
            if (plan.t.size() < 3) {
                detail::config_fail("run.t", "a decay fit needs at least 3 box sides");
            }
            for (std::size_t i = 1; i < plan.t.size(); ++i) {
                if (!(plan.t[i] > plan.t[i - 1])) {
                    detail::config_fail("run.t", "box sides must be increasing");
                }
            }
        }
        if (kind == K::Russo) {
            for (double t : plan.t) {
                if (!(t > 2.0 * R)) {
                    detail::config_fail("run.t", "the Russo check needs t > 2R");
                }
            }
            for (double l : plan.lambdas) {
                if (!(l > 0.0)) {
                    detail::config_fail("model.lambda", "the Russo check needs lambda > 0");
                }
            }
            const double dl = cfg.real("run.dlambda");
            if (dl < 0.0) {
                detail::config_fail("run.dlambda", "must be positive (0 selects 5% of lambda)");
            }
            if (dl > 0.0) {
                plan.dlambda = dl;
                for (double l : plan.lambdas) {
                    if (l - dl < 0.0) {
                        detail::config_fail("run.dlambda", "lambda - dlambda must be non-negative");
                    }
                }
            }
            if (cfg.has("run.window")) {
                plan.window = cfg.real("run.window");
                for (double t : plan.t) {
                    if (!(*plan.window >= t + 2.0 * R)) {
                        detail::config_fail("run.window", "must be at least t + 2R");
                    }
                }
            }
        }
    }

    if (kind == K::Tail || kind == K::Zeta) {
        plan.window = cfg.has("run.window") ? cfg.real("run.window") : 60.0 * R;
        if (!(*plan.window >= 4.0 * R)) {
            detail::config_fail("run.window", "must be at least 4R");
        }
    }
    if (kind == K::Zeta) {
        plan.n_min = cfg.uint("run.n_min");
        if (plan.n_min < 1) {
            detail::config_fail("run.n_min", "must be at least 1");
        }
        if (const auto hi = cfg.uint("run.n_max"); hi > 0) {
            if (hi < plan.n_min + 2) {
                detail::config_fail("run.n_max", "fit range needs at least 3 sizes");
            }
            plan.n_max = hi;
        }
    }

    if (kind == K::Phi || kind == K::LambdaBounds) {
        plan.thinnings = thinnings_from(cfg, plan.psi);
        if (plan.thinnings.empty()) {
            detail::config_fail("model.thinning", "family must be nonempty");
        }
        if (cfg.has("run.padding")) {
            if (kind == K::LambdaBounds) {
                detail::config_fail("run.padding", "not used by kind 'lambda-bounds'");
            }
            plan.padding = cfg.real("run.padding");
            if (!(*plan.padding >= 2.0 * R)) {
                detail::config_fail("run.padding", "must be at least 2R");
            }
        }
    }

    if (kind == K::Mecke) {
        plan.inner_side = cfg.real("run.inner_side");
        if (!(plan.inner_side > 0.0)) {
            detail::config_fail("run.inner_side", "must be positive");
        }
        plan.window = cfg.has("run.window") ? cfg.real("run.window") : plan.inner_side + 2.0 * R;
        if (!(*plan.window >= plan.inner_side + 2.0 * R)) {
            detail::config_fail("run.window", "must be at least inner_side + 2R");
        }
        const auto& v = cfg.text("run.variant");
        if (v != "isolated-count") {
            plan.variants.push_back(MeckeVariant::PointCount);
        }
        if (v != "point-count") {
            plan.variants.push_back(MeckeVariant::IsolatedCount);
        }
    }

    if (kind == K::L1Scaling) {
        if (!cfg.has("run.s_grid")) {
            throw ConfigError("missing required key 'run.s_grid'");
        }
        plan.s_grid = cfg.reals("run.s_grid");
        for (std::size_t i = 0; i < plan.s_grid.size(); ++i) {
            if (!(plan.s_grid[i] > 1.0) || (i > 0 && !(plan.s_grid[i] > plan.s_grid[i - 1]))) {
                detail::config_fail("run.s_grid", "box sides must be increasing and greater than 1");
            }
        }
        plan.l1.tail_window = cfg.real("run.tail_window");
        plan.l1.tail_reps = cfg.uint("run.tail_reps");
        if (plan.l1.tail_window != 0.0 && !(plan.l1.tail_window >= 4.0 * R)) {
            detail::config_fail("run.tail_window", "must be 0 (auto) or at least 4R");
        }
        if (plan.l1.tail_reps < 1) {
            detail::config_fail("run.tail_reps", "must be at least 1");
        }
    }
    return plan;
}

namespace detail {

inline std::string schema_of(ExperimentKind k) { return "rcm-lab/" + std::string(kind_name(k)) + "/v1"; }

inline double gw_zeta_bound_or_nan(double alpha)
{
    return alpha > 0.0 && alpha < 1.0 ? gw_zeta_lower_bound(alpha) : std::nan("");
}

inline CsvTable run_theta(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"lambda", "t", "reps", "hits", "estimate", "wilson_lo", "wilson_hi"});
    // One seed for every row: rows share their randomness, so θ̂ is monotone across them.
    for (double lambda : p.lambdas) {
        for (double t : p.t) {
            const auto e = estimate_theta(lambda, t, p.psi, p.reps, p.seed, opts);
            table.add_row().num(lambda).num(t).count(e.reps).count(e.hits).num(e.estimate).num(e.wilson95.lo).num(
                e.wilson95.hi);
        }
    }
    return table;
}

inline CsvTable run_theta_decay(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"record", "t", "reps", "hits", "estimate", "wilson_lo", "wilson_hi", "rate",
                                       "rate_std_error", "rate_lower95", "r2", "points_used"});
    const auto fit = decay_rate_theta(p.lambdas[0], p.psi, p.t, p.reps, p.seed, opts);
    for (const auto& e : fit.thetas) {
        table.add_row()
            .text("theta")
            .num(e.t)
            .count(e.reps)
            .count(e.hits)
            .num(e.estimate)
            .num(e.wilson95.lo)
            .num(e.wilson95.hi)
            .blank()
            .blank()
            .blank()
            .blank()
            .blank();
    }
    auto row = table.add_row().text("fit");
    for (int i = 0; i < 6; ++i) {
        row.blank();
    }
    row.num(fit.rate).num(fit.std_error).num(fit.lower95()).num(fit.r2).count(fit.used.size());
    return table;
}

inline CsvTable run_tail(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind),
                   {"n", "exact_count", "censored_count", "at_least", "exact_frequency", "tail_frequency"});
    const auto tail = estimate_cluster_tail(p.lambdas[0], p.psi, *p.window, p.reps, p.seed, opts);
    for (std::size_t n = 1; n <= tail.max_size(); ++n) {
        table.add_row()
            .count(n)
            .count(tail.exact_count(n))
            .count(tail.censored_count(n))
            .count(tail.at_least(n))
            .num(tail.exact_frequency(n))
            .num(tail.tail_frequency(n));
    }
    return table;
}

inline CsvTable run_zeta(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"record", "lambda", "reps", "censored", "zeta", "std_error", "n_min", "n_max",
                                       "rho", "r2", "zeta_exact_form", "gw_lower_bound", "n", "q"});
    for (std::size_t i = 0; i < p.lambdas.size(); ++i) {
        const double lambda = p.lambdas[i];
        const auto tail = estimate_cluster_tail(lambda, p.psi, *p.window, p.reps, child_seed(p.seed, i), opts);
        ZetaEstimate z;
        try {
            z = fit_zeta(tail, p.n_min, p.n_max);
        } catch (const EstimationError& e) {
            throw ExperimentFailure("zeta fit at lambda=" + csv_number(lambda) + ": " + e.what());
        }
        table.add_row()
            .text("zeta")
            .num(lambda)
            .count(tail.reps())
            .count(tail.censored())
            .num(z.zeta)
            .num(z.std_error)
            .count(z.n_min)
            .count(z.n_max)
            .num(z.rho)
            .num(z.r2)
            .num(z.zeta_exact_form)
            .num(gw_zeta_bound_or_nan(lambda * integral_psi(p.psi)))
            .blank()
            .blank();
        for (const auto& q : z.q) {
            auto row = table.add_row().text("q").num(lambda);
            for (int k = 0; k < 10; ++k) {
                row.blank();
            }
            row.count(q.n).num(q.q);
        }
    }
    return table;
}

inline void phi_cells(CsvTable::Row row, const PhiEstimate& e)
{
    row.num(e.lambda)
        .text(thinning_label(e.thinning))
        .count(e.reps)
        .num(e.estimate)
        .num(e.std_error)
        .num(e.ci95.lo)
        .num(e.ci95.hi);
}

inline CsvTable run_phi(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"lambda", "thinning", "reps", "estimate", "std_error", "ci_lo", "ci_hi"});
    std::uint64_t row = 0;
    for (double lambda : p.lambdas) {
        for (const auto& f : p.thinnings) {
            std::optional<BoxWindow> w;
            if (p.padding) {
                w = centered_hull(f.support()).dilated(*p.padding);
            }
            phi_cells(table.add_row(), estimate_phi(lambda, f, p.psi, p.reps, child_seed(p.seed, row++), w, opts));
        }
    }
    return table;
}

inline CsvTable run_lambda_bounds(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"record", "lambda", "thinning", "reps", "estimate", "std_error", "ci_lo",
                                       "ci_hi", "certified", "analytic_bound", "best_certified", "best_lower_bound"});
    const auto report = lambda_c_bounds(p.psi, p.lambdas, p.thinnings, p.reps, p.seed, opts);
    for (const auto& r : report.rows) {
        auto row = table.add_row();
        row.text("phi");
        phi_cells(row, r.phi);
        row.flag(r.certified).blank().blank().blank();
    }
    auto row = table.add_row().text("bound");
    for (int i = 0; i < 8; ++i) {
        row.blank();
    }
    row.num(report.analytic_bound)
        .num(report.best_certified.value_or(std::nan("")))
        .num(report.best_lower_bound());
    return table;
}

inline CsvTable run_l1(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind),
                   {"record", "s", "reps", "mean_size", "std_error", "ratio", "ratio_std_error", "zeta",
                    "zeta_std_error", "reference", "reference_std_error", "relative_spread"});
    const auto report = l1_scaling(p.lambdas[0], p.psi, p.s_grid, p.reps, p.seed, p.l1, opts);
    for (const auto& r : report.rows) {
        table.add_row()
            .text("s")
            .num(r.s)
            .count(r.reps)
            .num(r.mean_size)
            .num(r.std_error)
            .num(r.ratio)
            .num(r.ratio_std_error)
            .blank()
            .blank()
            .blank()
            .blank()
            .blank();
    }
    auto row = table.add_row().text("reference");
    for (int i = 0; i < 6; ++i) {
        row.blank();
    }
    const double nan = std::nan("");
    row.num(report.zeta ? report.zeta->zeta : nan)
        .num(report.zeta ? report.zeta->std_error : nan)
        .num(report.reference)
        .num(report.reference_std_error)
        .num(report.relative_spread());
    return table;
}

inline CsvTable run_mecke(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"variant", "lambda", "inner_side", "window_side", "reps", "lhs",
                                       "lhs_std_error", "rhs", "z"});
    const int d = p.psi.dimension();
    std::uint64_t row = 0;
    for (double lambda : p.lambdas) {
        for (auto v : p.variants) {
            const auto r = mecke_check(lambda, p.psi, v, BoxWindow::centered(d, p.inner_side),
                                       BoxWindow::centered(d, *p.window), p.reps, child_seed(p.seed, row++), opts);
            table.add_row()
                .text(v == MeckeVariant::PointCount ? "point-count" : "isolated-count")
                .num(lambda)
                .num(p.inner_side)
                .num(*p.window)
                .count(r.reps)
                .num(r.lhs)
                .num(r.lhs_std_error)
                .num(r.rhs)
                .num(r.z);
        }
    }
    return table;
}

inline CsvTable run_russo(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind), {"lambda", "t", "dlambda", "reps", "derivative", "derivative_std_error",
                                       "integral", "integral_std_error", "bias_allowance", "z"});
    const int d = p.psi.dimension();
    std::uint64_t row = 0;
    for (double lambda : p.lambdas) {
        for (double t : p.t) {
            std::optional<BoxWindow> w;
            if (p.window) {
                w = BoxWindow::centered(d, *p.window);
            }
            const auto r = russo_check(lambda, p.psi, t, p.reps, child_seed(p.seed, row++), p.dlambda, w, opts);
            table.add_row()
                .num(r.lambda)
                .num(r.t)
                .num(r.dlambda)
                .count(p.reps)
                .num(r.derivative.value)
                .num(r.derivative.std_error)
                .num(r.integral.value)
                .num(r.integral.std_error)
                .num(r.bias_allowance)
                .num(r.z);
        }
    }
    return table;
}

inline CsvTable run_gw(const ExperimentPlan& p, const RunOptions& opts)
{
    CsvTable table(schema_of(p.kind),
                   {"k", "borel_pmf", "empirical_pmf", "tail_bound", "exact_tail", "empirical_tail", "alpha", "reps"});
    const double alpha = *p.alpha;
    const std::uint64_t cap = std::max<std::uint64_t>(kGWProgenyCap, p.k_max + 1);
    const auto trees = parallel_map(p.reps, opts.resolved_workers(), [&](std::size_t r) {
        return simulate_gw_progeny(alpha, child_seed(p.seed, r), cap);
    });
    std::vector<std::uint64_t> exact(p.k_max + 2, 0);
    std::vector<std::uint64_t> at_least(p.k_max + 2, 0);
    for (const auto& t : trees) {
        const std::uint64_t c = std::min<std::uint64_t>(t.count, p.k_max + 1);
        if (!t.censored && t.count <= p.k_max) {
            ++exact[c];
        }
        for (std::uint64_t k = 1; k <= c; ++k) {
            ++at_least[k];
        }
    }
    const double n = static_cast<double>(p.reps);
    double below = 0.0;
    for (std::uint64_t k = 1; k <= p.k_max; ++k) {
        const double pmf = borel_pmf(alpha, k);
        const double bound = alpha > 0.0 && alpha < 1.0 ? gw_tail_bound(alpha, k) : std::nan("");
        table.add_row()
            .count(k)
            .num(pmf)
            .num(static_cast<double>(exact[k]) / n)
            .num(bound)
            .num(std::max(0.0, 1.0 - below))
            .num(static_cast<double>(at_least[k]) / n)
            .num(alpha)
            .count(p.reps);
        below += pmf;
    }
    return table;
}

inline CsvTable run_oracle(const ExperimentPlan& p)
{
    CsvTable table(schema_of(p.kind), {"lambda", "integral_psi", "gw_alpha", "analytic_lambda_c_bound", "p1", "p2",
                                       "gw_zeta_lower_bound"});
    const double mass = integral_psi(p.psi);
    for (double lambda : p.lambdas) {
        const ExactSmallClusterOracle oracle{p.psi, lambda};
        const double p2 = p.psi.kind() == ConnectionSpec::Kind::BooleanDisk ? oracle.p2() : std::nan("");
        table.add_row()
            .num(lambda)
            .num(mass)
            .num(lambda * mass)
            .num(analytic_lambda_c_bound(p.psi))
            .num(oracle.p1())
            .num(p2)
            .num(gw_zeta_bound_or_nan(lambda * mass));
    }
    return table;
}

} // namespace detail

/// Runs a validated plan. Worker count never changes the output.
inline CsvTable run_experiment(const ExperimentPlan& p, const RunOptions& opts = {})
{
    using K = ExperimentKind;
    try {
        switch (p.kind) {
        case K::Theta: return detail::run_theta(p, opts);
        case K::ThetaDecay: return detail::run_theta_decay(p, opts);
        case K::Tail: return detail::run_tail(p, opts);
        case K::Zeta: return detail::run_zeta(p, opts);
        case K::Phi: return detail::run_phi(p, opts);
        case K::LambdaBounds: return detail::run_lambda_bounds(p, opts);
        case K::L1Scaling: return detail::run_l1(p, opts);
        case K::Mecke: return detail::run_mecke(p, opts);
        case K::Russo: return detail::run_russo(p, opts);
        case K::GW: return detail::run_gw(p, opts);
        case K::Oracle: return detail::run_oracle(p);
        }
    } catch (const ExperimentFailure&) {
        throw;
    } catch (const EstimationError& e) {
        throw ExperimentFailure(std::string(kind_name(p.kind)) + ": " + e.what());
    }
    throw ExperimentFailure("unknown experiment kind");
}

inline CsvTable run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {})
{
    return run_experiment(plan_experiment(cfg), opts);
}

} // namespace rcm::lab
