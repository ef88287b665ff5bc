#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mos/energy.hpp"
#include "mos/grid.hpp"
#include "mos/modular.hpp"
#include "mos/numeric.hpp"

// Projected-gradient minimization of J with eps/delta continuation, multistart
// uniqueness experiments, and the strong-monotonicity certificate.

namespace mos {

struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverConfig {
    std::vector<double> eps_ladder{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    double delta = 1e-8;
    double step0 = 1.0;
    double backtrack = 0.5;
    double armijo = 1e-4;
    double grad_tol = 1e-8;
    int max_iters = 5000;
    std::uint64_t seed = 0;

    void validate() const {
        if (eps_ladder.empty()) throw std::invalid_argument("SolverConfig: empty eps ladder");
        for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
            if (!(eps_ladder[i] > 0.0))
                throw std::invalid_argument("SolverConfig: eps values must be positive");
            if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
                throw std::invalid_argument("SolverConfig: eps ladder must decrease strictly");
        }
        if (!(delta >= 0.0) || !(step0 > 0.0) || !(grad_tol > 0.0) || !(armijo > 0.0))
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
        if (!(backtrack > 0.0 && backtrack < 1.0))
            throw std::invalid_argument("SolverConfig: backtrack factor must be in (0,1)");
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters >= 1");
    }
};

struct TraceRow {
    int rung = 0;
    int iter = 0;
    double energy_smoothed = 0.0;
    double step = 0.0;
    double pg_norm = 0.0;
};

struct SolveReport {
    Field u_star;
    EnergyBreakdown energy;      // recomputed unsmoothed at u_star
    double residual_norm = 0.0;
    bool residual_defined = false;
    double residual_cutoff = 0.0;
    bool cutoff_activated = false;
    double scale_stationarity = 0.0;
    std::vector<int> iterations;  // per ladder rung
    double min_interior_value = 0.0;
    double pg_norm_final = 0.0;
};

namespace detail {

inline Field hat_profile(const Grid& g) {
    return sample_on_nodes(
        g,
        [&g](double x, double y) {
            const double lx = g.extent[0];
            double h = 1.0 - std::abs(2.0 * x / lx - 1.0);
            if (g.dim == 2) {
                const double ly = g.extent[1];
                h *= 1.0 - std::abs(2.0 * y / ly - 1.0);
            }
            return h;
        },
        /*dirichlet=*/true);
}

inline Field project_nonnegative(Field u) {
    for (double& x : u.v) x = std::max(0.0, x);
    u.enforce_boundary();
    return u;
}

inline double projected_gradient_norm(const Grid& g, const Field& u, const Field& grad) {
    double pg = 0.0;
    for (int j = 0; j < g.nodes_axis(1); ++j) {
        for (int i = 0; i < g.nodes_axis(0); ++i) {
            if (g.is_boundary(i, j)) continue;
            const std::size_t n = g.node_id(i, j);
            const double gi = grad.v[n];
            const double eff = u.v[n] > 0.0 ? gi : std::min(gi, 0.0);
            pg = std::max(pg, std::abs(eff));
        }
    }
    return pg;
}

inline double min_interior(const Grid& g, const Field& u) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.nodes_axis(1); ++j)
        for (int i = 0; i < g.nodes_axis(0); ++i)
            if (!g.is_boundary(i, j)) m = std::min(m, u.v[g.node_id(i, j)]);
    return std::isfinite(m) ? m : 0.0;
}

}  // namespace detail

/// Default start: the hat profile scaled into the negative-energy cone, or
/// zero when g kills the singular term entirely.
inline Field default_start(const ProblemSpec& p) {
    const Field hat = detail::hat_profile(p.grid);
    if (energy(p, hat).singular <= 0.0) return Field(p.grid, /*dirichlet=*/true);
    const auto [t_star, J] = negative_direction(p, hat);
    (void)J;
    return scaled(hat, t_star);
}

/// Projected gradient with backtracking line search over the eps ladder.
/// Each rung warm-starts the next; the final report recomputes the unsmoothed
/// energy, weak residual and scale stationarity.
inline SolveReport minimize(const ProblemSpec& p, const SolverConfig& cfg,
                            const std::optional<Field>& init = std::nullopt,
                            std::vector<TraceRow>* trace = nullptr) {
    cfg.validate();
    Field u = init ? *init : default_start(p);
    require_same_grid(p.grid, u.grid, "minimize");
    u = detail::project_nonnegative(std::move(u));

    SolveReport rep;
    double pg_last = 0.0;
    for (std::size_t rung = 0; rung < cfg.eps_ladder.size(); ++rung) {
        const double eps = cfg.eps_ladder[rung];
        double J_cur = energy_smoothed(p, u, eps);
        if (!std::isfinite(J_cur))
            throw solver_error("minimize: non-finite energy at the start of rung " +
                               std::to_string(rung));
        double step = cfg.step0;
        int iters = 0;
        for (; iters < cfg.max_iters; ++iters) {
            const Field grad = energy_gradient(p, u, eps, cfg.delta);
            pg_last = detail::projected_gradient_norm(p.grid, u, grad);
            if (pg_last <= cfg.grad_tol * (1.0 + std::abs(J_cur))) break;

            bool accepted = false;
            double J_try = 0.0;
            Field u_try;
            while (step >= 1e-16) {
                u_try = detail::project_nonnegative(lincomb(1.0, u, -step, grad));
                J_try = energy_smoothed(p, u_try, eps);
                double move_sq = 0.0;
                for (std::size_t k = 0; k < u.v.size(); ++k) {
                    const double d = u_try.v[k] - u.v[k];
                    move_sq += d * d;
                }
                if (std::isfinite(J_try) && J_try <= J_cur - (cfg.armijo / step) * move_sq) {
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack;
            }
            if (!accepted)
                throw solver_error("minimize: line search step underflow at rung " +
                                   std::to_string(rung) + ", iter " + std::to_string(iters));
            if (J_try > J_cur + 1e-12 * (1.0 + std::abs(J_cur)))
                throw solver_error("minimize: energy increased within a rung");
            u = std::move(u_try);
            J_cur = J_try;
            if (trace) trace->push_back({static_cast<int>(rung), iters, J_cur, step, pg_last});
            step = std::min(step / cfg.backtrack, 1e6);
        }
        rep.iterations.push_back(iters);
    }

    rep.u_star = u;
    rep.pg_norm_final = pg_last;
    rep.energy = energy(p, u);
    if (!std::isfinite(rep.energy.total))
        throw solver_error("minimize: non-finite final energy");
    rep.min_interior_value = detail::min_interior(p.grid, u);
    if (rep.min_interior_value > 0.0) {
        const double cutoff = std::pow(rep.min_interior_value / 10.0, -p.gamma_plus);
        const ResidualReport rr = weak_residual(p, u, cutoff);
        rep.residual_defined = true;
        rep.residual_norm = rr.norm;
        rep.residual_cutoff = cutoff;
        rep.cutoff_activated = rr.cutoff_activated;
    }
    const double h = 1e-6;
    const double J_plus = energy(p, scaled(u, 1.0 + h)).total;
    const double J_minus = energy(p, scaled(u, 1.0 - h)).total;
    rep.scale_stationarity = std::abs((J_plus - J_minus) / (2.0 * h));
    return rep;
}

struct MultistartReport {
    struct PairDistance {
        int i = 0;
        int j = 0;
        double rho_diff = 0.0;
    };
    std::vector<SolveReport> runs;
    std::vector<PairDistance> pairs;
    double max_pair_modular = 0.0;
    double energy_spread = 0.0;
    double tolerance = 0.0;
    bool passed = true;
};

/// Runs minimize from k seeded random nonnegative starts and compares the
/// minimizers pairwise in the modular metric.
inline MultistartReport multistart_uniqueness(const ProblemSpec& p, const SolverConfig& cfg,
                                              int k_starts) {
    if (k_starts < 2) throw std::invalid_argument("multistart_uniqueness: need k_starts >= 2");
    if (!p.kirchhoff.theorem35_regime())
        throw std::invalid_argument(
            "multistart_uniqueness: problem must declare the bounded coefficient regime "
            "(bounded_coeff with a_lower > 0)");

    MultistartReport rep;
    for (int k = 0; k < k_starts; ++k) {
        Rng rng(cfg.seed + 1000003ULL * static_cast<std::uint64_t>(k + 1));
        Field start(p.grid, /*dirichlet=*/true);
        const double amp = 0.3 * (1.0 + k % 3);
        for (double& x : start.v) x = amp * rng.u01();
        start.enforce_boundary();
        try {
            rep.runs.push_back(minimize(p, cfg, start));
        } catch (const solver_error& e) {
            throw solver_error("multistart start " + std::to_string(k) + ": " + e.what());
        }
    }
    rep.tolerance = 1e-6 * (1.0 + modular_rho(p.nfunction, rep.runs[0].u_star));
    double e_min = rep.runs[0].energy.total, e_max = e_min;
    for (int i = 0; i < k_starts; ++i) {
        e_min = std::min(e_min, rep.runs[i].energy.total);
        e_max = std::max(e_max, rep.runs[i].energy.total);
        for (int j = i + 1; j < k_starts; ++j) {
            const Field diff = lincomb(1.0, rep.runs[i].u_star, -1.0, rep.runs[j].u_star);
            const double d = modular_rho(p.nfunction, diff);
            rep.pairs.push_back({i, j, d});
            rep.max_pair_modular = std::max(rep.max_pair_modular, d);
            if (d >= rep.tolerance) rep.passed = false;
        }
    }
    rep.energy_spread = e_max - e_min;
    return rep;
}

struct CertificateReport {
    double lhs = 0.0;          // monotonicity pairing of the principal parts
    double rhs = 0.0;          // singular pairing, nonpositive pointwise
    double strong_mono = 0.0;  // lhs - C(delta) * rho(u - v)
    double worst_cell_rhs = 0.0;
    bool rhs_nonpositive = true;
};

/// Strong-monotonicity certificate: evaluates both sides of the uniqueness
/// pairing at (u, v) and the margin against C_delta * rho(u - v).
inline CertificateReport uniqueness_certificate(const ProblemSpec& p, const Field& u,
                                                const Field& v, double c_delta) {
    require_same_grid(p.grid, u.grid, "uniqueness_certificate");
    require_same_grid(p.grid, v.grid, "uniqueness_certificate");
    const Grid& g = p.grid;
    for (int j = 0; j < g.nodes_axis(1); ++j)
        for (int i = 0; i < g.nodes_axis(0); ++i)
            if (!g.is_boundary(i, j) &&
                (!(u.v[g.node_id(i, j)] > 0.0) || !(v.v[g.node_id(i, j)] > 0.0)))
                throw std::domain_error(
                    "uniqueness_certificate: u, v must be positive at interior nodes");

    const VecCellField gu = gradient(u), gv = gradient(v);
    const CellField mu = magnitude(gu), mv = magnitude(gv);
    const double Au = eval_A(p.kirchhoff, modular(p.nfunction, mu));
    const double Av = eval_A(p.kirchhoff, modular(p.nfunction, mv));

    CertificateReport rep;
    const double vol = g.cell_volume();
    std::vector<double> lhs_cells(g.cell_count()), rhs_cells(g.cell_count());
    const CellField ubar = corner_average(u, true), vbar = corner_average(v, true);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const LocalNFunction f = p.nfunction.local_cell(c);
        double fux = 0.0, fuy = 0.0, fvx = 0.0, fvy = 0.0;
        if (mu.v[c] > 0.0) {
            const double a = f.coeff(mu.v[c]);
            fux = Au * a * gu.x[c];
            if (g.dim == 2) fuy = Au * a * gu.y[c];
        }
        if (mv.v[c] > 0.0) {
            const double a = f.coeff(mv.v[c]);
            fvx = Av * a * gv.x[c];
            if (g.dim == 2) fvy = Av * a * gv.y[c];
        }
        double dot = (fux - fvx) * (gu.x[c] - gv.x[c]);
        if (g.dim == 2) dot += (fuy - fvy) * (gu.y[c] - gv.y[c]);
        lhs_cells[c] = vol * dot;

        const double gm = p.gamma_cells[c];
        const double term = p.g_cells[c] *
                            (std::pow(ubar.v[c], -gm) - std::pow(vbar.v[c], -gm)) *
                            (ubar.v[c] - vbar.v[c]);
        rhs_cells[c] = vol * term;
        rep.worst_cell_rhs = std::max(rep.worst_cell_rhs, term);
        if (term > 1e-12 * (1.0 + std::abs(term))) rep.rhs_nonpositive = false;
    }
    rep.lhs = exec::tree_sum(lhs_cells);
    rep.rhs = exec::tree_sum(rhs_cells);
    rep.strong_mono = rep.lhs - c_delta * modular_rho(p.nfunction, lincomb(1.0, u, -1.0, v));
    return rep;
}

}  // namespace mos
