#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mos/energy.hpp"
#include "mos/grid.hpp"
#include "mos/numeric.hpp"

// Independent brute-force minimizer for tiny instances. Everything here is a
// direct re-implementation by plain loops: it deliberately shares no assembly
// code (gradient, quadrature, corner averaging, reductions) with the solver
// path it cross-checks.

namespace mos {

/// Modular of the gradient by a naive left-to-right loop.
inline double oracle_rho(const NFunctionSpec& nf, const Field& u) {
    const Grid& g = u.grid;
    const double hx = g.h(0);
    double acc = 0.0;
    if (g.dim == 1) {
        for (int c = 0; c < g.n_cells[0]; ++c) {
            const double slope = (u.v[c + 1] - u.v[c]) / hx;
            LocalNFunction f = nf.local(0);
            if (nf.exponent_map)
                f.p = 0.5 * (nf.exponent_map->v[c] + nf.exponent_map->v[c + 1]);
            acc += hx * f.Phi(std::abs(slope));
        }
        return acc;
    }
    const double hy = g.h(1);
    const int nx = g.n_cells[0];
    const int nodes_x = nx + 1;
    for (int j = 0; j < g.n_cells[1]; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int n0 = j * nodes_x + i;
            const double gx = (u.v[n0 + 1] - u.v[n0]) / hx;
            const double gy = (u.v[n0 + nodes_x] - u.v[n0]) / hy;
            LocalNFunction f = nf.local(0);
            if (nf.exponent_map) {
                const auto& pm = nf.exponent_map->v;
                f.p = 0.25 * (pm[n0] + pm[n0 + 1] + pm[n0 + nodes_x] + pm[n0 + nodes_x + 1]);
            }
            acc += hx * hy * f.Phi(std::sqrt(gx * gx + gy * gy));
        }
    }
    return acc;
}

/// J(u) by direct loops; pointwise family math is shared, assembly is not.
inline double oracle_energy(const ProblemSpec& p, const Field& u) {
    const Grid& g = p.grid;
    const double a_hat = eval_A_hat(p.kirchhoff, oracle_rho(p.nfunction, u));
    double sing = 0.0;
    const double hx = g.h(0);
    if (g.dim == 1) {
        for (int c = 0; c < g.n_cells[0]; ++c) {
            const double gb = 0.5 * (p.g.v[c] + p.g.v[c + 1]);
            const double gm = 0.5 * (p.gamma.v[c] + p.gamma.v[c + 1]);
            const double ub = 0.5 * (std::abs(u.v[c]) + std::abs(u.v[c + 1]));
            sing += hx * gb * std::pow(ub, 1.0 - gm) / (1.0 - gm);
        }
    } else {
        const double hy = g.h(1);
        const int nx = g.n_cells[0];
        const int nodes_x = nx + 1;
        for (int j = 0; j < g.n_cells[1]; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int n0 = j * nodes_x + i;
                const int ids[4] = {n0, n0 + 1, n0 + nodes_x, n0 + nodes_x + 1};
                double gb = 0.0, gm = 0.0, ub = 0.0;
                for (int id : ids) {
                    gb += p.g.v[id];
                    gm += p.gamma.v[id];
                    ub += std::abs(u.v[id]);
                }
                gb *= 0.25;
                gm *= 0.25;
                ub *= 0.25;
                sing += hx * hy * gb * std::pow(ub, 1.0 - gm) / (1.0 - gm);
            }
        }
    }
    return a_hat - sing;
}

struct OracleResult {
    Field u;
    double energy = 0.0;
    bool budget_exhausted = false;
    int sweeps = 0;
};

/// Cyclic coordinate descent with golden-section line minimization on each
/// interior node. The 1-D restriction of J is convex on the nonnegative ray,
/// so the expanding bracket terminates by coercivity.
inline OracleResult brute_force_oracle(const ProblemSpec& p, long budget = 400000) {
    const Grid& g = p.grid;
    if (g.interior_count() > 8)
        throw std::invalid_argument("brute_force_oracle: at most 8 interior nodes");

    std::vector<std::size_t> interior;
    for (int j = 0; j < g.nodes_axis(1); ++j)
        for (int i = 0; i < g.nodes_axis(0); ++i)
            if (!g.is_boundary(i, j)) interior.push_back(g.node_id(i, j));

    OracleResult res;
    res.u = Field(g, /*dirichlet=*/true);
    long evals = 0;
    auto J_at = [&](std::size_t node, double t) {
        ++evals;
        res.u.v[node] = t;
        return oracle_energy(p, res.u);
    };

    double J_prev = oracle_energy(p, res.u);
    for (int sweep = 0; sweep < 2000; ++sweep) {
        for (std::size_t node : interior) {
            const double keep = res.u.v[node];
            double upper = 1.0 + 2.0 * std::abs(keep);
            int grow = 0;
            while (J_at(node, upper) < J_at(node, 0.5 * upper) && grow++ < 60) upper *= 2.0;
            auto [t_best, J_best] =
                golden_min([&](double t) { return J_at(node, t); }, 0.0, upper, 1e-11, 160);
            (void)J_best;
            res.u.v[node] = t_best;
            if (evals > budget) break;
        }
        const double J_now = oracle_energy(p, res.u);
        res.sweeps = sweep + 1;
        if (std::abs(J_prev - J_now) < 1e-12 * (1.0 + std::abs(J_now))) {
            J_prev = J_now;
            break;
        }
        J_prev = J_now;
        if (evals > budget) {
            res.budget_exhausted = true;
            break;
        }
    }
    res.energy = J_prev;
    return res;
}

}  // namespace mos
