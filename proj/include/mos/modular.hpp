#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mos/check.hpp"
#include "mos/exec.hpp"
#include "mos/grid.hpp"
#include "mos/nfunction.hpp"

// Modulars, Luxemburg norms, Sobolev norms and the norm-modular inequalities.

namespace mos {

/// Integral of Phi(x_cell, f_cell); f must be nonnegative cellwise.
inline double modular(const NFunctionSpec& spec, const CellField& f) {
    if (spec.exponent_map) require_same_grid(spec.exponent_map->grid, f.grid, "modular");
    std::vector<double> vals(f.v.size());
    exec::parallel_for(f.v.size(), [&](std::size_t c) {
        vals[c] = spec.local_cell(c).Phi(f.v[c]);
    });
    return f.grid.cell_volume() * exec::tree_sum(vals);
}

/// rho(u) = integral of Phi(x, |grad u|).
inline double modular_rho(const NFunctionSpec& spec, const Field& u) {
    return modular(spec, magnitude(gradient(u)));
}

/// Luxemburg norm of an abstract modular mu -> m(mu); m must be nonincreasing.
/// Brackets from mu = 1 by doubling/halving, then bisects to relative width 1e-10.
inline double luxemburg_general(const std::function<double(double)>& modular_of_scaled,
                                double max_abs) {
    if (max_abs == 0.0) return 0.0;
    double lo, hi;
    if (modular_of_scaled(1.0) <= 1.0) {
        hi = 1.0;
        double mu = 0.5;
        int k = 0;
        while (modular_of_scaled(mu) <= 1.0) {
            hi = mu;
            mu *= 0.5;
            if (++k > 400)
                throw std::runtime_error("luxemburg_norm: bracket not found (underflow)");
        }
        lo = mu;
    } else {
        lo = 1.0;
        double mu = 2.0;
        int k = 0;
        while (modular_of_scaled(mu) > 1.0) {
            lo = mu;
            mu *= 2.0;
            if (++k > 400)
                throw std::runtime_error("luxemburg_norm: bracket not found (overflow)");
        }
        hi = mu;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (modular_of_scaled(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Luxemburg norm inf{mu > 0 : modular(|f|/mu) <= 1}; 0 for f == 0.
inline double luxemburg_norm(const NFunctionSpec& spec, const CellField& f) {
    double max_abs = 0.0;
    for (double x : f.v) max_abs = std::max(max_abs, std::abs(x));
    CellField scratch(f.grid);
    auto m = [&](double mu) {
        for (std::size_t c = 0; c < f.v.size(); ++c) scratch.v[c] = std::abs(f.v[c]) / mu;
        return modular(spec, scratch);
    };
    return luxemburg_general(m, max_abs);
}

/// Luxemburg norm with respect to the conjugate N-function, evaluated by the
/// cellwise Legendre scan. Window exhaustion propagates.
inline double luxemburg_norm_conjugate(const NFunctionSpec& spec, const CellField& f) {
    double max_abs = 0.0;
    for (double x : f.v) max_abs = std::max(max_abs, std::abs(x));
    if (max_abs == 0.0) return 0.0;
    const double vol = f.grid.cell_volume();
    auto m = [&](double mu) {
        std::vector<double> vals(f.v.size());
        for (std::size_t c = 0; c < f.v.size(); ++c) {
            const LocalNFunction loc = spec.local_cell(spec.x_dependent() ? c : 0);
            double t_max = 1e6;
            for (;;) {
                try {
                    vals[c] = detail::conjugate_local(loc, std::abs(f.v[c]) / mu, t_max);
                    break;
                } catch (const window_exhausted_error&) {
                    if (t_max >= 1e12) throw;
                    t_max *= 2.0;
                }
            }
        }
        return vol * exec::tree_sum(vals);
    };
    return luxemburg_general(m, max_abs);
}

/// (|u|_Phi + |grad u|_Phi, |grad u|_Phi) — the full and equivalent norms.
inline std::pair<double, double> sobolev_norms(const NFunctionSpec& spec, const Field& u) {
    const double grad_part = luxemburg_norm(spec, magnitude(gradient(u)));
    const double value_part = luxemburg_norm(spec, corner_average(u, /*absolute=*/true));
    return {value_part + grad_part, grad_part};
}

struct NormCheck {
    std::string name;
    bool passed = true;
    double lhs = 0.0;
    double rhs = 0.0;
    double violation = 0.0;
};

struct NormReport {
    double modular_value = 0.0;  // rho(u)
    double luxemburg = 0.0;      // |grad u|_Phi
    std::vector<NormCheck> norm_checks;
    bool passed = true;

    void expect_le(const std::string& name, double lhs, double rhs, double tol) {
        NormCheck c{name, lhs <= rhs + tol, lhs, rhs, lhs - rhs - tol};
        passed = passed && c.passed;
        norm_checks.push_back(c);
    }
};

/// Norm-modular relations (i)-(iii) with sampled growth indices.
inline NormReport check_modular_norm_relations(const NFunctionSpec& spec, const Field& u,
                                               const IndexReport& indices) {
    NormReport rep;
    rep.modular_value = modular_rho(spec, u);
    rep.luxemburg = luxemburg_norm(spec, magnitude(gradient(u)));
    const double norm = rep.luxemburg;
    const double rho = rep.modular_value;
    const double tol = check_tol(std::max(rho, 1.0), 1e-8, 1e-8);
    if (norm < 1.0) {
        rep.expect_le("norm^{phi^0} <= rho (norm < 1)", std::pow(norm, indices.phi_upper), rho,
                      tol);
        rep.expect_le("rho <= norm^{phi_0} (norm < 1)", rho, std::pow(norm, indices.phi_lower),
                      tol);
    } else if (norm > 1.0) {
        rep.expect_le("norm^{phi_0} <= rho (norm > 1)", std::pow(norm, indices.phi_lower), rho,
                      tol);
        rep.expect_le("rho <= norm^{phi^0} (norm > 1)", rho, std::pow(norm, indices.phi_upper),
                      tol);
    }
    rep.expect_le("norm <= rho + 1", norm, rho + 1.0, tol);
    return rep;
}

struct ConvergenceReport {
    std::vector<double> norms;
    std::vector<double> modulars;
    bool passed = true;
    std::string message;
};

/// Norm and modular convergence must agree along the sequence: the two
/// sequences move in the same direction and are co-small at the tail.
inline ConvergenceReport check_convergence_equivalence(const NFunctionSpec& spec,
                                                       const std::vector<Field>& u_seq,
                                                       const Field& u) {
    ConvergenceReport rep;
    for (const Field& un : u_seq) {
        const Field diff = lincomb(1.0, un, -1.0, u);
        rep.norms.push_back(luxemburg_norm(spec, magnitude(gradient(diff))));
        rep.modulars.push_back(modular_rho(spec, diff));
    }
    for (std::size_t k = 0; k + 1 < rep.norms.size(); ++k) {
        const double dn = rep.norms[k + 1] - rep.norms[k];
        const double dm = rep.modulars[k + 1] - rep.modulars[k];
        const double tiny_n = 1e-12 * (std::abs(rep.norms[k]) + 1.0);
        const double tiny_m = 1e-12 * (std::abs(rep.modulars[k]) + 1.0);
        if ((dn > tiny_n && dm < -tiny_m) || (dn < -tiny_n && dm > tiny_m)) {
            rep.passed = false;
            rep.message = "norm and modular moved in opposite directions at step " +
                          std::to_string(k);
        }
    }
    if (!rep.norms.empty()) {
        const double n_end = rep.norms.back();
        const double m_end = rep.modulars.back();
        const double n_start = rep.norms.front() + 1.0;
        const double m_start = rep.modulars.front() + 1.0;
        const bool norm_small = n_end < 1e-6 * n_start;
        const bool mod_small = m_end < 1e-6 * m_start;
        if (norm_small != mod_small) {
            rep.passed = false;
            rep.message = "norm and modular tails disagree on smallness";
        }
    }
    return rep;
}

struct HolderReport {
    double pairing = 0.0;
    double bound = 0.0;
    bool passed = true;
};

/// integral(u*v) <= 2 |u|_Phi |v|_conjPhi.
inline HolderReport holder_pairing(const NFunctionSpec& spec, const CellField& u_cells,
                                   const CellField& v_cells) {
    require_same_grid(u_cells.grid, v_cells.grid, "holder_pairing");
    HolderReport rep;
    CellField prod(u_cells.grid);
    for (std::size_t c = 0; c < prod.v.size(); ++c) prod.v[c] = u_cells.v[c] * v_cells.v[c];
    rep.pairing = integrate(prod);
    rep.bound = 2.0 * luxemburg_norm(spec, u_cells) * luxemburg_norm_conjugate(spec, v_cells);
    rep.passed = rep.pairing <= rep.bound + check_tol(rep.bound);
    return rep;
}

}  // namespace mos
