#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mos/check.hpp"
#include "mos/grid.hpp"
#include "mos/modular.hpp"
#include "mos/nfunction.hpp"
#include "mos/numeric.hpp"

// The nonlocal coefficient A with antiderivative, the energy functional
// J(u) = Ahat(rho(u)) - integral g |u|^{1-gamma}/(1-gamma), its smoothed
// gradient, the weak-form residual, and the structural checks (growth,
// convexity, coercivity, negative directions).

namespace mos {

enum class AFamily { power_coeff, bounded_coeff };

struct KirchhoffSpec {
    AFamily family = AFamily::power_coeff;
    // power_coeff: A(t) = c * t^{alpha-1}, growth window [m1, m2].
    double c = 2.0;
    double alpha = 2.0;
    double m1 = 2.0;
    double m2 = 2.0;
    // bounded_coeff: A(t) = c_upper - (c_upper - c_lower)/(1+t).
    double c_lower = 0.0;
    double c_upper = 0.0;
    // Declared lower bound for a(x,t) when running the bounded regime; 0 when
    // not declared.
    double a_lower = 0.0;

    static KirchhoffSpec power(double c, double alpha, double m1 = 0.0, double m2 = 0.0) {
        KirchhoffSpec k;
        k.family = AFamily::power_coeff;
        k.c = c;
        k.alpha = alpha;
        k.m1 = m1 == 0.0 ? c : m1;
        k.m2 = m2 == 0.0 ? c : m2;
        if (!(k.m2 >= k.m1 && k.m1 > 1.0))
            throw std::invalid_argument("KirchhoffSpec: need m2 >= m1 > 1");
        if (!(k.alpha > 1.0)) throw std::invalid_argument("KirchhoffSpec: need alpha > 1");
        if (!(k.c >= k.m1 && k.c <= k.m2))
            throw std::invalid_argument("KirchhoffSpec: need c within [m1, m2]");
        return k;
    }

    static KirchhoffSpec bounded(double c_lower, double c_upper, double a_lower = 0.0) {
        KirchhoffSpec k;
        k.family = AFamily::bounded_coeff;
        k.c_lower = c_lower;
        k.c_upper = c_upper;
        k.a_lower = a_lower;
        if (!(c_lower > 0.0 && c_upper >= c_lower))
            throw std::invalid_argument("KirchhoffSpec: need 0 < c_lower <= c_upper");
        return k;
    }

    /// Constant-coefficient override used by tests of the quadratic limit.
    static KirchhoffSpec constant_unchecked(double value) {
        KirchhoffSpec k;
        k.family = AFamily::bounded_coeff;
        k.c_lower = value;
        k.c_upper = value;
        return k;
    }

    bool theorem35_regime() const { return family == AFamily::bounded_coeff && a_lower > 0.0; }
};

inline double eval_A(const KirchhoffSpec& k, double t) {
    if (!(t > 0.0)) throw std::domain_error("eval_A: t must be positive");
    if (k.family == AFamily::power_coeff) {
        const double val = k.c * std::pow(t, k.alpha - 1.0);
        const double envelope = std::pow(t, k.alpha - 1.0);
        if (val < k.m1 * envelope - check_tol(val) || val > k.m2 * envelope + check_tol(val))
            throw std::logic_error("eval_A: growth sandwich violated");
        return val;
    }
    return k.c_upper - (k.c_upper - k.c_lower) / (1.0 + t);
}

inline double eval_A_hat(const KirchhoffSpec& k, double t) {
    if (t < 0.0) throw std::domain_error("eval_A_hat: t must be nonnegative");
    if (t == 0.0) return 0.0;
    if (k.family == AFamily::power_coeff) return (k.c / k.alpha) * std::pow(t, k.alpha);
    return adapt_quad([&k](double s) { return s <= 0.0 ? k.c_lower : eval_A(k, s); }, 0.0, t,
                      1e-12);
}

struct ProblemSpec {
    Grid grid;
    NFunctionSpec nfunction;
    KirchhoffSpec kirchhoff;
    Field g;      // nonnegative weight, not identically zero
    Field gamma;  // singular exponent, values in (0,1)
    double gamma_minus = 0.0;
    double gamma_plus = 0.0;
    // Cell caches (corner-averaged).
    std::vector<double> g_cells;
    std::vector<double> gamma_cells;

    static ProblemSpec make(Grid grid, NFunctionSpec nf, KirchhoffSpec k, Field g, Field gamma) {
        ProblemSpec p = assemble(std::move(grid), std::move(nf), std::move(k), std::move(g),
                                 std::move(gamma));
        bool has_positive = false;
        for (double v : p.g.v) {
            if (v < 0.0) throw std::invalid_argument("ProblemSpec: g must be nonnegative");
            has_positive = has_positive || v > 0.0;
        }
        if (!has_positive)
            throw std::invalid_argument("ProblemSpec: g must be a nontrivial nonnegative function");
        if (!(p.gamma_minus > 0.0 && p.gamma_plus < 1.0))
            throw std::invalid_argument("ProblemSpec: gamma must map into (0,1)");
        return p;
    }

    /// Skips the (G0)/gamma validation; for tests that override hypotheses.
    static ProblemSpec unchecked(Grid grid, NFunctionSpec nf, KirchhoffSpec k, Field g,
                                 Field gamma) {
        return assemble(std::move(grid), std::move(nf), std::move(k), std::move(g),
                        std::move(gamma));
    }

  private:
    static ProblemSpec assemble(Grid grid, NFunctionSpec nf, KirchhoffSpec k, Field g,
                                Field gamma) {
        ProblemSpec p;
        p.grid = grid;
        require_same_grid(grid, g.grid, "ProblemSpec(g)");
        require_same_grid(grid, gamma.grid, "ProblemSpec(gamma)");
        if (nf.exponent_map) require_same_grid(grid, nf.exponent_map->grid, "ProblemSpec(p map)");
        p.nfunction = std::move(nf);
        p.kirchhoff = k;
        p.g = std::move(g);
        p.gamma = std::move(gamma);
        p.g_cells = corner_average(p.g).v;
        p.gamma_cells = corner_average(p.gamma).v;
        p.gamma_minus = p.gamma.v.empty() ? 0.0 : p.gamma.v[0];
        p.gamma_plus = p.gamma_minus;
        for (double v : p.gamma.v) {
            p.gamma_minus = std::min(p.gamma_minus, v);
            p.gamma_plus = std::max(p.gamma_plus, v);
        }
        return p;
    }
};

struct EnergyBreakdown {
    double rho = 0.0;       // modular of the gradient
    double a_hat = 0.0;     // Ahat(rho)
    double singular = 0.0;  // integral g |u|^{1-gamma} / (1-gamma)
    double total = 0.0;     // a_hat - singular
};

namespace detail {

/// Cellwise singular integrand with the shifted smoothing
/// ((ubar^2+eps^2)^{(1-gamma)/2} - eps^{1-gamma}) / (1-gamma); eps = 0 gives
/// the exact term.
inline double singular_term(const ProblemSpec& p, const CellField& u_abs_cells, double eps) {
    std::vector<double> vals(u_abs_cells.v.size());
    exec::parallel_for(vals.size(), [&](std::size_t c) {
        const double gm = p.gamma_cells[c];
        const double q = 1.0 - gm;
        const double ub = u_abs_cells.v[c];
        double w;
        if (eps == 0.0) {
            w = std::pow(ub, q);
        } else {
            w = std::pow(ub * ub + eps * eps, 0.5 * q) - std::pow(eps, q);
        }
        vals[c] = p.g_cells[c] * w / q;
    });
    return p.grid.cell_volume() * exec::tree_sum(vals);
}

}  // namespace detail

inline EnergyBreakdown energy(const ProblemSpec& p, const Field& u) {
    require_same_grid(p.grid, u.grid, "energy");
    EnergyBreakdown b;
    b.rho = modular_rho(p.nfunction, u);
    b.a_hat = eval_A_hat(p.kirchhoff, b.rho);
    b.singular = detail::singular_term(p, corner_average(u, /*absolute=*/true), 0.0);
    b.total = b.a_hat - b.singular;
    return b;
}

/// J_eps(u): exact principal part, eps-smoothed singular part. Decreases to
/// J(u) as eps -> 0 for fixed u.
inline double energy_smoothed(const ProblemSpec& p, const Field& u, double eps) {
    const double rho = modular_rho(p.nfunction, u);
    return eval_A_hat(p.kirchhoff, rho) -
           detail::singular_term(p, corner_average(u, /*absolute=*/true), eps);
}

/// Nodal gradient of the smoothed energy. delta regularizes the coefficient
/// a(x, sqrt(m^2 + delta^2)) only; the energy value itself stays exact.
/// Boundary nodes are forced to zero.
inline Field energy_gradient(const ProblemSpec& p, const Field& u, double eps, double delta) {
    require_same_grid(p.grid, u.grid, "energy_gradient");
    const Grid& g = p.grid;
    const double vol = g.cell_volume();
    const VecCellField grad_u = gradient(u);
    const CellField m = magnitude(grad_u);
    const double rho = modular(p.nfunction, m);
    const double A_rho = rho > 0.0 ? eval_A(p.kirchhoff, rho)
                                   : (p.kirchhoff.family == AFamily::power_coeff
                                          ? 0.0
                                          : p.kirchhoff.c_lower);

    // Per-cell flux a(x, m_delta) * grad u; zero when the slope vanishes and
    // delta == 0 (phi(0) = 0 kills the limit).
    std::vector<double> fx(g.cell_count(), 0.0), fy(g.dim == 2 ? g.cell_count() : 0, 0.0);
    exec::parallel_for(g.cell_count(), [&](std::size_t c) {
        const double mc = m.v[c];
        const double md = delta == 0.0 ? mc : std::sqrt(mc * mc + delta * delta);
        if (md == 0.0) return;
        const double a = p.nfunction.local_cell(c).coeff(md);
        fx[c] = a * grad_u.x[c];
        if (g.dim == 2) fy[c] = a * grad_u.y[c];
    });

    Field out(g, /*dirichlet=*/true);
    const double hx = g.h(0);
    // Sequential scatter in fixed cell order keeps the result independent of
    // the thread count.
    if (g.dim == 1) {
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const double w = A_rho * vol * fx[c] / hx;
            out.v[c] -= w;
            out.v[c + 1] += w;
        }
    } else {
        const double hy = g.h(1);
        const int nx = g.n_cells[0];
        const int nodes_x = g.nodes_axis(0);
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const int j = static_cast<int>(c) / nx;
            const int i = static_cast<int>(c) % nx;
            const std::size_t n0 = static_cast<std::size_t>(j) * nodes_x + i;
            const double wx = A_rho * vol * fx[c] / hx;
            const double wy = A_rho * vol * fy[c] / hy;
            out.v[n0] -= wx + wy;
            out.v[n0 + 1] += wx;
            out.v[n0 + nodes_x] += wy;
        }
    }

    // Singular part: d/du_n of -integral g ((ubar^2+eps^2)^{q/2} - eps^q)/q.
    const CellField ubar = corner_average(u, /*absolute=*/true);
    const double corner_w = g.dim == 1 ? 0.5 : 0.25;
    auto scatter_singular = [&](std::size_t c, const std::size_t* corners, int n_corners) {
        const double q = 1.0 - p.gamma_cells[c];
        const double ub = ubar.v[c];
        double slope;  // d/d ubar of (ubar^2+eps^2)^{q/2} / q
        if (eps == 0.0) {
            if (ub == 0.0) return;
            slope = std::pow(ub, -p.gamma_cells[c]);
        } else {
            slope = ub * std::pow(ub * ub + eps * eps, 0.5 * q - 1.0);
        }
        const double w = vol * p.g_cells[c] * slope * corner_w;
        for (int k = 0; k < n_corners; ++k) {
            const double un = u.v[corners[k]];
            const double sgn = un > 0.0 ? 1.0 : (un < 0.0 ? -1.0 : 0.0);
            out.v[corners[k]] -= w * sgn;
        }
    };
    if (g.dim == 1) {
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const std::size_t corners[2] = {c, c + 1};
            scatter_singular(c, corners, 2);
        }
    } else {
        const int nx = g.n_cells[0];
        const int nodes_x = g.nodes_axis(0);
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const int j = static_cast<int>(c) / nx;
            const int i = static_cast<int>(c) % nx;
            const std::size_t n0 = static_cast<std::size_t>(j) * nodes_x + i;
            const std::size_t corners[4] = {n0, n0 + 1, n0 + nodes_x, n0 + nodes_x + 1};
            scatter_singular(c, corners, 4);
        }
    }

    out.enforce_boundary();
    return out;
}

struct ResidualReport {
    Field residual;        // per interior node, hat test functions
    double norm = 0.0;     // max |r_i| / nodal weight
    double cutoff = 0.0;   // cap applied to u^{-gamma}
    bool cutoff_activated = false;
    long n_capped = 0;
};

/// Weak-form residual of the Euler-Lagrange identity against the nodal hat
/// basis. Requires u > 0 at interior nodes.
inline ResidualReport weak_residual(const ProblemSpec& p, const Field& u, double cutoff) {
    require_same_grid(p.grid, u.grid, "weak_residual");
    if (!(cutoff > 0.0)) throw std::domain_error("weak_residual: cutoff must be positive");
    const Grid& g = p.grid;
    for (int j = 0; j < g.nodes_axis(1); ++j)
        for (int i = 0; i < g.nodes_axis(0); ++i)
            if (!g.is_boundary(i, j) && !(u.v[g.node_id(i, j)] > 0.0))
                throw std::domain_error("weak_residual: u must be positive at interior nodes");

    const double vol = g.cell_volume();
    const VecCellField grad_u = gradient(u);
    const CellField m = magnitude(grad_u);
    const double rho = modular(p.nfunction, m);
    const double A_rho = eval_A(p.kirchhoff, rho);

    ResidualReport rep;
    rep.cutoff = cutoff;
    rep.residual = Field(g, /*dirichlet=*/true);
    Field weight(g, /*dirichlet=*/true);

    const CellField ubar = corner_average(u, /*absolute=*/true);
    const double corner_w = g.dim == 1 ? 0.5 : 0.25;
    const double hx = g.h(0);

    auto accumulate = [&](std::size_t c, std::size_t n0, std::size_t n_x, std::size_t n_y) {
        const double mc = m.v[c];
        double fxc = 0.0, fyc = 0.0;
        if (mc > 0.0) {
            const double a = p.nfunction.local_cell(c).coeff(mc);
            fxc = a * grad_u.x[c];
            if (g.dim == 2) fyc = a * grad_u.y[c];
        }
        const double wx = A_rho * vol * fxc / hx;
        rep.residual.v[n0] -= wx;
        rep.residual.v[n_x] += wx;
        if (g.dim == 2) {
            const double wy = A_rho * vol * fyc / g.h(1);
            rep.residual.v[n0] -= wy;
            rep.residual.v[n_y] += wy;
        }

        double sing = std::pow(ubar.v[c], -p.gamma_cells[c]);
        if (sing > cutoff) {
            sing = cutoff;
            rep.cutoff_activated = true;
            ++rep.n_capped;
        }
        const double sw = vol * p.g_cells[c] * sing * corner_w;
        rep.residual.v[n0] -= sw;
        rep.residual.v[n_x] -= sw;
        weight.v[n0] += vol * corner_w;
        weight.v[n_x] += vol * corner_w;
        if (g.dim == 2) {
            rep.residual.v[n_y] -= sw;
            rep.residual.v[n_y + 1] -= sw;
            weight.v[n_y] += vol * corner_w;
            weight.v[n_y + 1] += vol * corner_w;
        }
    };
    if (g.dim == 1) {
        for (std::size_t c = 0; c < g.cell_count(); ++c) accumulate(c, c, c + 1, 0);
    } else {
        const int nx = g.n_cells[0];
        const int nodes_x = g.nodes_axis(0);
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const int j = static_cast<int>(c) / nx;
            const int i = static_cast<int>(c) % nx;
            const std::size_t n0 = static_cast<std::size_t>(j) * nodes_x + i;
            accumulate(c, n0, n0 + 1, n0 + nodes_x);
        }
    }

    rep.residual.enforce_boundary();
    for (int j = 0; j < g.nodes_axis(1); ++j) {
        for (int i = 0; i < g.nodes_axis(0); ++i) {
            if (g.is_boundary(i, j)) continue;
            const std::size_t n = g.node_id(i, j);
            rep.norm = std::max(rep.norm, std::abs(rep.residual.v[n]) / weight.v[n]);
        }
    }
    return rep;
}

struct ConvexityReport {
    long trials = 0;
    long violations = 0;
    double worst_violation = 0.0;
    bool passed = true;
};

/// Midpoint-type convexity audit of J over random nonnegative dirichlet
/// pairs. Violations are reported, never suppressed.
inline ConvexityReport check_convexity(const ProblemSpec& p, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_convexity: trials >= 1");
    ConvexityReport rep;
    Rng rng(seed);
    const double lambdas[] = {0.25, 0.5, 0.75};
    for (int tr = 0; tr < trials; ++tr) {
        Field u(p.grid, true), v(p.grid, true);
        const double amp_u = 0.1 + 2.9 * rng.u01();
        const double amp_v = 0.1 + 2.9 * rng.u01();
        for (std::size_t k = 0; k < u.v.size(); ++k) u.v[k] = amp_u * rng.u01();
        for (std::size_t k = 0; k < v.v.size(); ++k) v.v[k] = amp_v * rng.u01();
        u.enforce_boundary();
        v.enforce_boundary();
        const double Ju = energy(p, u).total;
        const double Jv = energy(p, v).total;
        const double scale = std::max({std::abs(Ju), std::abs(Jv), 1.0});
        for (double lam : lambdas) {
            const Field mid = lincomb(1.0 - lam, u, lam, v);
            const double Jm = energy(p, mid).total;
            const double chord = (1.0 - lam) * Ju + lam * Jv;
            ++rep.trials;
            const double violation = Jm - chord - 1e-8 * scale;
            if (violation > 0.0) {
                ++rep.violations;
                rep.worst_violation = std::max(rep.worst_violation, violation);
                rep.passed = false;
            }
        }
    }
    return rep;
}

struct CoercivityRow {
    double scale = 0.0;
    double energy_value = 0.0;
    double lower_bound = 0.0;
    double norm = 0.0;
    bool bound_holds = true;
};

struct CoercivityReport {
    std::vector<CoercivityRow> rows;
    double measured_c = 0.0;
    bool passed = true;
};

/// Rows (c, J(cu), lower_bound(c)) with
/// lower_bound = (m1/alpha) norm^{alpha*phi_lower} - C norm^{1-gamma_minus};
/// C is measured from the singular term at c = 1.
inline CoercivityReport coercivity_probe(const ProblemSpec& p, const Field& u,
                                         const std::vector<double>& scales,
                                         const IndexReport& indices) {
    double umax = 0.0;
    for (double x : u.v) umax = std::max(umax, std::abs(x));
    if (umax == 0.0) throw std::invalid_argument("coercivity_probe: u must be nonzero");
    if (p.kirchhoff.family != AFamily::power_coeff)
        throw std::invalid_argument("coercivity_probe: requires the power growth regime (A0)");

    CoercivityReport rep;
    const double base_norm = luxemburg_norm(p.nfunction, magnitude(gradient(u)));
    const EnergyBreakdown base = energy(p, u);
    rep.measured_c = base.singular / std::pow(base_norm, 1.0 - p.gamma_minus);

    const double m1 = p.kirchhoff.m1;
    const double alpha = p.kirchhoff.alpha;
    for (double c : scales) {
        CoercivityRow row;
        row.scale = c;
        const Field cu = scaled(u, c);
        row.energy_value = energy(p, cu).total;
        row.norm = c * base_norm;
        row.lower_bound = (m1 / alpha) * std::pow(row.norm, alpha * indices.phi_lower) -
                          rep.measured_c * std::pow(row.norm, 1.0 - p.gamma_minus);
        row.bound_holds =
            row.energy_value >= row.lower_bound - check_tol(std::abs(row.lower_bound), 1e-8, 1e-8);
        rep.passed = rep.passed && row.bound_holds;
        rep.rows.push_back(row);
    }
    // The tail of J(cu) must grow once the principal term dominates.
    if (rep.rows.size() >= 2) {
        const auto& a = rep.rows[rep.rows.size() - 2];
        const auto& b = rep.rows.back();
        if (!(b.energy_value > a.energy_value)) rep.passed = false;
    }
    return rep;
}

/// Halves t from 1 until J(t*phi) < 0; the exponent gap guarantees success
/// whenever g*phi is nontrivial.
inline std::pair<double, double> negative_direction(const ProblemSpec& p, const Field& phi_dir) {
    require_same_grid(p.grid, phi_dir.grid, "negative_direction");
    for (double x : phi_dir.v)
        if (x < 0.0) throw std::invalid_argument("negative_direction: phi must be nonnegative");
    double t = 1.0;
    for (int k = 0; k < 60; ++k) {
        const double J = energy(p, scaled(phi_dir, t)).total;
        if (J < 0.0) return {t, J};
        t *= 0.5;
    }
    throw std::runtime_error(
        "negative_direction: no negative energy found; g*phi is likely trivial");
}

}  // namespace mos
