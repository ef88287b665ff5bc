#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mos/check.hpp"
#include "mos/grid.hpp"
#include "mos/numeric.hpp"

// Generalized N-functions Phi(x,t): the four model families, their
// derivatives phi and coefficients a, numerically scanned conjugates, and the
// pointwise axiom / growth-index checks.

namespace mos {

enum class NFamily { power, elasticity, plasticity, newtonian };

inline const char* family_name(NFamily f) {
    switch (f) {
        case NFamily::power: return "power";
        case NFamily::elasticity: return "elasticity";
        case NFamily::plasticity: return "plasticity";
        case NFamily::newtonian: return "newtonian";
    }
    return "?";
}

/// N-function evaluated at one spatial location: the exponent (power family)
/// is frozen, everything else is x-independent anyway.
struct LocalNFunction {
    NFamily family = NFamily::power;
    double scale = 1.0;  // power: c in c*t^p
    double p = 2.0;      // power: local exponent
    double alpha = 0.0;
    double beta = 0.0;

    double Phi(double t) const {
        if (t == 0.0) return 0.0;
        switch (family) {
            case NFamily::power:
                return scale * std::pow(t, p);
            case NFamily::elasticity:
                // expm1/log1p keep relative accuracy near t = 0.
                return std::expm1(alpha * std::log1p(t * t));
            case NFamily::plasticity:
                return std::pow(t, alpha) * std::pow(std::log1p(t), beta);
            case NFamily::newtonian:
                return adapt_quad(
                    [this](double s) {
                        return s <= 0.0 ? 0.0
                                        : std::pow(s, 1.0 - alpha) * std::pow(std::asinh(s), beta);
                    },
                    0.0, t, 1e-12);
        }
        return 0.0;
    }

    /// dPhi/dt. Closed form for every family.
    double phi(double t) const {
        if (t == 0.0) return 0.0;
        switch (family) {
            case NFamily::power:
                return scale * p * std::pow(t, p - 1.0);
            case NFamily::elasticity:
                return 2.0 * alpha * t * std::pow(1.0 + t * t, alpha - 1.0);
            case NFamily::plasticity: {
                const double L = std::log1p(t);
                return alpha * std::pow(t, alpha - 1.0) * std::pow(L, beta) +
                       beta * std::pow(t, alpha) * std::pow(L, beta - 1.0) / (1.0 + t);
            }
            case NFamily::newtonian:
                return std::pow(t, 1.0 - alpha) * std::pow(std::asinh(t), beta);
        }
        return 0.0;
    }

    /// a(t) = phi(t)/t for t > 0.
    double coeff(double t) const {
        switch (family) {
            case NFamily::power:
                return scale * p * std::pow(t, p - 2.0);
            case NFamily::elasticity:
                return 2.0 * alpha * std::pow(1.0 + t * t, alpha - 1.0);
            case NFamily::plasticity:
            case NFamily::newtonian:
                return phi(t) / t;
        }
        return 0.0;
    }
};

struct NFunctionSpec {
    NFamily family = NFamily::power;
    double scale = 1.0;
    double p_const = 2.0;
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<Field> exponent_map;
    std::vector<double> exponent_cells;  // corner-averaged, power maps only

    static NFunctionSpec power(double p, double scale = 1.0) {
        if (!(p > 1.0)) throw std::invalid_argument("power family: need p > 1");
        if (!(scale > 0.0)) throw std::invalid_argument("power family: need scale > 0");
        NFunctionSpec s;
        s.family = NFamily::power;
        s.p_const = p;
        s.scale = scale;
        return s;
    }

    static NFunctionSpec power_map(Field p_nodes, double scale = 1.0) {
        if (!(scale > 0.0)) throw std::invalid_argument("power family: need scale > 0");
        double pmin = p_nodes.v.empty() ? 0.0 : p_nodes.v[0];
        for (double p : p_nodes.v) pmin = std::min(pmin, p);
        if (!(pmin > 1.0)) throw std::invalid_argument("power family: need min p(x) > 1");
        NFunctionSpec s;
        s.family = NFamily::power;
        s.scale = scale;
        s.exponent_cells = corner_average(p_nodes).v;
        s.exponent_map = std::move(p_nodes);
        return s;
    }

    static NFunctionSpec elasticity(double alpha) {
        if (!(alpha > 0.5)) throw std::invalid_argument("elasticity family: need alpha > 1/2");
        NFunctionSpec s;
        s.family = NFamily::elasticity;
        s.alpha = alpha;
        return s;
    }

    static NFunctionSpec plasticity(double alpha, double beta) {
        if (!(alpha >= 1.0) || !(beta > 0.0))
            throw std::invalid_argument("plasticity family: need alpha >= 1, beta > 0");
        NFunctionSpec s;
        s.family = NFamily::plasticity;
        s.alpha = alpha;
        s.beta = beta;
        return s;
    }

    static NFunctionSpec newtonian(double alpha, double beta) {
        if (!(alpha >= 0.0) || !(alpha <= 1.0) || !(beta > 0.0))
            throw std::invalid_argument("newtonian family: need 0 <= alpha <= 1, beta > 0");
        NFunctionSpec s;
        s.family = NFamily::newtonian;
        s.alpha = alpha;
        s.beta = beta;
        return s;
    }

    /// Skips range validation. For negative controls in checks and tests.
    static NFunctionSpec unchecked(NFamily fam, double alpha, double beta, double scale = 1.0,
                                   double p = 2.0) {
        NFunctionSpec s;
        s.family = fam;
        s.alpha = alpha;
        s.beta = beta;
        s.scale = scale;
        s.p_const = p;
        return s;
    }

    bool x_dependent() const { return exponent_map.has_value(); }

    std::size_t node_count() const {
        return exponent_map ? exponent_map->v.size() : std::size_t{1};
    }

    double exponent_at(std::size_t node) const {
        if (!exponent_map) return p_const;
        if (node >= exponent_map->v.size())
            throw std::out_of_range("NFunctionSpec: node index outside exponent map");
        return exponent_map->v[node];
    }

    LocalNFunction local(std::size_t node = 0) const {
        LocalNFunction f{family, scale, p_const, alpha, beta};
        if (family == NFamily::power) f.p = exponent_at(node);
        return f;
    }

    LocalNFunction local_cell(std::size_t cell) const {
        LocalNFunction f{family, scale, p_const, alpha, beta};
        if (family == NFamily::power && exponent_map) {
            if (cell >= exponent_cells.size())
                throw std::out_of_range("NFunctionSpec: cell index outside exponent map");
            f.p = exponent_cells[cell];
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// Pointwise evaluation ops.
// ---------------------------------------------------------------------------

inline double eval_Phi(const NFunctionSpec& spec, std::size_t node, double t) {
    if (t < 0.0) throw std::domain_error("eval_Phi: t must be nonnegative");
    return spec.local(node).Phi(t);
}

inline double eval_phi(const NFunctionSpec& spec, std::size_t node, double t) {
    if (t < 0.0) throw std::domain_error("eval_phi: t must be nonnegative");
    return spec.local(node).phi(t);
}

inline double eval_a(const NFunctionSpec& spec, std::size_t node, double t) {
    if (!(t > 0.0)) throw std::domain_error("eval_a: t must be positive");
    return spec.local(node).coeff(t);
}

// ---------------------------------------------------------------------------
// Conjugate (Legendre transform on a bounded window).
// ---------------------------------------------------------------------------

struct window_exhausted_error : std::runtime_error {
    explicit window_exhausted_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline double conjugate_local(const LocalNFunction& f, double s, double t_max,
                              int n_scan = 400) {
    if (s < 0.0) throw std::domain_error("conjugate: s must be nonnegative");
    if (s == 0.0) return 0.0;
    auto objective = [&](double t) { return s * t - f.Phi(t); };

    // Dense log grid over [0, t_max]; the unique maximizer of the concave
    // objective lands between neighbouring grid points.
    const double t_lo = 1e-12;
    std::vector<double> ts(static_cast<std::size_t>(n_scan) + 1, 0.0);
    const double lstep = (std::log(t_max) - std::log(t_lo)) / (n_scan - 1);
    for (int i = 0; i < n_scan; ++i) ts[static_cast<std::size_t>(i) + 1] = std::exp(std::log(t_lo) + i * lstep);
    ts.back() = t_max;

    std::size_t best = 0;
    double best_val = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double v = objective(ts[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best + 1 == ts.size())
        throw window_exhausted_error("conjugate: search window exhausted at t_max");

    const double lo = best == 0 ? 0.0 : ts[best - 1];
    const double hi = ts[best + 1];
    auto [t_star, val] = golden_max(objective, lo, hi, 1e-10);
    (void)t_star;
    return std::max(val, 0.0);
}

}  // namespace detail

/// sup_{t in [0, t_max]} (s*t - Phi(x,t)). Throws window_exhausted_error when
/// the maximizer hits the t_max boundary.
inline double conjugate(const NFunctionSpec& spec, std::size_t node, double s, double t_max) {
    return detail::conjugate_local(spec.local(node), s, t_max);
}

/// Conjugate with the default window 1e6, auto-doubled up to 1e12.
inline double conjugate_auto(const NFunctionSpec& spec, std::size_t node, double s) {
    double t_max = 1e6;
    for (;;) {
        try {
            return conjugate(spec, node, s, t_max);
        } catch (const window_exhausted_error&) {
            if (t_max >= 1e12) throw;
            t_max *= 2.0;
        }
    }
}

// ---------------------------------------------------------------------------
// Sample plans and checks.
// ---------------------------------------------------------------------------

struct SamplePlan {
    std::vector<std::size_t> nodes{0};
    std::vector<double> t;  // positive magnitudes, ascending
    std::vector<double> s;  // dual samples, ascending

    static SamplePlan log_random(std::uint64_t seed, int n_t, int n_s, double lo, double hi) {
        Rng rng(seed);
        SamplePlan plan;
        plan.t.reserve(n_t);
        plan.s.reserve(n_s);
        for (int i = 0; i < n_t; ++i) plan.t.push_back(rng.log_uniform(lo, hi));
        for (int i = 0; i < n_s; ++i) plan.s.push_back(rng.log_uniform(lo, hi));
        std::sort(plan.t.begin(), plan.t.end());
        std::sort(plan.s.begin(), plan.s.end());
        return plan;
    }

    /// Restricts x sampling to at most max_nodes indices of the spec's map.
    SamplePlan& with_nodes_of(const NFunctionSpec& spec, std::size_t max_nodes = 64) {
        nodes.clear();
        const std::size_t n = spec.node_count();
        const std::size_t stride = std::max<std::size_t>(1, n / max_nodes);
        for (std::size_t i = 0; i < n; i += stride) nodes.push_back(i);
        return *this;
    }
};

inline CheckReport check_young(const NFunctionSpec& spec, const SamplePlan& plan) {
    CheckReport rep;
    rep.name = "young_inequality";
    for (std::size_t x : plan.nodes) {
        const LocalNFunction f = spec.local(x);
        for (double s : plan.s) {
            const double conj = conjugate_auto(spec, x, s);
            for (double t : plan.t) {
                const double lhs = s * t;
                const double rhs = f.Phi(t) + conj;
                rep.expect_le("s*t <= Phi(x,t) + conj(x,s) [x=" + std::to_string(x) +
                                  " s=" + std::to_string(s) + " t=" + std::to_string(t) + "]",
                              lhs, rhs, check_tol(std::max(std::abs(lhs), std::abs(rhs))));
            }
        }
    }
    return rep;
}

struct IndexReport {
    double phi_lower = 0.0;   // sampled estimate of the lower growth index
    double phi_upper = 0.0;   // sampled estimate of the upper growth index
    double delta2_constant = 0.0;
    std::vector<double> t_grid;         // the t samples used
    std::vector<std::size_t> nodes;     // the x samples used
    struct CtRow {
        double t;
        double phi_min;  // min_x Phi(x,t)
        double phi_max;  // max_x Phi(x,t)
    };
    std::vector<CtRow> c_t_table;
    bool ok = true;
    std::string message;
};

/// Samples r(x,t) = t*phi/Phi over a log grid and all exponent nodes.
inline IndexReport estimate_indices(const NFunctionSpec& spec, double t_lo = 1e-6,
                                    double t_hi = 1e6, int n_samples = 2000) {
    if (n_samples < 100) throw std::invalid_argument("estimate_indices: need n_samples >= 100");
    if (!(0.0 < t_lo && t_lo < t_hi))
        throw std::invalid_argument("estimate_indices: need 0 < t_lo < t_hi");

    IndexReport rep;
    rep.t_grid.resize(n_samples);
    const double lstep = (std::log(t_hi) - std::log(t_lo)) / (n_samples - 1);
    for (int i = 0; i < n_samples; ++i) rep.t_grid[i] = std::exp(std::log(t_lo) + i * lstep);
    rep.t_grid.back() = t_hi;

    rep.nodes.resize(spec.node_count());
    for (std::size_t i = 0; i < rep.nodes.size(); ++i) rep.nodes[i] = i;

    double r_min = std::numeric_limits<double>::infinity();
    double r_max = 0.0;
    double m_max = 0.0;
    rep.c_t_table.reserve(rep.t_grid.size());
    for (double t : rep.t_grid) {
        double phi_min = std::numeric_limits<double>::infinity();
        double phi_max = 0.0;
        for (std::size_t x : rep.nodes) {
            const LocalNFunction f = spec.local(x);
            const double Phi = f.Phi(t);
            const double Phi2 = f.Phi(2.0 * t);
            phi_min = std::min(phi_min, Phi);
            phi_max = std::max(phi_max, Phi);
            if (Phi <= 0.0) {
                rep.ok = false;
                rep.message = "Phi vanished at a positive sample";
                continue;
            }
            const double r = t * f.phi(t) / Phi;
            if (r <= 1.0) {
                rep.ok = false;
                rep.message = "growth ratio t*phi/Phi <= 1 at t=" + std::to_string(t);
            }
            r_min = std::min(r_min, r);
            r_max = std::max(r_max, r);
            m_max = std::max(m_max, Phi2 / Phi);
        }
        rep.c_t_table.push_back({t, phi_min, phi_max});
    }
    rep.phi_lower = r_min;
    rep.phi_upper = r_max;
    rep.delta2_constant = m_max;
    return rep;
}

struct AxiomReport {
    std::vector<CheckReport> items;
    bool passed = true;

    void finish() {
        passed = true;
        for (const auto& it : items) passed = passed && it.passed;
    }
    const CheckReport* find(const std::string& name) const {
        for (const auto& it : items)
            if (it.name == name) return &it;
        return nullptr;
    }
};

/// Midpoint convexity of Phi and of t -> Phi(sqrt(t)), derivative
/// monotonicity, ratio limits at t -> 0 / infinity, and the x-uniform
/// positivity bound.
inline AxiomReport check_axioms(const NFunctionSpec& spec, const SamplePlan& plan) {
    CheckReport zero, convex, sqrt_convex, monotone, limits, positivity;
    zero.name = "phi0_zero_and_positive";
    convex.name = "phi_midpoint_convex";
    sqrt_convex.name = "sqrt_compose_convex";
    monotone.name = "phi_derivative_monotone";
    limits.name = "ratio_limits";
    positivity.name = "x_uniform_positivity";

    for (std::size_t x : plan.nodes) {
        const LocalNFunction f = spec.local(x);
        zero.expect("Phi(x,0) == 0", f.Phi(0.0) == 0.0);
        for (double t : plan.t) zero.expect("Phi(x,t) > 0 for t > 0", f.Phi(t) > 0.0);

        // All i<j pairs; midpoint convexity on t and on the sqrt composition.
        // Endpoint evaluations are cached; only midpoints cost per pair.
        std::vector<double> Phi_t(plan.t.size()), Phi_sqrt_t(plan.t.size());
        for (std::size_t i = 0; i < plan.t.size(); ++i) {
            Phi_t[i] = f.Phi(plan.t[i]);
            Phi_sqrt_t[i] = f.Phi(std::sqrt(plan.t[i]));
        }
        for (std::size_t i = 0; i < plan.t.size(); ++i) {
            for (std::size_t j = i + 1; j < plan.t.size(); ++j) {
                const double tm = 0.5 * (plan.t[i] + plan.t[j]);
                const double chord = 0.5 * (Phi_t[i] + Phi_t[j]);
                convex.expect_le("Phi midpoint convexity", f.Phi(tm), chord, check_tol(chord));

                const double gchord = 0.5 * (Phi_sqrt_t[i] + Phi_sqrt_t[j]);
                sqrt_convex.expect_le("Phi(sqrt(t)) midpoint convexity", f.Phi(std::sqrt(tm)),
                                      gchord, check_tol(gchord));
            }
        }

        double prev_phi = 0.0;
        for (double t : plan.t) {
            const double cur = f.phi(t);
            monotone.expect_le("phi nondecreasing", prev_phi, cur, check_tol(cur));
            prev_phi = cur;
        }

        // Phi(x,t)/t must fall toward 0 and blow up along fixed probes.
        const double probes[] = {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6, 1e8};
        double prev_ratio = 0.0;
        double ratio_small = 0.0, ratio_mid = 0.0, ratio_big = 0.0;
        for (double t : probes) {
            const double ratio = f.Phi(t) / t;
            limits.expect_le("Phi(t)/t nondecreasing across probes", prev_ratio, ratio,
                             check_tol(ratio));
            prev_ratio = ratio;
            if (t == 1e-8) ratio_small = ratio;
            if (t == 1.0) ratio_mid = ratio;
            if (t == 1e8) ratio_big = ratio;
        }
        limits.expect_le("Phi(t)/t small at t=1e-8", ratio_small, 1e-2 * ratio_mid, 0.0);
        limits.expect_le("Phi(t)/t large at t=1e8", 1e2 * ratio_mid, ratio_big, 0.0);
    }

    for (double t : plan.t) {
        double inf_phi = std::numeric_limits<double>::infinity();
        for (std::size_t x : plan.nodes) inf_phi = std::min(inf_phi, spec.local(x).Phi(t));
        positivity.expect("inf_x Phi(x,t) > 0", inf_phi > 0.0);
    }

    AxiomReport rep;
    rep.items = {std::move(zero),     std::move(convex), std::move(sqrt_convex),
                 std::move(monotone), std::move(limits), std::move(positivity)};
    rep.finish();
    return rep;
}

/// t^{phi_lower} Phi(x,s) <= Phi(x,ts) <= t^{phi_upper} Phi(x,s) for t >= 1,
/// plus the small-scale variant Phi(x,ts) <= t^{phi_lower} Phi(x,s), t < 1.
inline CheckReport check_scaling_inequality(const NFunctionSpec& spec, const SamplePlan& plan,
                                            const IndexReport& indices) {
    CheckReport rep;
    rep.name = "scaling_inequality";
    for (std::size_t x : plan.nodes) {
        const LocalNFunction f = spec.local(x);
        for (double t : plan.t) {
            if (t < 1.0) continue;
            for (double s : plan.s) {
                const double base = f.Phi(s);
                const double scaled_up = f.Phi(t * s);
                const double lo = std::pow(t, indices.phi_lower) * base;
                const double hi = std::pow(t, indices.phi_upper) * base;
                rep.expect_le("t^{phi_0} Phi(s) <= Phi(ts)", lo, scaled_up, check_tol(scaled_up));
                rep.expect_le("Phi(ts) <= t^{phi^0} Phi(s)", scaled_up, hi, check_tol(hi));
                if (t > 1.0) {
                    const double tinv = 1.0 / t;
                    const double scaled_down = f.Phi(tinv * s);
                    const double small_bound = std::pow(tinv, indices.phi_lower) * base;
                    rep.expect_le("Phi(ts) <= t^{phi_0} Phi(s) for t < 1", scaled_down,
                                  small_bound, check_tol(small_bound));
                }
            }
        }
    }
    return rep;
}

/// Psi(x,t) <= k1 * Phi(x, k2*t) + h_const over the sample plan.
inline CheckReport check_domination(const NFunctionSpec& spec_psi, const NFunctionSpec& spec_phi,
                                    double k1, double k2, double h_const,
                                    const SamplePlan& plan) {
    if (!(k1 > 0.0) || !(k2 > 0.0))
        throw std::invalid_argument("check_domination: k1, k2 must be positive");
    if (h_const < 0.0) throw std::invalid_argument("check_domination: h_const must be >= 0");
    CheckReport rep;
    rep.name = "domination";
    for (std::size_t x : plan.nodes) {
        const LocalNFunction psi = spec_psi.local(spec_psi.x_dependent() ? x : 0);
        const LocalNFunction phi_ = spec_phi.local(spec_phi.x_dependent() ? x : 0);
        for (double t : plan.t) {
            const double lhs = psi.Phi(t);
            const double rhs = k1 * phi_.Phi(k2 * t) + h_const;
            rep.expect_le("Psi(x,t) <= k1 Phi(x,k2 t) + h", lhs, rhs, check_tol(rhs));
        }
    }
    return rep;
}

}  // namespace mos
