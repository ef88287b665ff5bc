#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

namespace mos {

// ---------------------------------------------------------------------------
// Adaptive quadrature (Gauss 7 / Kronrod 15 pair, interval bisection).
// ---------------------------------------------------------------------------

namespace detail {

// QUADPACK dqk15 abscissae/weights on [-1, 1].
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = kGK15Weights[7] * f(c);
    double resg = kG7Weights[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double x = h * kGK15Nodes[i];
        const double fsum = f(c - x) + f(c + x);
        resk += kGK15Weights[i] * fsum;
        if (i % 2 == 1) resg += kG7Weights[i / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

template <class F>
double adapt_quad_rec(const F& f, double a, double b, double tol, int depth) {
    double val, err;
    gk15(f, a, b, val, err);
    // The absolute tolerance is floored by a relative one: the Gauss/Kronrod
    // difference bottoms out near 3e-15 * |val| in round-off, so anything
    // below 2e-14 * |val| is unreachable and would split forever.
    const double tol_eff = std::max(tol, 2e-14 * std::abs(val));
    const bool width_exhausted = (b - a) <= 1e-14 * (std::abs(a) + std::abs(b));
    if (err <= tol_eff || width_exhausted || depth >= 48) return val;
    const double m = 0.5 * (a + b);
    return adapt_quad_rec(f, a, m, 0.5 * tol, depth + 1) +
           adapt_quad_rec(f, m, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Integrates f over [a, b] with absolute tolerance tol.
template <class F>
double adapt_quad(const F& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    return detail::adapt_quad_rec(f, a, b, tol, 0);
}

// ---------------------------------------------------------------------------
// 1-D searches.
// ---------------------------------------------------------------------------

/// Golden-section minimization of a unimodal f on [a, b] to relative
/// abscissa tolerance rel_tol. Returns (argmin, f(argmin)).
template <class F>
std::pair<double, double> golden_min(const F& f, double a, double b,
                                     double rel_tol = 1e-10, int max_iter = 200) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && (b - a) > rel_tol * (std::abs(a) + std::abs(b) + 1e-300);
         ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

/// Golden-section maximization; returns (argmax, f(argmax)).
template <class F>
std::pair<double, double> golden_max(const F& f, double a, double b,
                                     double rel_tol = 1e-10, int max_iter = 200) {
    auto [x, negval] = golden_min([&f](double t) { return -f(t); }, a, b, rel_tol, max_iter);
    return {x, -negval};
}

// ---------------------------------------------------------------------------
// Deterministic random samples (mt19937_64 with an explicit 53-bit uniform,
// so streams do not depend on the standard library's distribution choices).
// ---------------------------------------------------------------------------

struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double u01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Log-uniform in [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
};

}  // namespace mos
