#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mos/exec.hpp"
#include "mos/expression.hpp"
#include "mos/pgm.hpp"
#include "mos/solver.hpp"

// Variable-exponent image restoration: minimizes
//   E(u) = sum_cells |grad u|^{p(x)} + lambda * sum_pixels (u - u0)^2
// on the pixel lattice (unit spacing, inter-pixel cells) by smoothed descent.
// No positivity projection; the free boundary of the discrete energy acts as
// the zero-flux condition.

namespace mos {

enum class PMapRule { expression, adaptive };

struct DenoiseConfig {
    double lambda = 0.05;
    PMapRule rule = PMapRule::adaptive;
    Expression p_expr;      // PMapRule::expression, over normalized (x, y)
    double p_k = 100.0;     // adaptive edge sensitivity
    double delta = 1e-6;    // coefficient regularization (p < 2 needs it)
    double grad_tol = 1e-6;
    int max_iters = 2000;
    double step0 = 1.0;
    double backtrack = 0.5;
    double armijo = 1e-4;
};

struct DenoiseResult {
    PgmImage output;
    std::vector<double> p_map;         // per pixel after clamping
    std::vector<double> energy_trace;  // E per accepted iterate, trace[0] = E(u0)
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double max_pixel_change = 0.0;
    double clamped_fraction = 0.0;  // pixels whose p left [1+1e-3, 2]
    int iterations = 0;
};

namespace detail {

struct DenoiseWorkspace {
    int w = 0, h = 0;
    std::vector<double> p_cells;  // corner-averaged exponent per cell
    double lambda = 0.0;
    const std::vector<double>* u0 = nullptr;

    std::size_t cells() const {
        return static_cast<std::size_t>(w - 1) * static_cast<std::size_t>(h - 1);
    }

    double energy(const std::vector<double>& u) const {
        std::vector<double> cell_vals(cells());
        const int cw = w - 1;
        exec::parallel_for(cells(), [&](std::size_t c) {
            const int j = static_cast<int>(c) / cw;
            const int i = static_cast<int>(c) % cw;
            const std::size_t n0 = static_cast<std::size_t>(j) * w + i;
            const double gx = u[n0 + 1] - u[n0];
            const double gy = u[n0 + w] - u[n0];
            cell_vals[c] = std::pow(std::sqrt(gx * gx + gy * gy), p_cells[c]);
        });
        double e = exec::tree_sum(cell_vals);
        std::vector<double> fid(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double d = u[k] - (*u0)[k];
            fid[k] = d * d;
        }
        return e + lambda * exec::tree_sum(fid);
    }

    std::vector<double> grad(const std::vector<double>& u, double delta) const {
        std::vector<double> g(u.size(), 0.0);
        const int cw = w - 1;
        std::vector<double> fx(cells()), fy(cells());
        exec::parallel_for(cells(), [&](std::size_t c) {
            const int j = static_cast<int>(c) / cw;
            const int i = static_cast<int>(c) % cw;
            const std::size_t n0 = static_cast<std::size_t>(j) * w + i;
            const double gx = u[n0 + 1] - u[n0];
            const double gy = u[n0 + w] - u[n0];
            const double m = std::sqrt(gx * gx + gy * gy + delta * delta);
            const double a = m == 0.0 ? 0.0 : p_cells[c] * std::pow(m, p_cells[c] - 2.0);
            fx[c] = a * gx;
            fy[c] = a * gy;
        });
        for (std::size_t c = 0; c < cells(); ++c) {
            const int j = static_cast<int>(c) / cw;
            const int i = static_cast<int>(c) % cw;
            const std::size_t n0 = static_cast<std::size_t>(j) * w + i;
            g[n0] -= fx[c] + fy[c];
            g[n0 + 1] += fx[c];
            g[n0 + w] += fy[c];
        }
        for (std::size_t k = 0; k < u.size(); ++k) g[k] += 2.0 * lambda * (u[k] - (*u0)[k]);
        return g;
    }
};

}  // namespace detail

/// Builds the pixel exponent map and clamps it into [1 + 1e-3, 2]; exponents
/// at exactly 1 violate the standing superlinearity assumption, so the lift
/// is applied and reported rather than silently accepted.
inline std::vector<double> denoise_p_map(const PgmImage& img, const DenoiseConfig& cfg,
                                         double* clamped_fraction) {
    const int w = img.width, h = img.height;
    std::vector<double> p(static_cast<std::size_t>(w) * h, 2.0);
    if (cfg.rule == PMapRule::expression) {
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i)
                p[static_cast<std::size_t>(j) * w + i] =
                    cfg.p_expr.eval(w > 1 ? static_cast<double>(i) / (w - 1) : 0.0,
                                    h > 1 ? static_cast<double>(j) / (h - 1) : 0.0);
    } else {
        // p ~ 1 where the observed image has strong edges, p ~ 2 on flat areas.
        for (int j = 0; j < h; ++j) {
            for (int i = 0; i < w; ++i) {
                const int il = std::max(i - 1, 0), ir = std::min(i + 1, w - 1);
                const int jl = std::max(j - 1, 0), jr = std::min(j + 1, h - 1);
                const double gx = ir > il ? (img.at(ir, j) - img.at(il, j)) / (ir - il) : 0.0;
                const double gy = jr > jl ? (img.at(i, jr) - img.at(i, jl)) / (jr - jl) : 0.0;
                const double m2 = gx * gx + gy * gy;
                p[static_cast<std::size_t>(j) * w + i] = 1.0 + 1.0 / (1.0 + cfg.p_k * m2);
            }
        }
    }
    long clamped = 0;
    for (double& v : p) {
        const double orig = v;
        v = std::min(2.0, std::max(1.0 + 1e-3, v));
        if (v != orig) ++clamped;
    }
    if (clamped_fraction)
        *clamped_fraction = static_cast<double>(clamped) / static_cast<double>(p.size());
    return p;
}

inline DenoiseResult denoise_run(const PgmImage& img, const DenoiseConfig& cfg) {
    if (img.width < 2 || img.height < 2)
        throw std::invalid_argument("denoise: image must be at least 2x2");
    if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("denoise: lambda must be >= 0");

    DenoiseResult res;
    res.p_map = denoise_p_map(img, cfg, &res.clamped_fraction);

    detail::DenoiseWorkspace ws;
    ws.w = img.width;
    ws.h = img.height;
    ws.lambda = cfg.lambda;
    ws.u0 = &img.pixels;
    ws.p_cells.resize(ws.cells());
    const int cw = ws.w - 1;
    for (std::size_t c = 0; c < ws.cells(); ++c) {
        const int j = static_cast<int>(c) / cw;
        const int i = static_cast<int>(c) % cw;
        const std::size_t n0 = static_cast<std::size_t>(j) * ws.w + i;
        ws.p_cells[c] = 0.25 * (res.p_map[n0] + res.p_map[n0 + 1] + res.p_map[n0 + ws.w] +
                                res.p_map[n0 + ws.w + 1]);
    }

    std::vector<double> u = img.pixels;
    double E = ws.energy(u);
    res.energy_initial = E;
    res.energy_trace.push_back(E);
    double step = cfg.step0;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const std::vector<double> g = ws.grad(u, cfg.delta);
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax <= cfg.grad_tol * (1.0 + std::abs(E))) break;

        bool accepted = false;
        std::vector<double> u_try(u.size());
        double E_try = 0.0;
        while (step >= 1e-16) {
            double move_sq = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) {
                u_try[k] = u[k] - step * g[k];
                const double d = u_try[k] - u[k];
                move_sq += d * d;
            }
            E_try = ws.energy(u_try);
            if (E_try <= E - (cfg.armijo / step) * move_sq) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack;
        }
        if (!accepted) break;  // no further descent representable
        if (E_try > E)
            throw solver_error("denoise: energy increased during descent");
        u.swap(u_try);
        E = E_try;
        res.energy_trace.push_back(E);
        step = std::min(step / cfg.backtrack, 1e6);
    }
    res.iterations = it;
    res.energy_final = E;
    res.output.width = img.width;
    res.output.height = img.height;
    res.output.pixels = std::move(u);
    for (std::size_t k = 0; k < res.output.pixels.size(); ++k)
        res.max_pixel_change =
            std::max(res.max_pixel_change, std::abs(res.output.pixels[k] - img.pixels[k]));
    return res;
}

}  // namespace mos
