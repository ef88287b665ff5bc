#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mos/oracle.hpp"
#include "mos/solver.hpp"

using namespace mos;
using Catch::Approx;

namespace {

Field const_field(const Grid& g, double v, bool dirichlet = false) {
    Field f(g, dirichlet);
    for (double& x : f.v) x = v;
    f.enforce_boundary();
    return f;
}

ProblemSpec reference_1d() {
    const Grid g = Grid::line(1.0, 6);
    return ProblemSpec::make(g, NFunctionSpec::power(2.0), KirchhoffSpec::power(2.0, 2.0),
                             const_field(g, 1.0), const_field(g, 0.5));
}

}  // namespace

TEST_CASE("solver config validation", "[solver]") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.eps_ladder = {1e-2, 1e-2};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.backtrack = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("reference problem: negative energy, interior positivity, stationarity", "[solver]") {
    const ProblemSpec p = reference_1d();
    std::vector<TraceRow> trace;
    const SolveReport rep = minimize(p, SolverConfig{}, std::nullopt, &trace);

    CHECK(rep.energy.total < 0.0);
    CHECK(rep.min_interior_value > 0.0);
    REQUIRE(rep.residual_defined);
    CHECK(rep.residual_norm < 1e-4);
    CHECK(rep.scale_stationarity < 1e-4 * (1.0 + std::abs(rep.energy.total)));
    CHECK_FALSE(rep.cutoff_activated);

    // Projection invariants: nonnegative everywhere, exact zeros on the boundary.
    for (double v : rep.u_star.v) CHECK(v >= 0.0);
    CHECK(rep.u_star.v.front() == 0.0);
    CHECK(rep.u_star.v.back() == 0.0);

    // Energy is nonincreasing within every rung.
    for (std::size_t k = 1; k < trace.size(); ++k)
        if (trace[k].rung == trace[k - 1].rung)
            CHECK(trace[k].energy_smoothed <= trace[k - 1].energy_smoothed + 1e-12);

    // The recomputed breakdown matches an independent evaluation.
    CHECK(rep.energy.total == Approx(oracle_energy(p, rep.u_star)).epsilon(1e-12));
}

TEST_CASE("trivial weight gives the zero minimizer", "[solver]") {
    const ProblemSpec p = reference_1d();
    const ProblemSpec pz = ProblemSpec::unchecked(p.grid, p.nfunction, p.kirchhoff,
                                                  const_field(p.grid, 0.0),
                                                  const_field(p.grid, 0.5));
    const SolveReport rep = minimize(pz, SolverConfig{});
    CHECK(rep.energy.total == 0.0);
    for (double v : rep.u_star.v) CHECK(v == 0.0);
}

TEST_CASE("solver agrees with the brute-force oracle on the reference problem", "[solver]") {
    const ProblemSpec p = reference_1d();
    const SolveReport rep = minimize(p, SolverConfig{});
    const OracleResult orc = brute_force_oracle(p);
    CHECK_FALSE(orc.budget_exhausted);
    CHECK(std::abs(rep.energy.total - orc.energy) < 1e-6);
    CHECK(modular_rho(p.nfunction, lincomb(1.0, rep.u_star, -1.0, orc.u)) < 1e-6);
}

TEST_CASE("oracle handles the degenerate and quadratic regimes", "[solver]") {
    const Grid g = Grid::line(1.0, 6);
    const ProblemSpec pz = ProblemSpec::unchecked(g, NFunctionSpec::power(2.0),
                                                  KirchhoffSpec::power(2.0, 2.0),
                                                  const_field(g, 0.0), const_field(g, 0.5));
    const OracleResult zero = brute_force_oracle(pz);
    for (double v : zero.u.v) CHECK(v == Approx(0.0).margin(1e-9));

    // Quadratic limit: A == 1, gamma -> 0 makes the singular term linear, so
    // the minimizer solves 2 K u = f for the stiffness K and load f from the
    // corner-average quadrature. Dense Gaussian elimination is the oracle.
    const double gamma_tiny = 1e-12;
    const ProblemSpec quad = ProblemSpec::make(g, NFunctionSpec::power(2.0),
                                               KirchhoffSpec::constant_unchecked(1.0),
                                               const_field(g, 1.0),
                                               const_field(g, gamma_tiny));
    const OracleResult orc = brute_force_oracle(quad);

    const int n = 5;  // interior nodes
    const double h = 1.0 / 6.0;
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    std::vector<double> rhs(n, 0.0);
    for (int i = 0; i < n; ++i) {
        A[i][i] = 2.0 * (2.0 / h);
        if (i > 0) A[i][i - 1] = 2.0 * (-1.0 / h);
        if (i + 1 < n) A[i][i + 1] = 2.0 * (-1.0 / h);
        rhs[i] = h;  // d/du_i of sum_cells h * ubar_c with two adjacent cells
    }
    for (int col = 0; col < n; ++col) {
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c2 = col; c2 < n; ++c2) A[r][c2] -= f * A[col][c2];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = rhs[r];
        for (int c2 = r + 1; c2 < n; ++c2) acc -= A[r][c2] * x[c2];
        x[r] = acc / A[r][r];
    }
    for (int i = 0; i < n; ++i)
        CHECK(orc.u.v[static_cast<std::size_t>(i) + 1] == Approx(x[i]).margin(1e-10));
}

TEST_CASE("multistart agreement in the bounded regime", "[solver]") {
    const Grid g = Grid::line(1.0, 8);
    const ProblemSpec p = ProblemSpec::make(g, NFunctionSpec::power(2.0),
                                            KirchhoffSpec::bounded(1.0, 2.0, 2.0),
                                            const_field(g, 1.0), const_field(g, 0.5));
    SolverConfig cfg;
    cfg.seed = 7;
    const MultistartReport rep = multistart_uniqueness(p, cfg, 5);
    CHECK(rep.passed);
    CHECK(rep.max_pair_modular < rep.tolerance);
    CHECK(rep.energy_spread < 1e-8 * (1.0 + std::abs(rep.runs[0].energy.total)));

    // Identical seeds reproduce identical fields bitwise.
    const MultistartReport again = multistart_uniqueness(p, cfg, 2);
    for (std::size_t k = 0; k < again.runs[0].u_star.v.size(); ++k)
        CHECK(again.runs[0].u_star.v[k] == rep.runs[0].u_star.v[k]);

    const ProblemSpec not_declared = reference_1d();
    CHECK_THROWS_AS(multistart_uniqueness(not_declared, cfg, 2), std::invalid_argument);

    // Convex quadratic limit (constant coefficient, near-linear forcing):
    // every start lands on the unique quadratic minimum.
    const ProblemSpec quad = ProblemSpec::make(g, NFunctionSpec::power(2.0),
                                               KirchhoffSpec::bounded(1.0, 1.0, 2.0),
                                               const_field(g, 1.0), const_field(g, 1e-9));
    const MultistartReport mq = multistart_uniqueness(quad, cfg, 3);
    CHECK(mq.passed);
    CHECK(mq.max_pair_modular < mq.tolerance);
}

TEST_CASE("uniqueness certificate signs", "[solver]") {
    const Grid g = Grid::line(1.0, 8);
    const ProblemSpec p = ProblemSpec::make(g, NFunctionSpec::elasticity(2.0),
                                            KirchhoffSpec::bounded(1.0, 2.0, 4.0),
                                            const_field(g, 1.0), const_field(g, 0.5));
    Rng rng(11);
    auto positive_field = [&](double amp) {
        Field u(g, true);
        for (double& x : u.v) x = 0.05 + amp * rng.u01();
        u.enforce_boundary();
        return u;
    };

    const Field u = positive_field(1.0);
    const CertificateReport same = uniqueness_certificate(p, u, u, 0.01);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);
    CHECK(same.strong_mono == 0.0);

    const double c_delta = 0.01 * std::min({1.0, p.kirchhoff.a_lower, p.kirchhoff.c_lower});
    double min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
        const Field a = positive_field(0.5 + rng.u01());
        const Field b = positive_field(0.5 + rng.u01());
        const CertificateReport rep = uniqueness_certificate(p, a, b, c_delta);
        CHECK(rep.rhs_nonpositive);
        CHECK(rep.rhs <= 1e-12);
        CHECK(rep.lhs >= -1e-12);
        min_margin = std::min(min_margin, rep.strong_mono);
    }
    CHECK(min_margin >= 0.0);

    Field nonpos = u;
    nonpos.v[g.node_id(2)] = 0.0;
    CHECK_THROWS_AS(uniqueness_certificate(p, nonpos, u, c_delta), std::domain_error);
}

TEST_CASE("default start handles nontrivial and trivial weights", "[solver]") {
    const ProblemSpec p = reference_1d();
    const Field start = default_start(p);
    CHECK(energy(p, start).total < 0.0);

    const ProblemSpec pz = ProblemSpec::unchecked(p.grid, p.nfunction, p.kirchhoff,
                                                  const_field(p.grid, 0.0),
                                                  const_field(p.grid, 0.5));
    const Field zstart = default_start(pz);
    for (double v : zstart.v) CHECK(v == 0.0);
}

TEST_CASE("2d reference analog solves to tolerance", "[solver]") {
    const Grid g = Grid::rect(1.0, 1.0, 8, 8);
    const ProblemSpec p = ProblemSpec::make(g, NFunctionSpec::power(2.0),
                                            KirchhoffSpec::power(2.0, 2.0),
                                            const_field(g, 1.0), const_field(g, 0.5));
    const SolveReport rep = minimize(p, SolverConfig{});
    CHECK(rep.energy.total < 0.0);
    CHECK(rep.min_interior_value > 0.0);
    REQUIRE(rep.residual_defined);
    CHECK(rep.residual_norm < 1e-4);
    CHECK(rep.scale_stationarity < 1e-4 * (1.0 + std::abs(rep.energy.total)));
}
