// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code; runtime budgets are
// checked with wall clocks.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mos/cli.hpp"
#include "mos/denoise.hpp"
#include "mos/energy.hpp"
#include "mos/modular.hpp"
#include "mos/nfunction.hpp"
#include "mos/oracle.hpp"
#include "mos/solver.hpp"

using namespace mos;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, const std::string& what, bool ok, double secs, double budget) {
    const bool in_budget = budget <= 0.0 || secs < budget;
    if (!ok || !in_budget) ++g_failures;
    std::printf("[%s] criterion %d: %s (%.2fs%s)\n", ok && in_budget ? "PASS" : "FAIL",
                criterion, what.c_str(), secs,
                budget > 0.0 ? (" / budget " + std::to_string(static_cast<int>(budget)) + "s").c_str()
                             : "");
    std::fflush(stdout);
}

Field const_field(const Grid& g, double v, bool dirichlet = false) {
    Field f(g, dirichlet);
    for (double& x : f.v) x = v;
    f.enforce_boundary();
    return f;
}

Field random_dirichlet(const Grid& g, Rng& rng, double amp) {
    Field u(g, true);
    for (double& x : u.v) x = amp * (2.0 * rng.u01() - 1.0);
    u.enforce_boundary();
    return u;
}

std::vector<std::pair<std::string, NFunctionSpec>> acceptance_families() {
    return {
        {"power(2)", NFunctionSpec::power(2.0)},
        {"power(2.5)", NFunctionSpec::power(2.5)},
        {"power(3)", NFunctionSpec::power(3.0)},
        {"elasticity(1)", NFunctionSpec::elasticity(1.0)},
        {"elasticity(2)", NFunctionSpec::elasticity(2.0)},
        {"elasticity(3)", NFunctionSpec::elasticity(3.0)},
        {"plasticity(2,1)", NFunctionSpec::plasticity(2.0, 1.0)},
        {"plasticity(3,1)", NFunctionSpec::plasticity(3.0, 1.0)},
        {"plasticity(2,2)", NFunctionSpec::plasticity(2.0, 2.0)},
        {"newtonian(0,1)", NFunctionSpec::newtonian(0.0, 1.0)},
        {"newtonian(0,2)", NFunctionSpec::newtonian(0.0, 2.0)},
        {"newtonian(0,0.5)", NFunctionSpec::newtonian(0.0, 0.5)},
    };
}

// --- criterion 1 -----------------------------------------------------------
// N-function battery: axioms, Young (100 samples), scaling (100 samples) for
// all four families at three settings each; negative control flagged.
void criterion_1() {
    Timer timer;
    bool ok = true;
    std::string detail;
    for (const auto& [name, spec] : acceptance_families()) {
        // 150 t samples -> 11175 midpoint pairs per axiom scan.
        SamplePlan axiom_plan = SamplePlan::log_random(1001, 150, 10, 1e-4, 1e4);
        axiom_plan.with_nodes_of(spec);
        if (!check_axioms(spec, axiom_plan).passed) {
            ok = false;
            detail += " axioms:" + name;
        }
        SamplePlan young_plan = SamplePlan::log_random(1002, 10, 10, 1e-2, 10.0);
        if (!check_young(spec, young_plan).passed) {
            ok = false;
            detail += " young:" + name;
        }
        const IndexReport idx = estimate_indices(spec);
        SamplePlan scale_plan = SamplePlan::log_random(1003, 10, 10, 1e-2, 1e2);
        if (!check_scaling_inequality(spec, scale_plan, idx).passed) {
            ok = false;
            detail += " scaling:" + name;
        }
    }
    SamplePlan plan = SamplePlan::log_random(1001, 60, 10, 1e-4, 1e4);
    const AxiomReport bad = check_axioms(NFunctionSpec::unchecked(NFamily::elasticity, 0.4, 0.0), plan);
    if (bad.passed) {
        ok = false;
        detail += " negative-control-not-flagged";
    }
    report(1, "N-function battery, 4 families x 3 settings + negative control" + detail, ok,
           timer.seconds(), 10.0);
}

// --- criterion 2 -----------------------------------------------------------
// Modular-norm suite: 200 random fields x 4 families.
void criterion_2() {
    Timer timer;
    bool ok = true;
    const Grid g = Grid::line(1.0, 12);
    const std::vector<NFunctionSpec> fams = {
        NFunctionSpec::power(2.0), NFunctionSpec::elasticity(2.0),
        NFunctionSpec::plasticity(2.0, 1.0), NFunctionSpec::newtonian(0.0, 1.0)};
    std::vector<IndexReport> idx;
    for (const auto& f : fams) idx.push_back(estimate_indices(f));

    Rng rng(2024);
    Field prev(g, true);
    bool have_prev = false;
    for (int k = 0; k < 200 && ok; ++k) {
        const Field u = random_dirichlet(g, rng, 0.1 + 3.0 * rng.u01());
        for (std::size_t fi = 0; fi < fams.size() && ok; ++fi) {
            const NFunctionSpec& spec = fams[fi];
            const NormReport nr = check_modular_norm_relations(spec, u, idx[fi]);
            ok = ok && nr.passed;
            if (nr.luxemburg > 0.0) {
                CellField f = magnitude(gradient(u));
                for (double& x : f.v) x /= nr.luxemburg;
                ok = ok && std::abs(modular(spec, f) - 1.0) <= 1e-7;
                for (double c : {0.1, 2.0, 10.0}) {
                    CellField cf = magnitude(gradient(u));
                    for (double& x : cf.v) x *= c;
                    const double ln = luxemburg_norm(spec, cf);
                    ok = ok && std::abs(ln - c * nr.luxemburg) <= 1e-9 * (1.0 + c * nr.luxemburg);
                }
                if (have_prev) {
                    const double nu = nr.luxemburg;
                    const double nv = luxemburg_norm(spec, magnitude(gradient(prev)));
                    const double nsum =
                        luxemburg_norm(spec, magnitude(gradient(lincomb(1.0, u, 1.0, prev))));
                    ok = ok && nsum <= nu + nv + 1e-9;
                }
            }
        }
        prev = u;
        have_prev = true;
    }
    report(2, "modular-norm suite, 200 fields x 4 families", ok, timer.seconds(), 30.0);
}

// --- criterion 3 -----------------------------------------------------------
// Gradient correctness: analytic vs central differences, 20 directions x 5
// problems, relative error < 1e-5.
void criterion_3() {
    Timer timer;
    bool ok = true;
    std::vector<ProblemSpec> problems;
    const Grid g1 = Grid::line(1.0, 6);
    const Grid g2 = Grid::rect(1.0, 1.0, 5, 5);
    const Field pmap = sample_on_nodes(g2, [](double x, double y) { return 2.0 + 0.5 * x * y; });
    problems.push_back(ProblemSpec::make(g1, NFunctionSpec::power(2.0),
                                         KirchhoffSpec::power(2.0, 2.0), const_field(g1, 1.0),
                                         const_field(g1, 0.5)));
    problems.push_back(ProblemSpec::make(g2, NFunctionSpec::power_map(pmap),
                                         KirchhoffSpec::power(2.0, 2.0), const_field(g2, 1.0),
                                         const_field(g2, 0.5)));
    problems.push_back(ProblemSpec::make(g1, NFunctionSpec::elasticity(2.0),
                                         KirchhoffSpec::bounded(1.0, 2.0, 4.0),
                                         const_field(g1, 1.0), const_field(g1, 0.3)));
    problems.push_back(ProblemSpec::make(g1, NFunctionSpec::plasticity(2.0, 1.0),
                                         KirchhoffSpec::power(1.5, 2.5, 1.2, 2.0),
                                         const_field(g1, 2.0), const_field(g1, 0.7)));
    problems.push_back(ProblemSpec::make(g2, NFunctionSpec::newtonian(0.0, 1.0),
                                         KirchhoffSpec::bounded(0.5, 3.0),
                                         const_field(g2, 1.0), const_field(g2, 0.5)));
    Rng rng(3003);
    const double eps = 1e-3, h = 1e-6;
    double worst = 0.0;
    for (const auto& p : problems) {
        for (int dir = 0; dir < 20; ++dir) {
            Field u(p.grid, true), v(p.grid, true);
            for (double& x : u.v) x = 0.2 + rng.u01();
            for (double& x : v.v) x = 2.0 * rng.u01() - 1.0;
            u.enforce_boundary();
            v.enforce_boundary();
            const Field grad = energy_gradient(p, u, eps, 0.0);
            double analytic = 0.0;
            for (std::size_t k = 0; k < grad.v.size(); ++k) analytic += grad.v[k] * v.v[k];
            const double fd = (energy_smoothed(p, lincomb(1.0, u, h, v), eps) -
                               energy_smoothed(p, lincomb(1.0, u, -h, v), eps)) /
                              (2.0 * h);
            const double rel = std::abs(analytic - fd) / std::max(1e-12, std::abs(fd));
            worst = std::max(worst, rel);
            ok = ok && rel < 1e-5;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, " (worst rel err %.2e)", worst);
    report(3, "gradient vs central differences, 20 dirs x 5 problems" + std::string(buf), ok,
           timer.seconds(), 0.0);
}

// --- criterion 4 -----------------------------------------------------------
// Existence/sign/positivity on the 1D reference problem and the 16x16 analog.
void criterion_4() {
    Timer timer;
    bool ok = true;
    std::string detail;
    auto run_one = [&](const Grid& g, const char* tag) {
        const ProblemSpec p =
            ProblemSpec::make(g, NFunctionSpec::power(2.0), KirchhoffSpec::power(2.0, 2.0),
                              const_field(g, 1.0), const_field(g, 0.5));
        const SolveReport rep = minimize(p, SolverConfig{});
        const bool good = rep.energy.total < 0.0 && rep.min_interior_value > 0.0 &&
                          rep.residual_defined && rep.residual_norm < 1e-4 &&
                          rep.scale_stationarity < 1e-4 * (1.0 + std::abs(rep.energy.total));
        if (!good) {
            ok = false;
            detail += std::string(" ") + tag + ":failed";
        }
    };
    run_one(Grid::line(1.0, 6), "1d");
    run_one(Grid::rect(1.0, 1.0, 16, 16), "2d16");
    report(4, "existence/sign/positivity/residual on 1D + 2D 16x16" + detail, ok,
           timer.seconds(), 60.0);
}

// --- criterion 5 -----------------------------------------------------------
// Oracle equivalence on 10 random tiny instances with mixed families.
void criterion_5() {
    Timer timer;
    bool ok = true;
    std::string detail;
    Rng rng(5005);
    for (int inst = 0; inst < 10; ++inst) {
        const int cells = 5 + static_cast<int>(rng.u01() * 4.99);  // 5..9 cells, <= 8 interior
        const Grid g = Grid::line(1.0, cells);
        NFunctionSpec nf = NFunctionSpec::power(2.0);
        switch (inst % 5) {
            case 0: nf = NFunctionSpec::power(2.0 + rng.u01()); break;
            case 1: nf = NFunctionSpec::power(2.0, 0.5 + rng.u01()); break;
            case 2: nf = NFunctionSpec::elasticity(1.5 + rng.u01()); break;
            case 3: nf = NFunctionSpec::plasticity(2.0, 1.0); break;
            case 4: nf = NFunctionSpec::newtonian(0.0, 1.0); break;
        }
        const KirchhoffSpec k = inst % 2 ? KirchhoffSpec::bounded(1.0, 2.0)
                                         : KirchhoffSpec::power(2.0, 2.0);
        const Expression gexpr = Expression::parse(inst % 3 ? "1 + x" : "1");
        const Field gw = sample_on_nodes(g, [&](double x, double y) { return gexpr.eval(x, y); });
        const Field gam = const_field(g, 0.3 + 0.4 * rng.u01());
        const ProblemSpec p = ProblemSpec::make(g, nf, k, gw, gam);

        const SolveReport rep = minimize(p, SolverConfig{});
        const OracleResult orc = brute_force_oracle(p);
        const double dj = std::abs(rep.energy.total - orc.energy);
        const double dr = modular_rho(p.nfunction, lincomb(1.0, rep.u_star, -1.0, orc.u));
        if (!(dj < 1e-6 && dr < 1e-6)) {
            ok = false;
            char buf[96];
            std::snprintf(buf, sizeof buf, " inst%d(dJ=%.2e,drho=%.2e)", inst, dj, dr);
            detail += buf;
        }
    }
    report(5, "solver vs brute-force oracle on 10 tiny instances" + detail, ok, timer.seconds(),
           0.0);
}

// --- criterion 6 -----------------------------------------------------------
// Uniqueness in the bounded regime: multistart + certificate sign.
void criterion_6() {
    Timer timer;
    bool ok = true;
    std::string detail;
    const Grid g1 = Grid::line(1.0, 8);
    const Grid g2 = Grid::line(1.0, 10);
    const Grid g3 = Grid::rect(1.0, 1.0, 6, 6);
    std::vector<ProblemSpec> problems;
    problems.push_back(ProblemSpec::make(g1, NFunctionSpec::power(2.0),
                                         KirchhoffSpec::bounded(1.0, 2.0, 2.0),
                                         const_field(g1, 1.0), const_field(g1, 0.5)));
    problems.push_back(ProblemSpec::make(g2, NFunctionSpec::power(2.0, 0.5),
                                         KirchhoffSpec::bounded(0.5, 1.5, 1.0),
                                         const_field(g2, 2.0), const_field(g2, 0.3)));
    problems.push_back(ProblemSpec::make(g3, NFunctionSpec::elasticity(2.0),
                                         KirchhoffSpec::bounded(1.0, 2.0, 4.0),
                                         const_field(g3, 1.0), const_field(g3, 0.5)));
    for (std::size_t i = 0; i < problems.size(); ++i) {
        SolverConfig cfg;
        cfg.seed = 60 + i;
        const MultistartReport rep = multistart_uniqueness(problems[i], cfg, 5);
        if (!rep.passed) {
            ok = false;
            detail += " multistart:" + std::to_string(i);
        }
    }
    // Certificate: rhs <= 0 on 100 random positive pairs, zero violations.
    Rng rng(6006);
    const ProblemSpec& pc = problems[2];
    const double c_delta = 0.01 * std::min({1.0, pc.kirchhoff.a_lower, pc.kirchhoff.c_lower});
    for (int k = 0; k < 100; ++k) {
        Field a(pc.grid, true), b(pc.grid, true);
        for (double& x : a.v) x = 0.05 + rng.u01();
        for (double& x : b.v) x = 0.05 + rng.u01();
        a.enforce_boundary();
        b.enforce_boundary();
        const CertificateReport cert = uniqueness_certificate(pc, a, b, c_delta);
        if (!cert.rhs_nonpositive || cert.rhs > 1e-12) {
            ok = false;
            detail += " certificate:" + std::to_string(k);
            break;
        }
    }
    report(6, "uniqueness: 5 starts x 3 bounded instances + certificate signs" + detail, ok,
           timer.seconds(), 0.0);
}

// --- criterion 7 -----------------------------------------------------------
// Convexity audit: zero violations on nonnegative pairs, 3 problems x 100.
void criterion_7() {
    Timer timer;
    bool ok = true;
    std::string detail;
    const Grid g1 = Grid::line(1.0, 6);
    const Grid g2 = Grid::rect(1.0, 1.0, 8, 8);
    const Grid g3 = Grid::line(1.0, 8);
    std::vector<ProblemSpec> problems;
    problems.push_back(ProblemSpec::make(g1, NFunctionSpec::power(2.0),
                                         KirchhoffSpec::power(2.0, 2.0), const_field(g1, 1.0),
                                         const_field(g1, 0.5)));
    problems.push_back(ProblemSpec::make(g2, NFunctionSpec::power(2.0),
                                         KirchhoffSpec::power(2.0, 2.0), const_field(g2, 1.0),
                                         const_field(g2, 0.5)));
    problems.push_back(ProblemSpec::make(g3, NFunctionSpec::elasticity(2.0),
                                         KirchhoffSpec::bounded(1.0, 2.0, 4.0),
                                         const_field(g3, 1.0), const_field(g3, 0.3)));
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const ConvexityReport rep = check_convexity(problems[i], 100, 7007 + i);
        if (rep.violations != 0) {
            ok = false;
            detail += " problem" + std::to_string(i) + ":" + std::to_string(rep.violations);
        }
    }
    report(7, "convexity audit, 100 trials x 3 problems, nonnegative pairs" + detail, ok,
           timer.seconds(), 0.0);
}

// --- criterion 8 -----------------------------------------------------------
// Denoise energy descent on a synthetic 64x64 step image.
void criterion_8() {
    Timer timer;
    bool ok = true;
    std::string detail;
    PgmImage img;
    img.width = 64;
    img.height = 64;
    img.pixels.resize(64 * 64);
    Rng rng(8008);
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
            img.at(i, j) = std::min(1.0, std::max(0.0, (i < 32 ? 0.25 : 0.75) +
                                                           0.1 * (2.0 * rng.u01() - 1.0)));
    DenoiseConfig cfg;
    cfg.lambda = 0.05;
    cfg.rule = PMapRule::adaptive;
    cfg.p_k = 100.0;
    const DenoiseResult res = denoise_run(img, cfg);
    for (std::size_t k = 1; k < res.energy_trace.size(); ++k)
        if (res.energy_trace[k] > res.energy_trace[k - 1]) {
            ok = false;
            detail += " trace-increase";
            break;
        }
    if (!(res.energy_final < res.energy_initial)) {
        ok = false;
        detail += " no-descent";
    }
    DenoiseConfig strong = cfg;
    strong.lambda = 1e6;
    const DenoiseResult pinned = denoise_run(img, strong);
    if (!(pinned.max_pixel_change < 1e-3)) {
        ok = false;
        detail += " fidelity-drift";
    }
    report(8, "denoise 64x64: monotone descent + strong-fidelity reproduction" + detail, ok,
           timer.seconds(), 0.0);
}

// --- criterion 9 -----------------------------------------------------------
// Determinism: the criterion-4 run via the CLI with 1 and 8 worker threads
// produces byte-identical reports.
std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void criterion_9() {
    Timer timer;
    bool ok = true;
    std::string detail;
    const std::string cli = MOS_CLI_PATH;
    const std::string cfgdir = MOS_CONFIG_DIR;
    for (const char* cfg : {"reference_1d.ini", "reference_2d.ini"}) {
        for (int threads : {1, 8}) {
            const std::string out = std::string("acc_det_") + cfg + "_t" + std::to_string(threads);
            const std::string cmd = cli + " solve " + cfgdir + "/" + cfg + " --out " + out +
                                    " --threads " + std::to_string(threads) +
                                    " >/dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            if (WEXITSTATUS(status) != 0) {
                ok = false;
                detail += std::string(" solve-failed:") + cfg;
            }
        }
        const std::string a = std::string("acc_det_") + cfg + "_t1";
        const std::string b = std::string("acc_det_") + cfg + "_t8";
        if (slurp(a + "/report.json") != slurp(b + "/report.json") ||
            slurp(a + "/u_star.csv") != slurp(b + "/u_star.csv")) {
            ok = false;
            detail += std::string(" bytes-differ:") + cfg;
        }
        if (slurp(a + "/report.json").empty()) {
            ok = false;
            detail += std::string(" empty-report:") + cfg;
        }
    }
    report(9, "byte-identical reports across 1 and 8 worker threads" + detail, ok,
           timer.seconds(), 0.0);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
