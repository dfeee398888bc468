#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nsv/energy.hpp"
#include "nsv/error.hpp"
#include "nsv/integrator.hpp"
#include "nsv/random_fields.hpp"
#include "nsv/spectral.hpp"

using namespace nsv;

namespace {

ModelConfig base(HistoryMode mode = HistoryMode::grid) {
    ModelConfig cfg;
    cfg.grid = Grid::make(2, 16);
    cfg.history.mode = mode;
    cfg.history.M = 128;
    cfg.dt = 1e-2;
    return cfg;
}

// random history with comparable M-norm to the velocity
HistoryField random_history(const ModelConfig& cfg, std::uint64_t seed, double level) {
    HistoryField h = make_history(cfg);
    SpectralField a = random_velocity(cfg.grid, seed, 4, cfg.alpha, 1.0);
    SpectralField b = random_velocity(cfg.grid, seed + 1000, 4, cfg.alpha, 1.0);
    const double w = 0.5 + (seed % 7);
    for (std::size_t i = 1; i < h.nodes(); ++i) {
        const double s = h.sgrid().s[i];
        h.set_node(i, (level * std::sin(w * s)) * a + (level * std::min(s, 1.0)) * b);
    }
    h.sync_moments_from_nodes();
    return h;
}

}  // namespace

TEST_CASE("zero state") {
    ModelConfig cfg = base();
    EnergyReport r = report(make_state(cfg, SpectralField(cfg.grid)), cfg, 1e-2);
    for (double v : {r.E, r.E1, r.Pi, r.Pi1, r.Phi, r.Phi1, r.Psi, r.Psi1, r.Lambda_eps, r.Lambda1, r.norm_u_0,
                     r.norm_u_minus_theta})
        CHECK(v == 0.0);
}

TEST_CASE("unit mode") {
    ModelConfig cfg = base();
    cfg.alpha = 0.1;
    cfg.beta = 0.2;
    cfg.theta = 0.0;
    SpectralField u(cfg.grid);
    u.at(0, static_cast<std::size_t>(cfg.grid->find({0, 1, 0}).index)) = 1.0;
    EnergyReport r = report(make_state(cfg, u), cfg, 1e-2);
    CHECK(r.E == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(r.Psi == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(r.Phi == 0.0);
    CHECK(r.Pi == 0.0);
    CHECK(r.E1 == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(r.Psi1 == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(r.norm_u_0 == doctest::Approx(1.0));
}

TEST_CASE("report internal identities") {
    for (HistoryMode mode : {HistoryMode::grid, HistoryMode::prony}) {
        ModelConfig cfg = base(mode);
        cfg.theta = 0.3;
        State s = make_state(cfg, random_velocity(cfg.grid, 3, 4, cfg.alpha, 1.0));
        s.eta = random_history(cfg, 3, 0.5);
        EnergyReport r = report(s, cfg, 1e-2);
        CHECK(r.E == doctest::Approx(0.5 * (r.norm_u_0 * r.norm_u_0 + cfg.alpha * r.norm_u_1 * r.norm_u_1 + r.memory)));
        CHECK(r.Pi >= 0.0);
        CHECK(r.Pi1 >= 0.0);
        CHECK(r.Psi >= 0.0);
        CHECK(r.Pi >= 0.5 * s.eta.delta() * r.memory * (1.0 - 1e-3));
        const double nu = nu0(cfg, s.eta.kappa(), s.eta.delta());
        CHECK(r.Lambda_eps == doctest::Approx(r.E + nu * 1e-2 * r.Phi + 1e-4 * r.Psi));
    }
}

TEST_CASE("norm equivalence sweep") {
    ModelConfig cfg = base();
    const Kernel& k = cfg.kernel;
    const double emax = epsilon_max(cfg, total_mass(k), dafermos_rate(k));
    MESSAGE("epsilon_max " << emax);
    CHECK(emax >= 1e-2);
    double worst_lo = 10.0, worst_hi = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        State s = make_state(cfg, random_velocity(cfg.grid, 100 + trial, 4, cfg.alpha, 1.0));
        s.eta = random_history(cfg, 200 + trial, 0.2 + 0.1 * (trial % 10));
        for (double eps : {1e-3, 1e-2, emax}) {
            EnergyReport r = report(s, cfg, eps);
            worst_lo = std::min({worst_lo, r.Lambda_eps / r.E, r.Lambda1 / r.E1});
            worst_hi = std::max({worst_hi, r.Lambda_eps / r.E, r.Lambda1 / r.E1});
        }
    }
    MESSAGE("Lambda/E in [" << worst_lo << ", " << worst_hi << "]");
    CHECK(worst_lo >= 0.5);
    CHECK(worst_hi <= 2.0);
}

TEST_CASE("fit_decay") {
    std::vector<double> t, a, b, c;
    for (int i = 0; i <= 400; ++i) {
        const double x = 0.05 * i;
        t.push_back(x);
        a.push_back(3.0 * std::exp(-0.7 * x));
        b.push_back(std::exp(-x) * (2.0 + std::cos(x)));
        c.push_back(4.2);
    }
    DecayFit f = fit_decay(t, a, 0.0, 20.0);
    CHECK(f.omega == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    DecayFit g = fit_decay(t, b, 0.0, 20.0);
    CHECK(g.omega >= 0.9);
    CHECK(g.omega <= 1.1);
    CHECK(fit_decay(t, c, 0.0, 20.0).omega == 0.0);
    std::vector<double> bad = a;
    bad[10] = 0.0;
    CHECK_THROWS_AS(fit_decay(t, bad, 0.0, 20.0), DomainError);
    CHECK_THROWS_AS(fit_decay(t, a, 30.0, 40.0), DomainError);
}

TEST_CASE("dtu budget") {
    ModelConfig cfg = base(HistoryMode::prony);
    cfg.dt = 1e-3;
    cfg.t_end = 0.2;
    cfg.stride = 1;
    Trajectory rest = solve(cfg, SpectralField(cfg.grid), make_history(cfg));
    for (double v : dtu_budget(rest)) CHECK(v == 0.0);

    cfg.t_end = 6.0;
    cfg.stride = 50;
    Trajectory tr = solve(cfg, random_velocity(cfg.grid, 9, 4, cfg.alpha, 1.0), make_history(cfg));
    std::vector<double> B = dtu_budget(tr);
    for (std::size_t i = 1; i < B.size(); ++i) CHECK(B[i] >= B[i - 1]);
    // increments shrink geometrically once the energy decays
    const double late = B.back() - B[B.size() * 3 / 4];
    MESSAGE("budget " << B.back() << " late increment " << late);
    CHECK(late <= 0.05 * B.back());
}

TEST_CASE("unforced residual equals the damping defect") {
    // trapezoidal damping minus its midpoint value: r_n = (beta/4) ||u^{n+1} - u^n||_{-theta}^2
    ModelConfig cfg = base(HistoryMode::prony);
    cfg.dt = 1e-3;
    cfg.t_end = 0.5;
    cfg.stride = 1;
    cfg.theta = 0.25;
    SpectralField u0 = random_velocity(cfg.grid, 31, 4, cfg.alpha, 1.0);
    SolveOptions opt;
    opt.keep_snapshots = true;
    Trajectory tr = solve(cfg, u0, make_history(cfg), opt);
    ResidualSeries rs = balance_residual(tr, cfg);
    double worst = 0.0;
    for (std::size_t n = 0; n < rs.r.size(); ++n) {
        const double expect = 0.25 * cfg.beta * norm_r_sq(tr.snapshots[n + 1] - tr.snapshots[n], -cfg.theta);
        worst = std::max(worst, std::abs(rs.r[n] - expect));
    }
    MESSAGE("residual max " << rs.max_abs << ", deviation from the defect " << worst);
    CHECK(worst <= 1e-9 * tr.reports.front().E);
    CHECK(rs.max_abs <= 1e-5 * tr.reports.front().E / cfg.dt * cfg.dt * cfg.dt * 100.0);
}
