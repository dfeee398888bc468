#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>

#include "nsv/error.hpp"
#include "nsv/integrator.hpp"
#include "nsv/random_fields.hpp"
#include "nsv/spectral.hpp"

using namespace nsv;

namespace {

ModelConfig small_config(double t_end = 1.0) {
    ModelConfig cfg;
    cfg.grid = Grid::make(2, 16);
    cfg.t_end = t_end;
    cfg.stride = 1;
    cfg.history.M = 128;
    return cfg;
}

SpectralField low_forcing(const GridPtr& g, double amp) {
    SpectralField f(g);
    add_real_mode(f, {0, 1, 0}, {amp, 0.0, 0.0}, true);
    add_real_mode(f, {1, 0, 0}, {0.0, amp, 0.0}, true);
    return f;
}

// (1 + alpha lam) y' = -lam sum c_j d_j m_j - beta lam^{-theta} y,  m_j' = -d_j m_j + y / d_j
// sampled every `every` RK4 substeps
std::vector<double> rk4_mode(const ModelConfig& cfg, double lam, long n, double h, int every) {
    const auto terms = cfg.kernel.prony_terms();
    const std::size_t J = terms.size();
    std::vector<double> x(J + 1, 0.0);
    x[0] = 1.0;
    auto rhs = [&](const std::vector<double>& v) {
        std::vector<double> d(J + 1);
        double mem = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            mem += terms[j].c * terms[j].d * v[j + 1];
            d[j + 1] = -terms[j].d * v[j + 1] + v[0] / terms[j].d;
        }
        d[0] = (-lam * mem - cfg.beta * std::pow(lam, -cfg.theta) * v[0]) / (1.0 + cfg.alpha * lam);
        return d;
    };
    std::vector<double> out{1.0};
    for (long s = 1; s <= n * every; ++s) {
        auto k1 = rhs(x);
        std::vector<double> y(J + 1);
        for (std::size_t i = 0; i <= J; ++i) y[i] = x[i] + 0.5 * h * k1[i];
        auto k2 = rhs(y);
        for (std::size_t i = 0; i <= J; ++i) y[i] = x[i] + 0.5 * h * k2[i];
        auto k3 = rhs(y);
        for (std::size_t i = 0; i <= J; ++i) y[i] = x[i] + h * k3[i];
        auto k4 = rhs(y);
        for (std::size_t i = 0; i <= J; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        if (s % every == 0) out.push_back(x[0]);
    }
    return out;
}

// sup over the steps of ||u_n - y(t_n) u0|| / sup ||y u0||
double linear_mode_error(ModelConfig cfg, double T) {
    cfg.t_end = T;
    SpectralField u0(cfg.grid);
    add_real_mode(u0, {1, 2, 0}, {2e-8, -1e-8, 0.0}, true);
    Stepper st(cfg, make_state(cfg, u0));
    const std::vector<double> y = rk4_mode(cfg, 5.0, cfg.steps(), cfg.dt / 100.0, 100);
    double err = 0.0, scale = 0.0;
    for (long i = 1; i <= cfg.steps(); ++i) {
        st.step();
        err = std::max(err, norm_r(st.state().u - y[i] * u0, 0.0));
        scale = std::max(scale, std::abs(y[i]) * norm_r(u0, 0.0));
    }
    return err / scale;
}

}  // namespace

TEST_CASE("rest state stays exactly at rest") {
    for (HistoryMode mode : {HistoryMode::prony, HistoryMode::grid}) {
        ModelConfig cfg = small_config(0.05);
        cfg.history.mode = mode;
        Stepper st(cfg, make_state(cfg, SpectralField(cfg.grid)));
        for (int i = 0; i < 50; ++i) st.step();
        CHECK(max_abs_coeff(st.state().u) == 0.0);
        CHECK(history_norm(st.state().eta, 0) == 0.0);
        CHECK(st.state().t == doctest::Approx(0.05));
    }
}

TEST_CASE("linear single mode matches the moment ODE reference") {
    ModelConfig cfg = small_config();
    cfg.kernel = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}});
    cfg.theta = 0.5;
    const double e = linear_mode_error(cfg, 2.0);
    MESSAGE("relative error vs RK4 " << e);
    CHECK(e <= 1e-6);
    ModelConfig coarse = cfg;
    coarse.dt = 4e-3;
    ModelConfig fine = cfg;
    fine.dt = 2e-3;
    const double ec = linear_mode_error(coarse, 2.0), ef = linear_mode_error(fine, 2.0);
    MESSAGE("order ratio " << ec / ef);
    CHECK(ec / ef == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("grid-mode history tracks the Prony run") {
    ModelConfig cfg = small_config(0.5);
    cfg.forcing = low_forcing(cfg.grid, 2.0);
    SpectralField u0 = random_velocity(cfg.grid, 7, 4, cfg.alpha, 1.0);
    Trajectory p = solve(cfg, u0, make_history(cfg));
    cfg.history.mode = HistoryMode::grid;
    cfg.history.M = 256;
    Trajectory g = solve(cfg, u0, make_history(cfg));
    CHECK(g.reports.back().E == doctest::Approx(p.reports.back().E).epsilon(1e-3));
}

TEST_CASE("energy balance residual is second order") {
    ModelConfig cfg = small_config(0.4);
    cfg.forcing = low_forcing(cfg.grid, 2.0);
    SpectralField u0 = random_velocity(cfg.grid, 11, 4, cfg.alpha, 2.0);
    cfg.dt = 4e-3;
    const double r1 = balance_residual(solve(cfg, u0, make_history(cfg)), cfg).max_abs;
    cfg.dt = 2e-3;
    const double r2 = balance_residual(solve(cfg, u0, make_history(cfg)), cfg).max_abs;
    MESSAGE("residual " << r1 << " -> " << r2);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));

    cfg.forcing = SpectralField();
    Trajectory rest = solve(cfg, SpectralField(cfg.grid), make_history(cfg));
    CHECK(balance_residual(rest, cfg).max_abs == 0.0);

    cfg.stride = 5;
    CHECK_THROWS_AS(balance_residual(solve(cfg, u0, make_history(cfg)), cfg), DomainError);
}

TEST_CASE("unforced energy is non-increasing and decays") {
    for (double beta : {0.5, 0.0}) {
        ModelConfig cfg = small_config(6.0);
        cfg.beta = beta;
        cfg.stride = 10;
        SpectralField u0 = random_velocity(cfg.grid, 5, 4, cfg.alpha, 1.0);
        Trajectory tr = solve(cfg, u0, make_history(cfg));
        int bad = 0;
        for (std::size_t i = 1; i < tr.reports.size(); ++i)
            if (tr.reports[i].E > tr.reports[i - 1].E * (1.0 + 1e-14)) ++bad;
        CHECK(bad == 0);
        DecayFit fit = fit_decay(tr.t, tr.series(&EnergyReport::E), 0.6, 4.5);
        MESSAGE("beta " << beta << " omega " << fit.omega << " r2 " << fit.r2);
        CHECK(fit.omega > 0.0);
        CHECK(max_divergence(tr.snapshots.empty() ? SpectralField(cfg.grid) : tr.snapshots.back()) < 1e-12);
    }
}

TEST_CASE("instantaneous limit: closed-form modal rate") {
    ModelConfig cfg = small_config(2.0);
    cfg.theta = 0.5;
    SpectralField u0(cfg.grid);
    add_real_mode(u0, {1, 2, 0}, {2.0, -1.0, 0.0}, false);
    SolveOptions opt;
    opt.keep_snapshots = true;
    Trajectory tr = solve_instantaneous(cfg, u0, opt);
    const double lam = 5.0;
    const double rate = (lam + cfg.beta * std::pow(lam, -cfg.theta)) / (1.0 + cfg.alpha * lam);
    const double ratio = norm_r(tr.snapshots.back(), 0.0) / norm_r(u0, 0.0);
    const double measured = -std::log(ratio) / cfg.t_end;
    CHECK(measured == doctest::Approx(rate).epsilon(1e-6));
    CHECK(tr.reports.back().Pi == doctest::Approx(norm_r_sq(tr.snapshots.back(), 1.0)).epsilon(1e-12));
    CHECK(max_divergence(tr.snapshots.back()) < 1e-12);
}

TEST_CASE("splitting") {
    ModelConfig cfg = small_config(0.3);
    cfg.stride = 10;
    cfg.forcing = low_forcing(cfg.grid, 2.0);
    {
        SplitResult z = solve_split(cfg, make_state(cfg, SpectralField(cfg.grid)));
        for (std::size_t i = 0; i < z.S.reports.size(); ++i) {
            CHECK(z.L.reports[i].E == 0.0);
            CHECK(z.K.reports[i].E == doctest::Approx(z.S.reports[i].E).epsilon(1e-10));
        }
    }
    SpectralField u0 = random_velocity(cfg.grid, 17, 4, cfg.alpha, 1.0);
    {
        ModelConfig c = cfg;
        c.forcing = SpectralField();
        c.beta = 0.0;
        SplitResult z = solve_split(c, make_state(c, u0));
        for (std::size_t i = 0; i < z.S.reports.size(); ++i) {
            CHECK(z.K.reports[i].E == 0.0);
            CHECK(z.L.reports[i].E == doctest::Approx(z.S.reports[i].E).epsilon(1e-10));
        }
    }
    SplitResult z = solve_split(cfg, make_state(cfg, u0));
    double worst = 0.0;
    for (double d : z.superposition) worst = std::max(worst, d);
    MESSAGE("superposition defect " << worst << " scale " << z.scale);
    CHECK(worst <= 1e-8 * z.scale);
}

TEST_CASE("blow-up guard and validation") {
    ModelConfig cfg = small_config(0.01);
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = small_config(0.01);
    SpectralField u0 = random_velocity(cfg.grid, 1, 4, cfg.alpha, 1.0);
    u0.at(0, 3) = cplx(std::nan(""), 0.0);
    CHECK_THROWS(solve(cfg, u0, make_history(cfg)));
    cfg.history.mode = HistoryMode::prony;
    cfg.kernel = Kernel::tabulated({0.0, 1.0, 2.0}, {1.0, 0.5, 0.2});
    CHECK_THROWS_AS(cfg.validate(), UnsupportedError);
}
