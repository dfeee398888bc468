#include "nsv/integrator.hpp"

#include <cmath>
#include <string>

#include "nsv/error.hpp"
#include "nsv/spectral.hpp"

namespace nsv {
namespace {

constexpr double kFixedPointTol = 1e-13;
constexpr int kMaxIterations = 60;

// Builds the rows of a trajectory from per-step balance terms.
class Recorder {
public:
    Recorder(Trajectory& traj, double dt) : traj_(traj), dt_(dt) {}

    void start(const BalanceTerms& b) { prev_ = b; }

    void after_step(const BalanceTerms& b, double dtu) {
        const double r = (b.E - prev_.E) / dt_ + 0.5 * (prev_.damping + b.damping) + 0.5 * (prev_.Pi + b.Pi) -
                         0.5 * (prev_.forcing_power + b.forcing_power);
        res_ = std::max(res_, std::abs(r));
        dtu_ += dtu;
        prev_ = b;
    }

    void row(const EnergyReport& rep) {
        traj_.t.push_back(rep.t);
        traj_.reports.push_back(rep);
        traj_.residual.push_back(res_);
        traj_.dtu.push_back(dtu_);
        res_ = 0.0;
        dtu_ = 0.0;
    }

private:
    Trajectory& traj_;
    double dt_;
    BalanceTerms prev_{};
    double res_ = 0.0;
    double dtu_ = 0.0;
};

void check_finite(const Stepper& st, const EnergyReport& last) {
    if (!st.peek().u.all_finite())
        throw BlowUpError("nonfinite velocity at t = " + std::to_string(st.peek().t) +
                              " (last valid E = " + std::to_string(last.E) + ")",
                          last.t, last.E);
}

}  // namespace

std::vector<double> Trajectory::series(double EnergyReport::*field) const {
    std::vector<double> out;
    out.reserve(reports.size());
    for (const auto& r : reports) out.push_back(r.*field);
    return out;
}

Stepper::Stepper(const ModelConfig& cfg, State s) : cfg_(cfg), state_(std::move(s)) {
    cfg_.validate();
    if (!state_.u.grid().same_as(*cfg_.grid)) throw DimensionError("stepper: state on a different grid");
    if (!cfg_.instantaneous && state_.eta.nodes() == 0) throw ValidationError("stepper: missing history");
    u_prev_ = state_.u;
    ubar_ = state_.u;
    if (!cfg_.instantaneous && state_.eta.mode() == HistoryMode::prony)
        for (const auto& t : state_.eta.terms()) ratio_.push_back(1.0 / (1.0 + 0.5 * t.d * cfg_.dt));
}

SpectralField Stepper::memory_explicit(double* gamma) {
    SpectralField R(cfg_.grid);
    if (cfg_.instantaneous) {
        *gamma = 1.0;
        return R;
    }
    HistoryField& eta = state_.eta;
    if (eta.mode() == HistoryMode::prony) {
        *gamma = 0.0;
        const auto& terms = eta.terms();
        for (std::size_t j = 0; j < terms.size(); ++j) {
            R.axpy(terms[j].c * terms[j].d * ratio_[j], eta.moments()[j]);
            *gamma += 0.5 * terms[j].c * cfg_.dt * ratio_[j];
        }
        return R;
    }
    eta.shift_only(cfg_.dt, &R);
    *gamma = eta.implicit_weight(cfg_.dt);
    return R;
}

void Stepper::finish_memory(const SpectralField& ubar) {
    if (cfg_.instantaneous) return;
    HistoryField& eta = state_.eta;
    const double dt = cfg_.dt;
    if (eta.mode() == HistoryMode::prony) {
        const auto& terms = eta.terms();
        for (std::size_t j = 0; j < terms.size(); ++j) {
            SpectralField& m = eta.moments()[j];
            const double h = terms[j].d * dt;
            SpectralField mbar = m;
            mbar.axpy(0.5 * dt / terms[j].d, ubar) *= ratio_[j];
            eta.quad0()[j] = ((1.0 - 0.5 * h) * eta.quad0()[j] + 2.0 * dt * inner_r(mbar, ubar, 1.0)) * ratio_[j];
            eta.quad1()[j] = ((1.0 - 0.5 * h) * eta.quad1()[j] + 2.0 * dt * inner_r(mbar, ubar, 2.0)) * ratio_[j];
            m *= -1.0;
            m.axpy(2.0, mbar);
        }
        pending_.push_back(ubar);
        if (pending_.size() >= static_cast<std::size_t>(cfg_.stride)) flush();
        return;
    }
    eta.add_source(dt, ubar);
}

void Stepper::flush() const {
    if (pending_.empty()) return;
    state_.eta.transport_window(cfg_.dt, pending_);
    pending_.clear();
}

SpectralField Stepper::solve(const SpectralField& un, const SpectralField& R, double gamma, double beta,
                             const std::function<SpectralField(const SpectralField&)>& rhs_extra,
                             const SpectralField& guess) {
    const Grid& g = *cfg_.grid;
    const auto& lam = g.lambda();
    const auto& lmt = g.lambda_pow(-cfg_.theta);
    const std::size_t nm = g.nmodes();
    const int d = g.dim();
    std::vector<double> invD(nm);
    SpectralField base(cfg_.grid);
    for (std::size_t m = 0; m < nm; ++m) {
        const double a = 2.0 * (1.0 + cfg_.alpha * lam[m]) / cfg_.dt;
        invD[m] = 1.0 / (a + lam[m] * gamma + beta * lmt[m]);
        for (int c = 0; c < d; ++c) base.at(c, m) = a * un.at(c, m) - lam[m] * R.at(c, m);
    }
    SpectralField v = guess;
    for (iterations_ = 1; iterations_ <= kMaxIterations; ++iterations_) {
        SpectralField next = rhs_extra(v);
        for (std::size_t m = 0; m < nm; ++m)
            for (int c = 0; c < d; ++c) next.at(c, m) = (next.at(c, m) + base.at(c, m)) * invD[m];
        const double nv = norm_r_sq(next, 0.0);
        const double diff = norm_r_sq(next - v, 0.0);
        v = std::move(next);
        if (diff <= kFixedPointTol * kFixedPointTol * nv) return v;
        if (!std::isfinite(nv)) break;
    }
    throw ConvergenceError("midpoint fixed-point iteration did not converge at t = " + std::to_string(state_.t));
}

void Stepper::step() {
    double gamma = 0.0;
    SpectralField R = memory_explicit(&gamma);
    SpectralField guess = state_.u;
    guess.axpy(0.5, state_.u).axpy(-0.5, u_prev_);
    const SpectralField f = cfg_.forcing_or_zero();
    ubar_ = solve(state_.u, R, gamma, cfg_.beta,
                  [&](const SpectralField& v) { return f - bilinear_B(v, v); }, guess);
    finish_memory(ubar_);
    SpectralField next = 2.0 * ubar_;
    next -= state_.u;
    last_dtu_ = norm_r_sq(next - state_.u, 1.0) / cfg_.dt;
    u_prev_ = std::move(state_.u);
    state_.u = std::move(next);
    state_.t += cfg_.dt;
}

void Stepper::step_linear(const SpectralField& advect_bar, bool damping,
                          const std::function<SpectralField(const SpectralField&)>& force) {
    double gamma = 0.0;
    SpectralField R = memory_explicit(&gamma);
    SpectralField guess = state_.u;
    guess.axpy(0.5, state_.u).axpy(-0.5, u_prev_);
    ubar_ = solve(state_.u, R, gamma, damping ? cfg_.beta : 0.0,
                  [&](const SpectralField& v) {
                      SpectralField r = force ? force(v) : SpectralField(cfg_.grid);
                      r -= bilinear_B(advect_bar, v);
                      return r;
                  },
                  guess);
    finish_memory(ubar_);
    SpectralField next = 2.0 * ubar_;
    next -= state_.u;
    last_dtu_ = norm_r_sq(next - state_.u, 1.0) / cfg_.dt;
    u_prev_ = std::move(state_.u);
    state_.u = std::move(next);
    state_.t += cfg_.dt;
}

Trajectory solve(const ModelConfig& cfg, const SpectralField& u0, const HistoryField& eta0, const SolveOptions& opt) {
    cfg.validate();
    Stepper st(cfg, State{u0, eta0, 0.0});
    Trajectory traj;
    traj.dt = cfg.dt;
    traj.stride = cfg.stride;
    Recorder rec(traj, cfg.dt);
    rec.start(balance_terms(st.state(), cfg));
    EnergyReport last = report(st.state(), cfg, cfg.eps_report);
    rec.row(last);
    if (opt.keep_snapshots) traj.snapshots.push_back(st.state().u);
    if (opt.observer) opt.observer(st);
    const long n = cfg.steps();
    for (long i = 1; i <= n; ++i) {
        st.step();
        check_finite(st, last);
        rec.after_step(balance_terms(st.peek(), cfg), st.last_dtu());
        if (i % cfg.stride == 0 || i == n) {
            last = report(st.state(), cfg, cfg.eps_report);
            rec.row(last);
            if (opt.keep_snapshots) traj.snapshots.push_back(st.state().u);
            if (opt.observer) opt.observer(st);
        }
    }
    return traj;
}

Trajectory solve_instantaneous(const ModelConfig& cfg, const SpectralField& u0, const SolveOptions& opt) {
    ModelConfig c = instantaneous_limit(cfg);
    return solve(c, u0, HistoryField(), opt);
}

double h_norm_sq(const SpectralField& u, const HistoryField& eta, double alpha) {
    double s = norm_r_sq(u, 0.0) + alpha * norm_r_sq(u, 1.0);
    if (eta.nodes() > 0) s += history_norm(eta, 0) * history_norm(eta, 0);
    return s;
}

double h_distance(const State& a, const State& b, double alpha) {
    SpectralField du = a.u - b.u;
    double s = norm_r_sq(du, 0.0) + alpha * norm_r_sq(du, 1.0);
    if (a.eta.nodes() > 0) s += history_distance_sq(a.eta, b.eta);
    return std::sqrt(s);
}

namespace {

double split_defect(const State& S, const State& L, const State& K, double alpha) {
    SpectralField du = L.u + K.u;
    du -= S.u;
    double s = norm_r_sq(du, 0.0) + alpha * norm_r_sq(du, 1.0);
    const HistoryField& e = S.eta;
    if (e.nodes() > 0) {
        const auto& w1 = e.grid().lambda_pow(1.0);
        SpectralField diff(e.grid_ptr());
        for (std::size_t i = 1; i < e.nodes(); ++i) {
            auto& dd = diff.data();
            for (std::size_t q = 0; q < dd.size(); ++q)
                dd[q] = L.eta.node_data(i)[q] + K.eta.node_data(i)[q] - e.node_data(i)[q];
            double nrm = 0.0;
            for (int c = 0; c < diff.dim(); ++c)
                for (std::size_t m = 0; m < diff.nmodes(); ++m) nrm += w1[m] * std::norm(diff.at(c, m));
            s += e.w_mu()[i] * nrm;
        }
    }
    return std::sqrt(s);
}

}  // namespace

SplitResult solve_split(const ModelConfig& cfg, const State& U0) {
    cfg.validate();
    ModelConfig cfgL = cfg;
    cfgL.beta = 0.0;
    cfgL.forcing = SpectralField();
    Stepper S(cfg, U0);
    Stepper L(cfgL, U0);
    Stepper K(cfg, State{SpectralField(cfg.grid), make_history(cfg), U0.t});
    SplitResult out;
    for (Trajectory* t : {&out.S, &out.L, &out.K}) {
        t->dt = cfg.dt;
        t->stride = cfg.stride;
    }
    Recorder rs(out.S, cfg.dt), rl(out.L, cfg.dt), rk(out.K, cfg.dt);
    const SpectralField f = cfg.forcing_or_zero();
    auto ftilde = [&](const SpectralField& v) {
        SpectralField r = f;
        r.axpy(-cfg.beta, apply_power(v, -2.0 * cfg.theta));
        return r;
    };
    auto k_terms = [&] {
        BalanceTerms b = balance_terms(K.peek(), cfg);
        b.forcing_power = inner_r(ftilde(L.peek().u), K.peek().u, 0.0);
        return b;
    };
    auto record = [&] {
        EnergyReport rS = report(S.state(), cfg, cfg.eps_report);
        rs.row(rS);
        rl.row(report(L.state(), cfgL, cfg.eps_report));
        EnergyReport rK = report(K.state(), cfg, cfg.eps_report);
        rK.forcing_power = inner_r(ftilde(L.state().u), K.state().u, 0.0);
        rk.row(rK);
        out.superposition.push_back(split_defect(S.state(), L.state(), K.state(), cfg.alpha));
        out.scale = std::max(out.scale, std::sqrt(2.0 * rS.E));
        return rS;
    };
    rs.start(balance_terms(S.state(), cfg));
    rl.start(balance_terms(L.state(), cfgL));
    rk.start(k_terms());
    EnergyReport last = record();
    const long n = cfg.steps();
    for (long i = 1; i <= n; ++i) {
        S.step();
        check_finite(S, last);
        const SpectralField& ubar = S.midpoint();
        L.step_linear(ubar, false, {});
        const SpectralField vbar = L.midpoint();
        K.step_linear(ubar, true, [&](const SpectralField&) { return ftilde(vbar); });
        rs.after_step(balance_terms(S.peek(), cfg), S.last_dtu());
        rl.after_step(balance_terms(L.peek(), cfgL), L.last_dtu());
        rk.after_step(k_terms(), K.last_dtu());
        if (i % cfg.stride == 0 || i == n) last = record();
    }
    return out;
}

}  // namespace nsv
