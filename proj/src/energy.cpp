#include "nsv/energy.hpp"

#include <cmath>
#include <limits>

#include "nsv/error.hpp"
#include "nsv/integrator.hpp"
#include "nsv/spectral.hpp"

namespace nsv {

double nu0(const ModelConfig& cfg, double kappa, double delta) {
    return std::min(cfg.alpha * kappa * delta / 32.0, 1.0);
}

double nu1(const ModelConfig& cfg, double kappa, double delta) {
    return std::min(cfg.alpha * kappa * delta / 72.0, 1.0);
}

EnergyReport report(const State& s, const ModelConfig& cfg, double eps) {
    const SpectralField& u = s.u;
    EnergyReport r;
    r.t = s.t;
    r.eps = eps;
    const double n0 = norm_r_sq(u, 0.0), n1 = norm_r_sq(u, 1.0), n2 = norm_r_sq(u, 2.0);
    const double nmt = norm_r_sq(u, -cfg.theta), n1mt = norm_r_sq(u, 1.0 - cfg.theta);
    double mem0 = 0.0, mem1 = 0.0;
    if (cfg.instantaneous) {
        r.Pi = n1;
        r.Pi1 = n2;
    } else {
        const HistoryField& eta = s.eta;
        mem0 = memory_energy(eta, 0);
        mem1 = memory_energy(eta, 1);
        r.Pi = memory_dissipation(eta, 0);
        r.Pi1 = memory_dissipation(eta, 1);
        r.Phi = -(4.0 / eta.kappa()) * tail_coupling(eta, u, 0);
        r.Phi1 = -(6.0 / eta.kappa()) * tail_coupling(eta, u, 1);
    }
    r.memory = mem0;
    r.E = 0.5 * (n0 + cfg.alpha * n1 + mem0);
    r.E1 = 0.5 * (cfg.alpha * n2 + n1 + mem1);
    r.Psi = 2.0 * cfg.beta * nmt;
    r.Psi1 = cfg.beta * n1mt;
    double nu = 0.0, nuo = 0.0;
    if (!cfg.instantaneous) {
        nu = nu0(cfg, s.eta.kappa(), s.eta.delta());
        nuo = nu1(cfg, s.eta.kappa(), s.eta.delta());
    }
    r.Lambda_eps = r.E + nu * eps * r.Phi + eps * eps * r.Psi;
    r.Lambda1 = r.E1 + nuo * eps * r.Phi1 + eps * eps * r.Psi1;
    r.norm_u_minus_theta = std::sqrt(nmt);
    r.norm_u_0 = std::sqrt(n0);
    r.norm_u_1 = std::sqrt(n1);
    r.norm_u_2 = std::sqrt(n2);
    r.damping = cfg.beta * nmt;
    r.forcing_power = cfg.forcing.empty() ? 0.0 : inner_r(cfg.forcing, u, 0.0);
    return r;
}

BalanceTerms balance_terms(const State& s, const ModelConfig& cfg) {
    const SpectralField& u = s.u;
    BalanceTerms b{};
    const double n0 = norm_r_sq(u, 0.0), n1 = norm_r_sq(u, 1.0);
    double mem = 0.0;
    if (cfg.instantaneous) {
        b.Pi = n1;
    } else {
        mem = memory_energy(s.eta, 0);
        b.Pi = memory_dissipation(s.eta, 0);
    }
    b.E = 0.5 * (n0 + cfg.alpha * n1 + mem);
    b.damping = cfg.beta == 0.0 ? 0.0 : cfg.beta * norm_r_sq(u, -cfg.theta);
    b.forcing_power = cfg.forcing.empty() ? 0.0 : inner_r(cfg.forcing, u, 0.0);
    return b;
}

double epsilon_max(const ModelConfig& cfg, double kappa, double delta) {
    // |Phi| <= 4 E / sqrt(alpha kappa), Psi <= 4 beta E; order 1: 6 / sqrt(alpha kappa), 2 beta
    auto bound = [](double a, double b) {
        if (b > 0.0) return (-a + std::sqrt(a * a + 2.0 * b)) / (2.0 * b);
        if (a > 0.0) return 0.5 / a;
        return std::numeric_limits<double>::infinity();
    };
    const double s = std::sqrt(cfg.alpha * kappa);
    const double e0 = bound(4.0 * nu0(cfg, kappa, delta) / s, 4.0 * cfg.beta);
    const double e1 = bound(6.0 * nu1(cfg, kappa, delta) / s, 2.0 * cfg.beta);
    return std::min(e0, e1);
}

ResidualSeries balance_residual(const Trajectory& traj, const ModelConfig& cfg) {
    if (traj.stride != 1) throw DomainError("balance_residual needs a stride-1 trajectory");
    ResidualSeries out;
    const auto& R = traj.reports;
    for (std::size_t n = 0; n + 1 < R.size(); ++n) {
        const double dt = R[n + 1].t - R[n].t;
        if (std::abs(dt - cfg.dt) > 1e-9 * cfg.dt) throw DomainError("balance_residual: rows are not one step apart");
        const double r = (R[n + 1].E - R[n].E) / dt + 0.5 * (R[n].damping + R[n + 1].damping) +
                         0.5 * (R[n].Pi + R[n + 1].Pi) - 0.5 * (R[n].forcing_power + R[n + 1].forcing_power);
        out.r.push_back(r);
        out.max_abs = std::max(out.max_abs, std::abs(r));
    }
    return out;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& E, double t_a, double t_b) {
    if (t.size() != E.size()) throw DomainError("fit_decay: series lengths differ");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_a || t[i] > t_b) continue;
        if (!(E[i] > 0.0)) throw DomainError("fit_decay: nonpositive energy in window (shrink the window)");
        xs.push_back(t[i]);
        ys.push_back(std::log(E[i]));
    }
    const std::size_t n = xs.size();
    if (n < 2) throw DomainError("fit_decay: fewer than two samples in window");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double vxx = 0.0, vxy = 0.0, vyy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        vxx += dx * dx;
        vxy += dx * dy;
        vyy += dy * dy;
    }
    DecayFit f;
    f.samples = n;
    const double scale = std::max(1.0, std::abs(my));
    if (vyy <= 1e-26 * scale * scale * double(n)) {
        f.omega = 0.0;
        f.r2 = 1.0;
        return f;
    }
    f.omega = -vxy / vxx;
    f.r2 = std::max(0.0, vxy * vxy / (vxx * vyy));
    return f;
}

std::vector<double> dtu_budget(const Trajectory& traj) {
    std::vector<double> out;
    double s = 0.0;
    for (double d : traj.dtu) {
        s += d;
        out.push_back(s);
    }
    return out;
}

}  // namespace nsv
