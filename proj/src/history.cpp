#include "nsv/history.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstring>

#include "nsv/error.hpp"
#include "nsv/simd.hpp"
#include "nsv/spectral.hpp"

namespace nsv {
namespace {

double block_norm2(const Grid& g, const cplx* p, const std::vector<double>& w) {
    const auto& ops = simd::active();
    const std::size_t nm = g.nmodes();
    double s = 0.0;
    for (int c = 0; c < g.dim(); ++c)
        s += ops.weighted_norm2(nm, w.data(), reinterpret_cast<const double*>(p + c * nm));
    return s;
}

double block_dot(const Grid& g, const cplx* a, const cplx* b, const std::vector<double>& w) {
    const auto& ops = simd::active();
    const std::size_t nm = g.nmodes();
    double s = 0.0;
    for (int c = 0; c < g.dim(); ++c)
        s += ops.weighted_dot(nm, w.data(), reinterpret_cast<const double*>(a + c * nm),
                              reinterpret_cast<const double*>(b + c * nm));
    return s;
}

void block_axpy(std::size_t n, double a, const cplx* x, cplx* y) {
    simd::active().axpy(2 * n, a, reinterpret_cast<const double*>(x), reinterpret_cast<double*>(y));
}

SpectralField times_lambda(SpectralField f) {
    const auto& lam = f.grid().lambda();
    for (int c = 0; c < f.dim(); ++c)
        simd::active().weighted_scale(f.nmodes(), lam.data(), reinterpret_cast<const double*>(f.comp(c)),
                                      reinterpret_cast<double*>(f.comp(c)));
    return f;
}

}  // namespace

SGrid make_sgrid(std::size_t M, double ds_min, double s_max) {
    if (M < 2) throw DomainError("lag grid needs M >= 2");
    if (!(ds_min > 0.0) || !(s_max > 0.0)) throw DomainError("lag grid needs positive ds_min and s_max");
    SGrid g;
    g.s.resize(M + 1);
    if (s_max <= double(M) * ds_min) {
        g.ratio = 1.0;
        for (std::size_t i = 0; i <= M; ++i) g.s[i] = s_max * double(i) / double(M);
    } else {
        const double target = s_max / ds_min;
        auto span = [&](double r) { return std::expm1(double(M) * std::log(r)) / (r - 1.0); };
        double lo = 1.0, hi = 1.0 + 1.0 / double(M);
        while (span(hi) < target) hi = 1.0 + 2.0 * (hi - 1.0);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (span(mid) < target ? lo : hi) = mid;
        }
        g.ratio = 0.5 * (lo + hi);
        const double lr = std::log(g.ratio);
        for (std::size_t i = 0; i <= M; ++i) g.s[i] = ds_min * std::expm1(double(i) * lr) / (g.ratio - 1.0);
    }
    g.s[0] = 0.0;
    g.s[M] = s_max;
    g.w.assign(M + 1, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double h = g.s[i + 1] - g.s[i];
        g.w[i] += 0.5 * h;
        g.w[i + 1] += 0.5 * h;
    }
    g.ds_min = g.s[1];
    g.s_max = s_max;
    return g;
}

std::vector<double> product_weights(const SGrid& sg, const std::function<double(double)>& f, double kink) {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> W(sg.s.size(), 0.0);
    auto integ = [&](auto g, double a, double b) {
        if (kink > a && kink < b)
            return gauss_kronrod<double, 15>::integrate(g, a, kink, 12, 1e-13) +
                   gauss_kronrod<double, 15>::integrate(g, kink, b, 12, 1e-13);
        return gauss_kronrod<double, 15>::integrate(g, a, b, 12, 1e-13);
    };
    for (std::size_t i = 0; i + 1 < sg.s.size(); ++i) {
        const double a = sg.s[i], b = sg.s[i + 1], h = b - a;
        W[i] += integ([&](double x) { return f(x) * (b - x) / h; }, a, b);
        W[i + 1] += integ([&](double x) { return f(x) * (x - a) / h; }, a, b);
    }
    return W;
}

SGrid default_sgrid(const Kernel& k, std::size_t M, double ds_min, double s_max_factor) {
    return make_sgrid(M, ds_min, s_max_factor / dafermos_rate(k));
}

HistoryField::HistoryField(GridPtr grid, Kernel kernel, SGrid sgrid, HistoryMode mode)
    : grid_(std::move(grid)), kernel_(std::move(kernel)), sgrid_(std::move(sgrid)), mode_(mode) {
    if (mode_ == HistoryMode::prony && !kernel_.is_exponential())
        throw UnsupportedError("Prony history mode needs an exponential-sum kernel");
    values_.assign(nodes() * block(), cplx(0.0, 0.0));
    front_ = SpectralField(grid_);
    kappa_ = total_mass(kernel_);
    delta_ = dafermos_rate(kernel_);
    const TailSplit ts = tail_split(kernel_);
    s_star_ = ts.s_star;
    const Kernel& k = kernel_;
    wmu_ = product_weights(sgrid_, [&](double s) { return k.mu(s); });
    wdmu_ = product_weights(sgrid_, [&](double s) { return -k.mu_prime(s); });
    wmustar_ = product_weights(sgrid_, [&](double s) { return ts.mu_star(s); }, s_star_);
    if (kernel_.is_exponential()) terms_ = kernel_.prony_terms();
    if (mode_ == HistoryMode::prony) {
        moments_.assign(terms_.size(), SpectralField(grid_));
        q0_.assign(terms_.size(), 0.0);
        q1_.assign(terms_.size(), 0.0);
    }
}

SpectralField HistoryField::node(std::size_t i) const {
    SpectralField f(grid_);
    std::copy(node_data(i), node_data(i) + block(), f.data().begin());
    return f;
}

void HistoryField::set_node(std::size_t i, const SpectralField& v) {
    if (!v.grid().same_as(*grid_)) throw DimensionError("history node on a different grid");
    std::copy(v.data().begin(), v.data().end(), node_data(i));
}

void HistoryField::sync_moments_from_nodes() {
    if (mode_ != HistoryMode::prony) return;
    const auto& w1 = grid_->lambda_pow(1.0);
    const auto& w2 = grid_->lambda_pow(2.0);
    std::vector<double> n1(nodes()), n2(nodes());
    for (std::size_t i = 0; i < nodes(); ++i) {
        n1[i] = block_norm2(*grid_, node_data(i), w1);
        n2[i] = block_norm2(*grid_, node_data(i), w2);
    }
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        moments_[j].set_zero();
        q0_[j] = q1_[j] = 0.0;
        const double d = terms_[j].d;
        const std::vector<double> W = product_weights(sgrid_, [d](double s) { return std::exp(-d * s); });
        for (std::size_t i = 0; i < nodes(); ++i) {
            const double e = W[i];
            block_axpy(block(), e, node_data(i), moments_[j].data().data());
            q0_[j] += e * n1[i];
            q1_[j] += e * n2[i];
        }
    }
}

void HistoryField::build_plan(ShiftPlan& p, const std::vector<double>& s, double dt) {
    const std::size_t n = s.size();
    p.dt = dt;
    p.j.assign(n, 0);
    p.theta.assign(n, 1.0);
    p.sigma.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double x = s[i] - dt;
        if (x <= 0.0) {
            p.sigma[i] = s[i];
            continue;
        }
        std::size_t j = static_cast<std::size_t>(std::upper_bound(s.begin(), s.begin() + i, x) - s.begin()) - 1;
        p.j[i] = j;
        p.theta[i] = 1.0 - (x - s[j]) / (s[j + 1] - s[j]);
        p.sigma[i] = dt;
    }
}

const HistoryField::ShiftPlan& HistoryField::plan(double dt) {
    if (!(dt > 0.0)) throw DomainError("history transport needs dt > 0");
    if (plan_.dt != dt) build_plan(plan_, sgrid_.s, dt);
    return plan_;
}

void HistoryField::set_front(double s, const SpectralField& v) {
    if (!(s >= 0.0)) throw DomainError("history front position must be >= 0");
    if (!v.grid().same_as(*grid_)) throw DimensionError("history front on a different grid");
    front_s_ = s;
    front_ = v;
}

void HistoryField::shift_node(std::size_t i, const ShiftPlan& p, double sigma, const double* src) {
    const auto& ops = simd::active();
    const auto& s = sgrid_.s;
    const std::size_t b = block();
    cplx* cur = node_data(i);
    const std::size_t j = p.j[i];
    const double x = s[i] - p.dt;
    const double eps = 1e-12 * (s[j + 1] - s[j]);
    if (x > 0.0 && front_s_ > s[j] + eps && front_s_ < s[j + 1] - eps) {
        const double* F = front_.raw();
        if (x <= front_s_) {
            std::memcpy(cur, front_.data().data(), b * sizeof(cplx));
            const double th = 1.0 - (x - s[j]) / (front_s_ - s[j]);
            ops.shift_blend(2 * b, th, reinterpret_cast<const double*>(node_data(j)), reinterpret_cast<double*>(cur),
                            sigma, src);
        } else {
            if (j + 1 != i) std::memcpy(cur, node_data(j + 1), b * sizeof(cplx));
            const double th = 1.0 - (x - front_s_) / (s[j + 1] - front_s_);
            ops.shift_blend(2 * b, th, F, reinterpret_cast<double*>(cur), sigma, src);
        }
        return;
    }
    if (j + 1 != i) std::memcpy(cur, node_data(j + 1), b * sizeof(cplx));
    ops.shift_blend(2 * b, p.theta[i], reinterpret_cast<const double*>(node_data(j)), reinterpret_cast<double*>(cur),
                    sigma, src);
}

void HistoryField::shift_only(double dt, SpectralField* mf_half) {
    const ShiftPlan& p = plan(dt);
    const std::size_t b = block();
    cplx* acc = mf_half ? mf_half->data().data() : nullptr;
    const double* none = front_.raw();
    for (std::size_t i = nodes() - 1; i >= 1; --i) {
        const double wm = 0.5 * wmu_[i];
        if (acc) block_axpy(b, wm, node_data(i), acc);
        shift_node(i, p, 0.0, none);
        if (acc) block_axpy(b, wm, node_data(i), acc);
    }
    if (front_active()) front_s_ += dt;
}

void HistoryField::add_source(double dt, const SpectralField& ubar) {
    const ShiftPlan& p = plan(dt);
    for (std::size_t i = 1; i < nodes(); ++i) block_axpy(block(), p.sigma[i], ubar.data().data(), node_data(i));
    if (front_active()) front_.axpy(dt, ubar);
}

void HistoryField::transport(double dt, const SpectralField& ubar) {
    if (!ubar.grid().same_as(*grid_)) throw DimensionError("history transport: velocity on a different grid");
    const ShiftPlan& p = plan(dt);
    for (std::size_t i = nodes() - 1; i >= 1; --i) shift_node(i, p, p.sigma[i], ubar.raw());
    if (front_active()) {
        front_s_ += dt;
        front_.axpy(dt, ubar);
    }
}

void HistoryField::transport_window(double dt, const std::vector<SpectralField>& ubars) {
    if (ubars.empty()) return;
    if (ubars.size() == 1) {
        transport(dt, ubars[0]);
        return;
    }
    if (!(dt > 0.0)) throw DomainError("history transport needs dt > 0");
    const std::size_t k = ubars.size();
    const double D = dt * double(k);
    if (wplan_.dt != D) build_plan(wplan_, sgrid_.s, D);
    SpectralField total(grid_);
    for (const auto& u : ubars) {
        if (!u.grid().same_as(*grid_)) throw DimensionError("history transport: velocity on a different grid");
        total.axpy(dt, u);
    }
    const auto& s = sgrid_.s;
    const std::size_t b = block();
    for (std::size_t i = nodes() - 1; i >= 1; --i) {
        if (s[i] > D) {
            shift_node(i, wplan_, 1.0, total.raw());
            continue;
        }
        // int_0^{s_i} of the piecewise constant midpoints, newest first
        cplx* cur = node_data(i);
        std::fill(cur, cur + b, cplx(0.0, 0.0));
        double left = s[i];
        for (std::size_t q = k; q-- > 0 && left > 0.0;) {
            const double piece = std::min(left, dt);
            block_axpy(b, piece, ubars[q].data().data(), cur);
            left -= piece;
        }
    }
    if (front_active()) {
        front_s_ += D;
        front_ += total;
    }
}

double HistoryField::implicit_weight(double dt) const {
    double g = 0.0;
    for (std::size_t i = 1; i < nodes(); ++i) g += wmu_[i] * std::min(sgrid_.s[i], dt);
    return 0.5 * g;
}

void HistoryField::advance_in_place(const SpectralField& u_old, const SpectralField& u_new, double dt) {
    if (!(dt > 0.0)) throw DomainError("advance needs dt > 0");
    require_same_grid(u_old, u_new, "advance");
    SpectralField ubar = 0.5 * (u_old + u_new);
    transport(dt, ubar);
    if (mode_ != HistoryMode::prony) return;
    std::vector<SpectralField> next = prony_advance(moments_, terms_, u_old, u_new, dt);
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        const double h = terms_[j].d * dt;
        SpectralField mbar = 0.5 * (moments_[j] + next[j]);
        q0_[j] = ((1.0 - 0.5 * h) * q0_[j] + 2.0 * dt * inner_r(mbar, ubar, 1.0)) / (1.0 + 0.5 * h);
        q1_[j] = ((1.0 - 0.5 * h) * q1_[j] + 2.0 * dt * inner_r(mbar, ubar, 2.0)) / (1.0 + 0.5 * h);
        moments_[j] = std::move(next[j]);
    }
}

HistoryField HistoryField::advance(const SpectralField& u_old, const SpectralField& u_new, double dt) const {
    HistoryField out = *this;
    out.advance_in_place(u_old, u_new, dt);
    return out;
}

HistoryField init_history(GridPtr grid, const Kernel& k, const SGrid& sg, HistoryMode mode,
                          const std::function<SpectralField(double)>& phi0) {
    HistoryField h(std::move(grid), k, sg, mode);
    if (!phi0) return h;
    SpectralField prev = phi0(sg.s[0]);
    SpectralField acc(h.grid_ptr());
    for (std::size_t i = 1; i < h.nodes(); ++i) {
        SpectralField cur = phi0(sg.s[i]);
        require_same_grid(cur, acc, "init_history");
        const double hs = sg.s[i] - sg.s[i - 1];
        acc.axpy(0.5 * hs, prev).axpy(0.5 * hs, cur);
        h.set_node(i, acc);
        prev = std::move(cur);
    }
    h.sync_moments_from_nodes();
    return h;
}

HistoryField representation_oracle(const std::vector<double>& times, const std::vector<SpectralField>& path,
                                   const HistoryField& eta0, double t) {
    if (times.size() != path.size() || times.empty()) throw DomainError("representation_oracle: malformed path");
    const double tol = 1e-12 * std::max(1.0, t);
    if (times.front() > tol || times.back() < t - tol)
        throw DomainError("representation_oracle: path does not cover [0, t]");
    HistoryField out(eta0.grid_ptr(), eta0.kernel(), eta0.sgrid(), HistoryMode::grid);
    if (t <= 0.0) {
        out.values() = eta0.values();
        out.set_front(eta0.front_position(), eta0.front_value());
        return out;
    }
    // C_k = int_0^{tau_k} u, exact for the piecewise linear interpolant
    std::vector<SpectralField> C(path.size(), SpectralField(eta0.grid_ptr()));
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double h = times[k] - times[k - 1];
        C[k] = C[k - 1];
        C[k].axpy(0.5 * h, path[k - 1]).axpy(0.5 * h, path[k]);
    }
    auto cum = [&](double tau) {
        std::size_t k = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), tau) - times.begin());
        k = k == 0 ? 0 : k - 1;
        if (k + 1 >= times.size()) k = times.size() - 2;
        const double h = times[k + 1] - times[k], x = tau - times[k];
        SpectralField r = C[k];
        r.axpy(x - 0.5 * x * x / h, path[k]).axpy(0.5 * x * x / h, path[k + 1]);
        return r;
    };
    const SpectralField Ct = cum(t);
    const auto& s = eta0.sgrid().s;
    for (std::size_t i = 1; i < out.nodes(); ++i) {
        if (s[i] <= t) {
            out.set_node(i, Ct - cum(t - s[i]));
            continue;
        }
        const double x = s[i] - t;
        std::size_t j = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) - 1;
        SpectralField v = Ct;
        if (j + 1 >= s.size()) {
            v += eta0.node(s.size() - 1);
        } else {
            const double th = (x - s[j]) / (s[j + 1] - s[j]);
            v.axpy(1.0 - th, eta0.node(j)).axpy(th, eta0.node(j + 1));
        }
        out.set_node(i, v);
    }
    out.set_front(eta0.front_position() + t, Ct + eta0.front_value());
    return out;
}

SpectralField memory_force(const HistoryField& eta, const Kernel& k) {
    SpectralField acc(eta.grid_ptr());
    if (eta.mode() == HistoryMode::prony) {
        const auto terms = k.prony_terms();
        if (terms.size() != eta.moments().size()) throw DimensionError("memory_force: kernel/history term mismatch");
        for (std::size_t j = 0; j < terms.size(); ++j) acc.axpy(terms[j].c * terms[j].d, eta.moments()[j]);
        return times_lambda(std::move(acc));
    }
    const std::vector<double> W =
        k.same_as(eta.kernel()) ? eta.w_mu() : product_weights(eta.sgrid(), [&](double s) { return k.mu(s); });
    for (std::size_t i = 0; i < eta.nodes(); ++i)
        block_axpy(eta.block(), W[i], eta.node_data(i), acc.data().data());
    return times_lambda(std::move(acc));
}

std::vector<SpectralField> prony_advance(const std::vector<SpectralField>& m, const std::vector<PronyTerm>& terms,
                                         const SpectralField& u_old, const SpectralField& u_new, double dt) {
    if (m.size() != terms.size()) throw UnsupportedError("prony_advance: moments do not match an exponential kernel");
    if (!(dt > 0.0)) throw DomainError("prony_advance needs dt > 0");
    SpectralField ubar = 0.5 * (u_old + u_new);
    std::vector<SpectralField> out;
    out.reserve(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double d = terms[j].d;
        const double decay = std::exp(-d * dt);
        SpectralField next = decay * m[j];
        next.axpy(-std::expm1(-d * dt) / (d * d), ubar);
        out.push_back(std::move(next));
    }
    return out;
}

double history_norm(const HistoryField& eta, int order) {
    const auto& w = eta.grid().lambda_pow(1.0 + order);
    double s = 0.0;
    for (std::size_t i = 0; i < eta.nodes(); ++i)
        s += eta.w_mu()[i] * block_norm2(eta.grid(), eta.node_data(i), w);
    return std::sqrt(s);
}

double pi_functional(const HistoryField& eta, const Kernel& k, int order) {
    const auto& w = eta.grid().lambda_pow(1.0 + order);
    const std::vector<double> W = k.same_as(eta.kernel())
                                      ? eta.w_dmu()
                                      : product_weights(eta.sgrid(), [&](double s) { return -k.mu_prime(s); });
    double s = 0.0;
    for (std::size_t i = 0; i < eta.nodes(); ++i) s += W[i] * block_norm2(eta.grid(), eta.node_data(i), w);
    return 0.5 * s;
}

double memory_energy(const HistoryField& eta, int order) {
    if (eta.mode() != HistoryMode::prony) {
        const double n = history_norm(eta, order);
        return n * n;
    }
    const auto& q = order == 0 ? eta.quad0() : eta.quad1();
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += eta.terms()[j].c * eta.terms()[j].d * q[j];
    return s;
}

double memory_dissipation(const HistoryField& eta, int order) {
    if (eta.mode() != HistoryMode::prony) return pi_functional(eta, eta.kernel(), order);
    const auto& q = order == 0 ? eta.quad0() : eta.quad1();
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double d = eta.terms()[j].d;
        s += eta.terms()[j].c * d * d * q[j];
    }
    return 0.5 * s;
}

double tail_coupling(const HistoryField& eta, const SpectralField& u, int order) {
    if (!u.grid().same_as(eta.grid())) throw DimensionError("tail_coupling: grid mismatch");
    const auto& w = eta.grid().lambda_pow(1.0 + order);
    double s = 0.0;
    for (std::size_t i = 0; i < eta.nodes(); ++i)
        s += eta.w_mustar()[i] * block_dot(eta.grid(), eta.node_data(i), u.data().data(), w);
    return s;
}

double max_node_distance(const HistoryField& a, const HistoryField& b) {
    if (a.nodes() != b.nodes() || !a.grid().same_as(b.grid())) throw DimensionError("history shapes differ");
    const auto& w = a.grid().lambda_pow(0.0);
    std::vector<cplx> diff(a.block());
    double mx = 0.0;
    for (std::size_t i = 0; i < a.nodes(); ++i) {
        for (std::size_t q = 0; q < diff.size(); ++q) diff[q] = a.node_data(i)[q] - b.node_data(i)[q];
        mx = std::max(mx, block_norm2(a.grid(), diff.data(), w));
    }
    return std::sqrt(mx);
}

double history_distance_sq(const HistoryField& a, const HistoryField& b) {
    if (a.nodes() != b.nodes() || !a.grid().same_as(b.grid())) throw DimensionError("history shapes differ");
    const auto& w = a.grid().lambda_pow(1.0);
    std::vector<cplx> diff(a.block());
    double s = 0.0;
    for (std::size_t i = 0; i < a.nodes(); ++i) {
        for (std::size_t q = 0; q < diff.size(); ++q) diff[q] = a.node_data(i)[q] - b.node_data(i)[q];
        s += a.w_mu()[i] * block_norm2(a.grid(), diff.data(), w);
    }
    return s;
}

}  // namespace nsv
