#include "nsv/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nsv/error.hpp"

namespace nsv {
namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kMinDelta = 1e-8;

template <class F>
double integrate(F f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 20, kQuadTol);
}

}  // namespace

struct Kernel::Impl {
    bool exponential = true;
    std::vector<PronyTerm> terms;
    // table
    std::vector<double> s, mu, rate;  // rate[i] on [s_i, s_{i+1}); rate.back() also drives the tail
    std::vector<double> tail_mass;    // int_{s_i}^inf mu

    KernelValues eval(double x) const {
        if (exponential) {
            KernelValues v{0.0, 0.0, 0.0};
            for (const auto& t : terms) {
                const double e = t.c * std::exp(-t.d * x);
                v.g += e;
                v.mu += t.d * e;
                v.mu_prime -= t.d * t.d * e;
            }
            return v;
        }
        std::size_t i = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) - 1;
        const std::size_t last = s.size() - 1;
        const double r = i < last ? rate[i] : rate.back();
        const double m = mu[i] * std::exp(-r * (x - s[i]));
        double g;
        if (i < last) {
            const double h = s[i + 1] - x;
            g = m * (r > 0.0 ? -std::expm1(-r * h) / r : h) + tail_mass[i + 1];
        } else {
            g = m / r;
        }
        return {g, m, -r * m};
    }
};

Kernel Kernel::exponential_sum(const std::vector<std::pair<double, double>>& terms, Normalization norm) {
    if (terms.empty()) throw ValidationError("exponential kernel needs at least one term");
    auto impl = std::make_shared<Impl>();
    double mass = 0.0;
    for (const auto& [c, d] : terms) {
        if (!(c > 0.0) || !(d > 0.0) || !std::isfinite(c) || !std::isfinite(d))
            throw ValidationError("exponential kernel terms need c > 0 and d > 0");
        impl->terms.push_back({c, d});
        mass += c / d;
    }
    if (norm == Normalization::unit_mass)
        for (auto& t : impl->terms) t.c /= mass;
    Kernel k;
    k.impl_ = std::move(impl);
    return k;
}

Kernel Kernel::tabulated(std::vector<double> s, std::vector<double> mu, Normalization norm) {
    if (s.size() != mu.size() || s.size() < 2) throw ValidationError("kernel table needs at least two (s, mu) rows");
    if (s.front() != 0.0) throw ValidationError("kernel table must start at s = 0");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i]) || !std::isfinite(mu[i]) || !(mu[i] > 0.0))
            throw ValidationError("kernel table row " + std::to_string(i) + ": mu must be finite and positive");
        if (i > 0 && !(s[i] > s[i - 1]))
            throw ValidationError("kernel table row " + std::to_string(i) + ": s must increase strictly");
        if (i > 0 && mu[i] > mu[i - 1])
            throw ValidationError("kernel table row " + std::to_string(i) + ": mu must be non-increasing");
    }
    auto impl = std::make_shared<Impl>();
    impl->exponential = false;
    impl->s = std::move(s);
    impl->mu = std::move(mu);
    const std::size_t n = impl->s.size();
    impl->rate.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        impl->rate[i] = std::log(impl->mu[i] / impl->mu[i + 1]) / (impl->s[i + 1] - impl->s[i]);
    if (!(impl->rate.back() > 0.0)) throw ValidationError("kernel table: last segment must decay (tail not summable)");

    auto build_tail = [&] {
        impl->tail_mass.assign(n, 0.0);
        impl->tail_mass[n - 1] = impl->mu[n - 1] / impl->rate.back();
        for (std::size_t i = n - 1; i-- > 0;) {
            const double h = impl->s[i + 1] - impl->s[i], r = impl->rate[i];
            const double seg = impl->mu[i] * (r > 0.0 ? -std::expm1(-r * h) / r : h);
            impl->tail_mass[i] = impl->tail_mass[i + 1] + seg;
        }
    };
    build_tail();
    if (norm == Normalization::unit_mass) {
        // int g = int s mu
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            m += integrate([&](double x) { return x * impl->eval(x).mu; }, impl->s[i], impl->s[i + 1]);
        const double S = impl->s.back(), r = impl->rate.back();
        m += impl->mu.back() * (S / r + 1.0 / (r * r));
        for (auto& v : impl->mu) v /= m;
        build_tail();
    }
    Kernel k;
    k.impl_ = std::move(impl);
    return k;
}

Kernel Kernel::from_csv(const std::string& path, Normalization norm) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open kernel table " + path);
    std::vector<double> s, mu;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b;
        if (!(ss >> a >> b)) {
            if (s.empty() && lineno == 1) continue;
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        s.push_back(a);
        mu.push_back(b);
    }
    return tabulated(std::move(s), std::move(mu), norm);
}

KernelValues Kernel::evaluate(double s) const {
    if (!(s >= 0.0)) throw DomainError("kernel evaluated at negative or NaN lag");
    const double x = s / eps_;
    KernelValues v = impl_->eval(x);
    return {v.g / eps_, v.mu / (eps_ * eps_), v.mu_prime / (eps_ * eps_ * eps_)};
}

bool Kernel::is_exponential() const { return impl_->exponential; }

std::vector<PronyTerm> Kernel::prony_terms() const {
    if (!impl_->exponential) throw UnsupportedError("Prony terms need an exponential-sum kernel");
    std::vector<PronyTerm> out;
    for (const auto& t : impl_->terms) out.push_back({t.c / eps_, t.d / eps_});
    return out;
}

const std::vector<double>& Kernel::table_s() const { return impl_->s; }
const std::vector<double>& Kernel::table_mu() const { return impl_->mu; }

std::string Kernel::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (impl_->exponential) {
        os << "exponential";
        for (const auto& t : impl_->terms) os << " (" << t.c << "," << t.d << ")";
    } else {
        os << "tabulated rows=" << impl_->s.size();
    }
    os << " eps=" << eps_;
    return os.str();
}

double total_mass(const Kernel& k) {
    const auto& im = *k.impl_;
    const double eps = k.epsilon();
    auto mu = [&](double s) { return k.evaluate(s).mu; };
    if (im.exponential) return integrate(mu, 0.0, std::numeric_limits<double>::infinity());
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < im.s.size(); ++i) m += integrate(mu, eps * im.s[i], eps * im.s[i + 1]);
    // exact exponential tail
    return m + im.mu.back() / (eps * im.rate.back());
}

double g_mass(const Kernel& k) {
    return integrate([&](double s) { return k.evaluate(s).g; }, 0.0, std::numeric_limits<double>::infinity());
}

double dafermos_rate(const Kernel& k) {
    const auto& im = *k.impl_;
    double d = std::numeric_limits<double>::infinity();
    if (im.exponential)
        for (const auto& t : im.terms) d = std::min(d, t.d);
    else
        for (double r : im.rate) d = std::min(d, r);
    d /= k.epsilon();
    if (!(d >= kMinDelta)) throw ValidationError("kernel is not admissible: Dafermos rate below 1e-8");
    return d;
}

TailSplit tail_split(const Kernel& k) {
    const double kappa = total_mass(k);
    const double g0 = k.g(0.0);
    auto head = [&](double s) { return g0 - k.g(s); };  // int_0^s mu
    double lo = 0.0, hi = 1.0 * k.epsilon();
    while (head(hi) < 0.5 * kappa) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw ConvergenceError("tail_split: half mass not reached");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (head(mid) < 0.5 * kappa ? lo : hi) = mid;
    }
    const double s_star = 0.5 * (lo + hi);
    return {s_star, k.mu(s_star), k};
}

Kernel rescale(const Kernel& k, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("rescale: eps must lie in (0, 1]");
    Kernel out = k;
    out.eps_ = k.eps_ * eps;
    return out;
}

}  // namespace nsv
