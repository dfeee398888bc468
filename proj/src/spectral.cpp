#include "nsv/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "nsv/error.hpp"
#include "nsv/simd.hpp"

namespace nsv {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <class T>
struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : p(static_cast<T*>(fftw_malloc(sizeof(T) * n))), size(n) {
        if (!p) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* p;
    std::size_t size;
};

// Per-thread transform engine for one grid shape.
class Transform {
public:
    explicit Transform(const Grid& g)
        : dim_(g.dim()), n_(g.n()), spec_(g.ncomplex()), real_(g.nreal()) {
        int dims[3] = {n_, n_, n_};
        std::lock_guard<std::mutex> lock(planner_mutex());
        back_ = fftw_plan_dft_c2r(dim_, dims, spec_.p, real_.p, FFTW_ESTIMATE);
        fwd_ = fftw_plan_dft_r2c(dim_, dims, real_.p, spec_.p, FFTW_ESTIMATE);
    }
    ~Transform() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(back_);
        fftw_destroy_plan(fwd_);
    }

    // out(x) = sum over all k of (i k_axis)^[axis>=0] u_k e^{ikx}
    void backward(const Grid& g, const cplx* c, int axis, double* out) {
        auto* s = reinterpret_cast<cplx*>(spec_.p);
        std::fill(s, s + spec_.size, cplx(0.0, 0.0));
        const double inv = 1.0 / std::sqrt(2.0);
        const auto& modes = g.modes();
        for (std::size_t m = 0; m < modes.size(); ++m) {
            cplx v = c[m] * inv;
            if (axis >= 0) v *= cplx(0.0, double(modes[m].k[axis]));
            s[modes[m].idx] = v;
            if (modes[m].mirrored) s[modes[m].conj_idx] = std::conj(v);
        }
        fftw_execute(back_);
        std::copy(real_.p, real_.p + real_.size, out);
    }

    void forward(const Grid& g, const double* in, cplx* c) {
        std::copy(in, in + real_.size, real_.p);
        fftw_execute(fwd_);
        const auto* s = reinterpret_cast<const cplx*>(spec_.p);
        const double scale = std::sqrt(2.0) / double(real_.size);
        const auto& modes = g.modes();
        for (std::size_t m = 0; m < modes.size(); ++m) c[m] = s[modes[m].idx] * scale;
    }

private:
    int dim_, n_;
    FftwBuffer<fftw_complex> spec_;
    FftwBuffer<double> real_;
    fftw_plan back_ = nullptr;
    fftw_plan fwd_ = nullptr;
};

Transform& transform_for(const Grid& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Transform>> cache;
    auto& slot = cache[{g.dim(), g.n()}];
    if (!slot) slot = std::make_unique<Transform>(g);
    return *slot;
}

}  // namespace

PhysicalField to_physical(const SpectralField& u) {
    const Grid& g = u.grid();
    auto& tr = transform_for(g);
    PhysicalField out(g.dim(), std::vector<double>(g.nreal()));
    for (int c = 0; c < g.dim(); ++c) tr.backward(g, u.comp(c), -1, out[c].data());
    return out;
}

SpectralField from_physical(const GridPtr& grid, const PhysicalField& phys) {
    if (static_cast<int>(phys.size()) != grid->dim()) throw DimensionError("from_physical: component count");
    SpectralField u(grid);
    auto& tr = transform_for(*grid);
    for (int c = 0; c < grid->dim(); ++c) {
        if (phys[c].size() != grid->nreal()) throw DimensionError("from_physical: sample count");
        tr.forward(*grid, phys[c].data(), u.comp(c));
    }
    return u;
}

void leray_project_in_place(SpectralField& u) {
    const Grid& g = u.grid();
    const int d = g.dim();
    const auto& modes = g.modes();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        cplx kd(0.0, 0.0);
        for (int c = 0; c < d; ++c) kd += double(modes[m].k[c]) * u.at(c, m);
        kd /= modes[m].lambda;
        for (int c = 0; c < d; ++c) u.at(c, m) -= double(modes[m].k[c]) * kd;
    }
}

SpectralField leray_project(SpectralField raw) {
    leray_project_in_place(raw);
    return raw;
}

SpectralField apply_power(const SpectralField& u, double r) {
    SpectralField out(u.grid_ptr());
    const auto& w = u.grid().lambda_pow(r / 2.0);
    const auto& ops = simd::active();
    const std::size_t nm = u.nmodes();
    for (int c = 0; c < u.dim(); ++c)
        ops.weighted_scale(nm, w.data(), reinterpret_cast<const double*>(u.comp(c)),
                           reinterpret_cast<double*>(out.comp(c)));
    return out;
}

double inner_r(const SpectralField& u, const SpectralField& v, double r) {
    require_same_grid(u, v, "inner_r");
    const auto& w = u.grid().lambda_pow(r);
    const auto& ops = simd::active();
    double s = 0.0;
    for (int c = 0; c < u.dim(); ++c)
        s += ops.weighted_dot(u.nmodes(), w.data(), reinterpret_cast<const double*>(u.comp(c)),
                              reinterpret_cast<const double*>(v.comp(c)));
    return s;
}

double norm_r_sq(const SpectralField& u, double r) {
    const auto& w = u.grid().lambda_pow(r);
    const auto& ops = simd::active();
    double s = 0.0;
    for (int c = 0; c < u.dim(); ++c)
        s += ops.weighted_norm2(u.nmodes(), w.data(), reinterpret_cast<const double*>(u.comp(c)));
    return s;
}

double norm_r(const SpectralField& u, double r) { return std::sqrt(norm_r_sq(u, r)); }

SpectralField bilinear_B(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u, v, "bilinear_B");
    const Grid& g = u.grid();
    const int d = g.dim();
    auto& tr = transform_for(g);
    const auto& ops = simd::active();
    const std::size_t nr = g.nreal();

    thread_local std::vector<double> buf;
    buf.assign(nr * static_cast<std::size_t>(2 * d + 1), 0.0);
    double* uphys = buf.data();
    double* acc = uphys + nr * d;
    double* tmp = acc + nr * d;

    for (int j = 0; j < d; ++j) tr.backward(g, u.comp(j), -1, uphys + nr * j);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            tr.backward(g, v.comp(i), j, tmp);
            ops.mul_add(nr, uphys + nr * j, tmp, acc + nr * i);
        }
    SpectralField out(u.grid_ptr());
    for (int i = 0; i < d; ++i) tr.forward(g, acc + nr * i, out.comp(i));
    leray_project_in_place(out);
    return out;
}

double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
    require_same_grid(u, w, "trilinear_b");
    return inner_r(bilinear_B(u, v), w, 0.0);
}

double check_interpolation(const SpectralField& u, double a, double b, double c) {
    if (!(a < b && b < c)) throw DomainError("check_interpolation requires a < b < c");
    const double w = (b - a) / (c - a);
    return std::pow(norm_r(u, c), w) * std::pow(norm_r(u, a), 1.0 - w) - norm_r(u, b);
}

double max_divergence(const SpectralField& u) {
    const auto& modes = u.grid().modes();
    double mx = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        cplx kd(0.0, 0.0);
        for (int c = 0; c < u.dim(); ++c) kd += double(modes[m].k[c]) * u.at(c, m);
        mx = std::max(mx, std::abs(kd));
    }
    return mx;
}

double max_abs_coeff(const SpectralField& u) {
    double mx = 0.0;
    for (const auto& c : u.data()) mx = std::max(mx, std::abs(c));
    return mx;
}

void add_real_mode(SpectralField& u, const Wavevector& k, const std::array<double, 3>& amp, bool sine) {
    auto look = u.grid().find(k);
    if (look.index < 0) throw DomainError("forcing wavevector is zero or outside the retained band");
    // sin(k.x) = (e^{ikx} - e^{-ikx}) / 2i, cos(k.x) = (e^{ikx} + e^{-ikx}) / 2
    const cplx unit = sine ? cplx(0.0, -0.5) : cplx(0.5, 0.0);
    for (int c = 0; c < u.dim(); ++c) {
        cplx v = std::sqrt(2.0) * amp[c] * unit;
        if (look.conjugate) v = std::conj(v);
        u.at(c, static_cast<std::size_t>(look.index)) += v;
    }
}

SpectralField resample(const SpectralField& u, const GridPtr& target) {
    if (target->dim() != u.dim()) throw DimensionError("resample: dimension mismatch");
    SpectralField out(target);
    const auto& modes = u.grid().modes();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        auto look = target->find(modes[m].k);
        if (look.index < 0) continue;
        for (int c = 0; c < u.dim(); ++c) out.at(c, static_cast<std::size_t>(look.index)) = u.at(c, m);
    }
    return out;
}

}  // namespace nsv
