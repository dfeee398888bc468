#include "nsv/grid.hpp"

#include <cmath>
#include <string>

#include "nsv/error.hpp"
#include "nsv/simd.hpp"

namespace nsv {
namespace {

bool canonical(const Wavevector& k, int dim) {
    for (int i = dim - 1; i >= 0; --i) {
        if (k[i] > 0) return true;
        if (k[i] < 0) return false;
    }
    return false;  // k = 0
}

int wrap(int k, int n) { return k < 0 ? k + n : k; }

}  // namespace

Grid::Grid(int dim, int n) : dim_(dim), n_(n) {
    if (dim != 2 && dim != 3) throw DomainError("grid dimension must be 2 or 3");
    if (n < 4 || (n & (n - 1)) != 0) throw DomainError("grid size n must be a power of two >= 4");
    kmax_ = (n % 3 == 0) ? n / 3 - 1 : n / 3;
    const int half = n / 2 + 1;
    nreal_ = 1;
    for (int i = 0; i < dim; ++i) nreal_ *= static_cast<std::size_t>(n);
    ncomplex_ = nreal_ / static_cast<std::size_t>(n) * static_cast<std::size_t>(half);

    const int span = 2 * kmax_ + 1;
    std::size_t box = 1;
    for (int i = 0; i < dim; ++i) box *= static_cast<std::size_t>(span);
    lookup_.assign(box, -1);

    Wavevector k{0, 0, 0};
    const int k2_lo = dim == 3 ? -kmax_ : 0;
    const int k2_hi = dim == 3 ? kmax_ : 0;
    for (k[0] = -kmax_; k[0] <= kmax_; ++k[0])
        for (k[1] = -kmax_; k[1] <= kmax_; ++k[1])
            for (k[2] = k2_lo; k[2] <= k2_hi; ++k[2]) {
                if (!canonical(k, dim)) continue;
                Mode m;
                m.k = k;
                m.lambda = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
                const int last = k[dim - 1];
                if (dim == 2) {
                    m.idx = static_cast<std::size_t>(wrap(k[0], n)) * half + last;
                    m.conj_idx = static_cast<std::size_t>(wrap(-k[0], n)) * half;
                } else {
                    m.idx = (static_cast<std::size_t>(wrap(k[0], n)) * n + wrap(k[1], n)) * half + last;
                    m.conj_idx = (static_cast<std::size_t>(wrap(-k[0], n)) * n + wrap(-k[1], n)) * half;
                }
                m.mirrored = (last == 0);
                std::size_t key = 0;
                for (int i = 0; i < dim; ++i) key = key * span + (k[i] + kmax_);
                lookup_[key] = static_cast<int>(modes_.size());
                modes_.push_back(m);
                lambda_.push_back(m.lambda);
            }
}

GridPtr Grid::make(int dim, int n) { return std::make_shared<const Grid>(dim, n); }

const std::vector<double>& Grid::lambda_pow(double p) const {
    std::lock_guard<std::mutex> lock(pow_mutex_);
    auto it = pow_cache_.find(p);
    if (it != pow_cache_.end()) return it->second;
    std::vector<double> w(lambda_.size());
    for (std::size_t m = 0; m < w.size(); ++m) w[m] = p == 0.0 ? 1.0 : std::pow(lambda_[m], p);
    return pow_cache_.emplace(p, std::move(w)).first->second;
}

Grid::Lookup Grid::find(const Wavevector& k) const {
    const int span = 2 * kmax_ + 1;
    auto index_of = [&](const Wavevector& q) -> std::ptrdiff_t {
        std::size_t key = 0;
        for (int i = 0; i < dim_; ++i) {
            if (q[i] < -kmax_ || q[i] > kmax_) return -1;
            key = key * span + (q[i] + kmax_);
        }
        return lookup_[key];
    };
    for (int i = dim_; i < 3; ++i)
        if (k[i] != 0) return {};
    if (canonical(k, dim_)) return {index_of(k), false};
    Wavevector neg{-k[0], -k[1], -k[2]};
    if (canonical(neg, dim_)) return {index_of(neg), true};
    return {};
}

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)), data_(grid_->ncoeffs()) {}

void SpectralField::set_zero() { std::fill(data_.begin(), data_.end(), cplx(0.0, 0.0)); }

bool SpectralField::all_finite() const {
    for (const auto& c : data_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) { return axpy(1.0, o); }
SpectralField& SpectralField::operator-=(const SpectralField& o) { return axpy(-1.0, o); }

SpectralField& SpectralField::operator*=(double a) {
    for (auto& c : data_) c *= a;
    return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& o) {
    require_same_grid(*this, o, "axpy");
    simd::active().axpy(2 * data_.size(), a, o.raw(), raw());
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* op) {
    if (a.empty() || b.empty() || !a.grid().same_as(b.grid()))
        throw DimensionError(std::string(op) + ": fields live on different grids");
}

}  // namespace nsv
