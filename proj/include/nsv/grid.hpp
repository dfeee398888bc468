#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace nsv {

using cplx = std::complex<double>;
using Wavevector = std::array<int, 3>;

/// One retained Fourier mode from the canonical half-space.
struct Mode {
    Wavevector k{0, 0, 0};
    double lambda = 0.0;       // |k|^2, the Stokes eigenvalue
    std::size_t idx = 0;       // position in the r2c array
    std::size_t conj_idx = 0;  // position of -k when it also lives in the r2c array
    bool mirrored = false;     // k_last == 0, so -k must be filled explicitly
};

/// Periodic box [0, 2pi)^dim with n points per axis. Only modes with every
/// |k_i| < n/3 are retained, one representative per +/- pair.
class Grid {
public:
    Grid(int dim, int n);

    static std::shared_ptr<const Grid> make(int dim, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    int kmax() const { return kmax_; }
    std::size_t nmodes() const { return modes_.size(); }
    std::size_t ncoeffs() const { return modes_.size() * static_cast<std::size_t>(dim_); }
    std::size_t nreal() const { return nreal_; }
    std::size_t ncomplex() const { return ncomplex_; }

    const std::vector<Mode>& modes() const { return modes_; }
    const std::vector<double>& lambda() const { return lambda_; }

    /// lambda^p per mode, computed once per exponent.
    const std::vector<double>& lambda_pow(double p) const;

    struct Lookup {
        std::ptrdiff_t index = -1;
        bool conjugate = false;  // the stored representative is -k
    };
    Lookup find(const Wavevector& k) const;

    bool same_as(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_; }

private:
    int dim_;
    int n_;
    int kmax_;
    std::size_t nreal_;
    std::size_t ncomplex_;
    std::vector<Mode> modes_;
    std::vector<double> lambda_;
    std::vector<int> lookup_;
    mutable std::mutex pow_mutex_;
    mutable std::map<double, std::vector<double>> pow_cache_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Divergence-free, mean-zero velocity field stored as scaled half-space
/// coefficients c_k = sqrt(2) u_k, so that ||u||^2 = sum |c_k|^2.
/// Layout is component-major: coeff(c, m) = data[c * nmodes + m].
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(GridPtr grid);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    bool empty() const { return !grid_; }
    int dim() const { return grid_->dim(); }
    std::size_t nmodes() const { return grid_->nmodes(); }
    std::size_t size() const { return data_.size(); }

    cplx& at(int comp, std::size_t m) { return data_[comp * nmodes() + m]; }
    const cplx& at(int comp, std::size_t m) const { return data_[comp * nmodes() + m]; }
    cplx* comp(int c) { return data_.data() + c * nmodes(); }
    const cplx* comp(int c) const { return data_.data() + c * nmodes(); }

    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }
    double* raw() { return reinterpret_cast<double*>(data_.data()); }
    const double* raw() const { return reinterpret_cast<const double*>(data_.data()); }

    void set_zero();
    bool all_finite() const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double a);
    /// this += a * o
    SpectralField& axpy(double a, const SpectralField& o);

private:
    GridPtr grid_;
    std::vector<cplx> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Throws DimensionError unless both fields share a grid shape.
void require_same_grid(const SpectralField& a, const SpectralField& b, const char* op);

}  // namespace nsv
