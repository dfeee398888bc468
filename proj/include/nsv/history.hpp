#pragma once

#include <functional>
#include <vector>

#include "nsv/grid.hpp"
#include "nsv/kernel.hpp"

namespace nsv {

enum class HistoryMode { grid, prony };

/// Geometric lag grid s_i = ds_min (rho^i - 1)/(rho - 1), i = 0..M, s_M = s_max,
/// with trapezoidal weights.
struct SGrid {
    std::vector<double> s;
    std::vector<double> w;
    double ratio = 1.0;
    double ds_min = 0.0;
    double s_max = 0.0;
    std::size_t M() const { return s.size() - 1; }
};

SGrid make_sgrid(std::size_t M, double ds_min, double s_max);

/// W_i = int f(s) phi_i(s) ds over the hat functions of the lag grid, so that
/// sum_i W_i eta_i integrates f against the piecewise linear interpolant.
/// A kink of f at `kink` (if inside the grid) is split out.
std::vector<double> product_weights(const SGrid& sg, const std::function<double(double)>& f, double kink = -1.0);

/// Dafermos history eta(s) sampled on an SGrid. Prony mode additionally
/// carries the moments m_j = int e^{-d_j s} eta ds and the scalar quadratic
/// moments Q_j^r = int e^{-d_j s} ||eta||_{1+r}^2 ds, r = 0, 1.
class HistoryField {
public:
    HistoryField() = default;
    HistoryField(GridPtr grid, Kernel kernel, SGrid sgrid, HistoryMode mode);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Kernel& kernel() const { return kernel_; }
    const SGrid& sgrid() const { return sgrid_; }
    HistoryMode mode() const { return mode_; }
    std::size_t nodes() const { return sgrid_.s.size(); }
    std::size_t block() const { return grid_->ncoeffs(); }

    SpectralField node(std::size_t i) const;
    void set_node(std::size_t i, const SpectralField& v);
    cplx* node_data(std::size_t i) { return values_.data() + i * block(); }
    const cplx* node_data(std::size_t i) const { return values_.data() + i * block(); }
    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

    // product weights of mu, -mu' and mu_* on the lag grid
    const std::vector<double>& w_mu() const { return wmu_; }
    const std::vector<double>& w_dmu() const { return wdmu_; }
    const std::vector<double>& w_mustar() const { return wmustar_; }
    double kappa() const { return kappa_; }
    double delta() const { return delta_; }
    double s_star() const { return s_star_; }

    const std::vector<PronyTerm>& terms() const { return terms_; }
    std::vector<SpectralField>& moments() { return moments_; }
    const std::vector<SpectralField>& moments() const { return moments_; }
    std::vector<double>& quad0() { return q0_; }
    std::vector<double>& quad1() { return q1_; }
    const std::vector<double>& quad0() const { return q0_; }
    const std::vector<double>& quad1() const { return q1_; }

    /// The characteristic s = t - t0 leaving s = 0 at the start carries the
    /// kink of eta. Its position and value are tracked and used as an extra
    /// interpolation node until it leaves the grid.
    bool front_active() const { return front_s_ <= sgrid_.s_max; }
    double front_position() const { return front_s_; }
    const SpectralField& front_value() const { return front_; }
    void set_front(double s, const SpectralField& v);

    /// Recomputes Prony moments from the node values by quadrature.
    void sync_moments_from_nodes();

    /// Semi-Lagrangian shift by dt with trapezoidal source ubar:
    /// eta(s_i) <- Interp(eta, s_i - dt) + min(s_i, dt) ubar, eta(0) = 0.
    void transport(double dt, const SpectralField& ubar);

    /// Same shift without source. If mf_half is non-null, accumulates
    /// sum_i W_i (eta_old_i + eta_shifted_i) / 2 into it.
    void shift_only(double dt, SpectralField* mf_half);

    /// eta(s_i) += min(s_i, dt) ubar for i >= 1.
    void add_source(double dt, const SpectralField& ubar);

    /// Equivalent to transport(dt, ubars[q]) for q in order, with a single
    /// interpolation by the window length.
    void transport_window(double dt, const std::vector<SpectralField>& ubars);

    /// sum_i W_i min(s_i, dt) / 2
    double implicit_weight(double dt) const;

    /// Path-driven update: transport plus the Prony closure.
    HistoryField advance(const SpectralField& u_old, const SpectralField& u_new, double dt) const;
    void advance_in_place(const SpectralField& u_old, const SpectralField& u_new, double dt);

private:
    struct ShiftPlan {
        double dt = -1.0;
        std::vector<std::size_t> j;  // lower neighbour of s_i - dt
        std::vector<double> theta;   // weight on node j
        std::vector<double> sigma;   // source weight
    };
    static void build_plan(ShiftPlan& p, const std::vector<double>& s, double dt);
    const ShiftPlan& plan(double dt);

    GridPtr grid_;
    Kernel kernel_;
    SGrid sgrid_;
    HistoryMode mode_ = HistoryMode::grid;
    std::vector<cplx> values_;
    std::vector<double> wmu_, wdmu_, wmustar_;
    double kappa_ = 0.0, delta_ = 0.0, s_star_ = 0.0;
    std::vector<PronyTerm> terms_;
    std::vector<SpectralField> moments_;
    std::vector<double> q0_, q1_;
    ShiftPlan plan_, wplan_;
    double front_s_ = 0.0;
    SpectralField front_;

    void shift_node(std::size_t i, const ShiftPlan& p, double sigma, const double* src);
};

/// Lag grid for a kernel: M nodes, ds_min, s_max = s_max_factor / delta.
SGrid default_sgrid(const Kernel& k, std::size_t M, double ds_min, double s_max_factor = 40.0);

/// eta_0(s) = int_0^s phi0, cumulative trapezoid on the lag grid.
/// An empty sampler gives the zero history.
HistoryField init_history(GridPtr grid, const Kernel& k, const SGrid& sg, HistoryMode mode,
                          const std::function<SpectralField(double)>& phi0 = {});

/// Explicit history from a sampled path u(tau_k) (piecewise linear in tau).
HistoryField representation_oracle(const std::vector<double>& times, const std::vector<SpectralField>& path,
                                   const HistoryField& eta0, double t);

/// int mu A eta ds: product quadrature in grid mode, sum_j c_j d_j A m_j in Prony mode.
SpectralField memory_force(const HistoryField& eta, const Kernel& k);

/// Exponential integrator for dm_j/dt = -d_j m_j + u / d_j with ubar the
/// trapezoidal average of u_old and u_new.
std::vector<SpectralField> prony_advance(const std::vector<SpectralField>& m, const std::vector<PronyTerm>& terms,
                                         const SpectralField& u_old, const SpectralField& u_new, double dt);

/// (int mu ||eta||_{1+order}^2)^{1/2}, lag-grid product quadrature.
double history_norm(const HistoryField& eta, int order);

/// -1/2 int mu' ||eta||_{1+order}^2, lag-grid product quadrature.
double pi_functional(const HistoryField& eta, const Kernel& k, int order);

/// ||eta||^2 in M (order 0) or M^1: moment form in Prony mode, quadrature otherwise.
double memory_energy(const HistoryField& eta, int order);

/// Pi or Pi_1: moment form in Prony mode, quadrature otherwise.
double memory_dissipation(const HistoryField& eta, int order);

/// int mu_* <eta, u>_{1+order} ds
double tail_coupling(const HistoryField& eta, const SpectralField& u, int order);

/// sup over nodes of ||a_i - b_i||
double max_node_distance(const HistoryField& a, const HistoryField& b);

/// Squared M-norm of a - b on the lag grid.
double history_distance_sq(const HistoryField& a, const HistoryField& b);

}  // namespace nsv
