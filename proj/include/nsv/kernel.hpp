#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nsv {

enum class Normalization {
    unit_mass,  // rescale so that int_0^inf g = 1
    as_given,
};

struct KernelValues {
    double g;
    double mu;
    double mu_prime;
};

/// One exponential term of g(s) = sum_j c_j exp(-d_j s).
struct PronyTerm {
    double c;
    double d;
};

/// Memory kernel g with mu = -g'. Immutable; copies share the underlying data.
class Kernel {
public:
    /// g(s) = sum c_j exp(-d_j s), terms given as (c_j, d_j).
    static Kernel exponential_sum(const std::vector<std::pair<double, double>>& terms,
                                  Normalization norm = Normalization::unit_mass);

    /// Samples (s_i, mu_i) with s_0 = 0, strictly increasing s, positive
    /// non-increasing mu. Log-linear between samples, exponential tail
    /// continuing the last segment.
    static Kernel tabulated(std::vector<double> s, std::vector<double> mu,
                            Normalization norm = Normalization::unit_mass);

    /// Two-column CSV (s, mu); a non-numeric first line is treated as a header.
    static Kernel from_csv(const std::string& path, Normalization norm = Normalization::unit_mass);

    KernelValues evaluate(double s) const;
    double g(double s) const { return evaluate(s).g; }
    double mu(double s) const { return evaluate(s).mu; }
    double mu_prime(double s) const { return evaluate(s).mu_prime; }

    double epsilon() const { return eps_; }
    bool is_exponential() const;

    /// Terms of the (rescaled) kernel; UnsupportedError for tables.
    std::vector<PronyTerm> prony_terms() const;

    /// Table samples for tabulated kernels (unscaled), empty otherwise.
    const std::vector<double>& table_s() const;
    const std::vector<double>& table_mu() const;

    std::string describe() const;

    /// Same underlying kernel and scale.
    bool same_as(const Kernel& o) const { return impl_ == o.impl_ && eps_ == o.eps_; }

private:
    struct Impl;
    friend Kernel rescale(const Kernel&, double);
    friend double dafermos_rate(const Kernel&);
    friend double total_mass(const Kernel&);
    std::shared_ptr<const Impl> impl_;
    double eps_ = 1.0;
};

/// kappa = int_0^inf mu, adaptive Gauss-Kronrod with relative tolerance 1e-10.
double total_mass(const Kernel& k);

/// int_0^inf g, same quadrature.
double g_mass(const Kernel& k);

/// Largest delta with mu' + delta mu <= 0; ValidationError below 1e-8.
double dafermos_rate(const Kernel& k);

struct TailSplit {
    double s_star;
    double mu_split;  // mu(s_star)
    Kernel kernel;
    double mu_star(double s) const { return s <= s_star ? mu_split : kernel.mu(s); }
};

/// s_star with int_0^{s_star} mu = kappa / 2.
TailSplit tail_split(const Kernel& k);

/// g_eps(s) = g(s/eps)/eps, mu_eps(s) = mu(s/eps)/eps^2.
Kernel rescale(const Kernel& k, double eps);

}  // namespace nsv
