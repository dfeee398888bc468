#pragma once

#include <vector>

#include "nsv/grid.hpp"

namespace nsv {

/// Physical-space samples, one n^dim array per component, row-major with the
/// last axis fastest. x_j = 2 pi j / n.
using PhysicalField = std::vector<std::vector<double>>;

PhysicalField to_physical(const SpectralField& u);

/// Forward transform followed by truncation to the retained modes. The
/// result is not projected.
SpectralField from_physical(const GridPtr& grid, const PhysicalField& phys);

/// u_k <- u_k - k (k . u_k) / |k|^2
SpectralField leray_project(SpectralField raw);
void leray_project_in_place(SpectralField& u);

/// Multiplies every mode by |k|^r, the action of A^{r/2}.
SpectralField apply_power(const SpectralField& u, double r);

/// <A^{r/2} u, A^{r/2} v>
double inner_r(const SpectralField& u, const SpectralField& v, double r);
double norm_r(const SpectralField& u, double r);
double norm_r_sq(const SpectralField& u, double r);

/// P((u . grad) v), pseudospectral with two-thirds truncation.
SpectralField bilinear_B(const SpectralField& u, const SpectralField& v);
double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w);

/// ||u||_c^w ||u||_a^(1-w) - ||u||_b with w = (b-a)/(c-a).
double check_interpolation(const SpectralField& u, double a, double b, double c);

/// max_k |k . u_k|
double max_divergence(const SpectralField& u);
double max_abs_coeff(const SpectralField& u);

/// Adds amp * sin(k.x) (or cos) to u; amp is a physical vector.
void add_real_mode(SpectralField& u, const Wavevector& k, const std::array<double, 3>& amp, bool sine);

/// Copies shared modes onto another grid (zero fill or truncation).
SpectralField resample(const SpectralField& u, const GridPtr& target);

}  // namespace nsv
