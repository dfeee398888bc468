#pragma once

#include <cstdint>

#include "nsv/grid.hpp"

namespace nsv {

/// Gaussian coefficients on the modes with |k| <= band, Leray-projected and
/// scaled so that 1/2 (||u||^2 + alpha ||u||_1^2) = energy. The draw depends
/// only on (seed, dim, band), so it is identical across resolutions.
SpectralField random_velocity(const GridPtr& grid, std::uint64_t seed, int band, double alpha, double energy);

/// Projected Gaussian field on every retained mode with amplitude
/// (1 + |k|^2)^(-decay/2) and unit L2 norm.
SpectralField random_dealiased(const GridPtr& grid, std::uint64_t seed, double decay = 1.0);

}  // namespace nsv
