#include "nsv/random_fields.hpp"

#include <cmath>
#include <random>

#include "nsv/error.hpp"
#include "nsv/spectral.hpp"

namespace nsv {

SpectralField random_velocity(const GridPtr& grid, std::uint64_t seed, int band, double alpha, double energy) {
    if (band < 1 || band > grid->kmax()) throw DomainError("random_velocity: band outside the retained modes");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    SpectralField u(grid);
    const int d = grid->dim();
    Wavevector k{0, 0, 0};
    const int hi2 = d == 3 ? band : 0;
    for (k[0] = -band; k[0] <= band; ++k[0])
        for (k[1] = -band; k[1] <= band; ++k[1])
            for (k[2] = -hi2; k[2] <= hi2; ++k[2]) {
                const int k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                auto look = grid->find(k);
                if (k2 == 0 || k2 > band * band || look.index < 0 || look.conjugate) continue;
                for (int c = 0; c < d; ++c) {
                    const double re = gauss(rng), im = gauss(rng);
                    u.at(c, static_cast<std::size_t>(look.index)) = cplx(re, im);
                }
            }
    leray_project_in_place(u);
    const double e = 0.5 * (norm_r_sq(u, 0.0) + alpha * norm_r_sq(u, 1.0));
    if (e > 0.0) u *= std::sqrt(energy / e);
    return u;
}

SpectralField random_dealiased(const GridPtr& grid, std::uint64_t seed, double decay) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    SpectralField u(grid);
    const auto& lam = grid->lambda();
    for (int c = 0; c < grid->dim(); ++c)
        for (std::size_t m = 0; m < grid->nmodes(); ++m) {
            const double a = std::pow(1.0 + lam[m], -decay / 2.0);
            const double re = gauss(rng), im = gauss(rng);
            u.at(c, m) = a * cplx(re, im);
        }
    leray_project_in_place(u);
    const double nrm = norm_r(u, 0.0);
    if (nrm > 0.0) u *= 1.0 / nrm;
    return u;
}

}  // namespace nsv
