#pragma once

#include <cmath>

#include "qsdwave/errors.hpp"
#include "qsdwave/jump_law.hpp"
#include "qsdwave/rng.hpp"

namespace qsdwave {

// One Brownian increment: Normal(0, sigma^2 dt). Consumes exactly two raw draws.
inline double gaussian_increment(RngStream& rng, double dt, double sigma) {
    if (!(dt > 0.0)) throw parameter_error("gaussian_increment: dt must be > 0");
    if (!(sigma > 0.0)) throw parameter_error("gaussian_increment: sigma must be > 0");
    return sigma * std::sqrt(dt) * rng.gaussian();
}

// One increment of the drifted process Z^c over dt:
//   (b - c) dt + sigma Normal(0, dt) + sum of Poisson(lambda dt) jumps.
// Draw order (documented for reproducibility): gaussian first, then the
// Poisson count, then the jump sizes in order.
inline double levy_increment(RngStream& rng, const LevyTriplet& triplet, double c, double dt) {
    if (!(dt > 0.0)) throw parameter_error("levy_increment: dt must be > 0");
    triplet.validate();
    double inc = (triplet.drift - c) * dt + triplet.diffusion * std::sqrt(dt) * rng.gaussian();
    const double lambda = triplet.jumps.intensity();
    if (lambda > 0.0) {
        const std::uint64_t k = rng.poisson(lambda * dt);
        for (std::uint64_t j = 0; j < k; ++j) inc += triplet.jumps.sample(rng);
    }
    return inc;
}

// Probability that a Brownian bridge from x0 to x1 over dt crosses 0:
// exp(-2 x0 x1 / (sigma^2 dt)). Non-positive endpoints count as already absorbed.
inline double bridge_hit_probability(double x0, double x1, double dt, double sigma) {
    if (!(dt > 0.0)) throw parameter_error("bridge_hit_probability: dt must be > 0");
    if (!(sigma > 0.0)) throw parameter_error("bridge_hit_probability: sigma must be > 0");
    if (x0 <= 0.0 || x1 <= 0.0) return 1.0;
    return std::exp(-2.0 * x0 * x1 / (sigma * sigma * dt));
}

}  // namespace qsdwave
