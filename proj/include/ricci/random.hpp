#pragma once

#include <random>

#include "ricci/chain.hpp"

namespace ricci {

using Rng = std::mt19937_64;

// rho = g / pi with g ~ Dirichlet(concentration), so that sum pi rho = 1.
Density sample_dirichlet_density(const MarkovChain& chain, Rng& rng, double concentration = 1.0);

// Standard Gaussian potential.
Potential sample_gaussian(int n, Rng& rng);

// Density with one coordinate pushed to `level` and the rest Dirichlet.
Density sample_near_boundary_density(const MarkovChain& chain, Rng& rng, double level = 1e-6);

}  // namespace ricci
