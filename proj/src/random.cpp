#include "ricci/random.hpp"

namespace ricci {

Density sample_dirichlet_density(const MarkovChain& chain, Rng& rng, double concentration) {
    const int n = chain.size();
    std::gamma_distribution<double> gamma(concentration, 1.0);
    Eigen::VectorXd g(n);
    double total = 0.0;
    do {
        for (int i = 0; i < n; ++i) g(i) = gamma(rng);
        total = g.sum();
    } while (!(total > 0.0));
    g /= total;
    return g.cwiseQuotient(chain.pi());
}

Potential sample_gaussian(int n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Potential psi(n);
    for (int i = 0; i < n; ++i) psi(i) = normal(rng);
    return psi;
}

Density sample_near_boundary_density(const MarkovChain& chain, Rng& rng, double level) {
    const int n = chain.size();
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int j = pick(rng);
    Density rho = sample_dirichlet_density(chain, rng);
    const double keep = 1.0 - level * chain.pi()(j);
    const double rest = 1.0 - chain.pi()(j) * rho(j);
    if (rest <= 0.0) return rho;
    rho *= keep / rest;
    rho(j) = level;
    return rho;
}

}  // namespace ricci
