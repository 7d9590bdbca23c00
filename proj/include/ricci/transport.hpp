#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ricci/chain.hpp"

namespace ricci {

// Momentum fields are stored as dense antisymmetric n x n matrices.
using Momentum = Eigen::MatrixXd;

// grad psi (x,y) = psi(y) - psi(x)
Eigen::MatrixXd gradient(const MarkovChain& chain, const Potential& psi);
// (div Psi)(x) = 1/2 sum_y (Psi(x,y) - Psi(y,x)) K(x,y)
Eigen::VectorXd divergence(const MarkovChain& chain, const Eigen::MatrixXd& field);
// (K - I) psi
Eigen::VectorXd laplacian(const MarkovChain& chain, const Potential& psi);
// <phi, psi>_pi on functions
double pi_inner(const MarkovChain& chain, const Eigen::VectorXd& phi, const Eigen::VectorXd& psi);
// <Phi, Psi>_pi = 1/2 sum Phi Psi K pi on edge fields
double pi_inner(const MarkovChain& chain, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi);
// <Phi, Psi>_rho = 1/2 sum Phi Psi rhohat K pi
double rho_inner(const MarkovChain& chain, const Density& rho, const Eigen::MatrixXd& phi,
                 const Eigen::MatrixXd& psi);
// rhohat(x,y) = theta(rho(x), rho(y))
Eigen::MatrixXd rho_hat(const Density& rho);

// A(rho, psi) = 1/2 sum (psi(y)-psi(x))^2 rhohat K pi
double action(const MarkovChain& chain, const Density& rho, const Potential& psi);
// A'(rho, V) = 1/2 sum alpha(V(x,y), rho(x), rho(y)) K pi, possibly +inf
double action_prime(const MarkovChain& chain, const Density& rho, const Momentum& v);

struct SolverConfig {
    int grid = 32;
    double tol = 1e-10;           // relative duality gap target
    int max_iterations = 600;     // total Newton steps
    double residual_tol = 1e-9;   // continuity residual accepted as converged
    bool refine = false;          // also solve on grid/2 and report the gap
    bool throw_on_divergence = true;
};

struct PathSolution {
    std::vector<double> times;
    std::vector<Density> densities;        // grid + 1 entries
    std::vector<Momentum> momenta;         // one per interval
    std::vector<double> interval_actions;  // h * A'(midpoint density, V_k)
    double action = 0.0;
    double w_est = 0.0;
    bool converged = false;
    int iterations = 0;
    double continuity_residual = 0.0;
    double duality_gap = 0.0;
    // Filled when refinement is requested.
    bool refined = false;
    double w_coarse = 0.0;
    double refinement_gap = 0.0;
};

// Time-discretized convex formulation of W with midpoint densities on each interval.
PathSolution solve_W(const MarkovChain& chain, const Density& rho0, const Density& rho1,
                     const SolverConfig& config = {});

// Least-squares potential with rhohat grad psi ~ V on interval k, normalized to sum pi psi = 0.
Potential recover_potential(const MarkovChain& chain, const PathSolution& path, int interval);

// Exact LP optimum of (sum d^p q)^{1/p} over couplings of the measures rho0 pi and rho1 pi.
double wasserstein(const MarkovChain& chain, const Density& rho0, const Density& rho1, const Eigen::MatrixXd& metric,
                   int p);
double wasserstein_graph(const MarkovChain& chain, const Density& rho0, const Density& rho1, int p);
// sum_x pi(x) |rho0 - rho1|
double total_variation(const MarkovChain& chain, const Density& rho0, const Density& rho1);

// Smallest positive kernel entry, diagonal included.
double min_positive_rate(const MarkovChain& chain);

struct MetricBounds {
    double d_tv = 0.0;
    double w1_graph = 0.0;
    double w2_graph = 0.0;
    double lower = 0.0;  // sqrt(2) W_{1,g}
    double upper = 0.0;  // (c / sqrt(k)) W_{2,g}
    double k = 0.0;
    double c = 0.0;
};

MetricBounds metric_bounds(const MarkovChain& chain, const Density& rho0, const Density& rho1);

}  // namespace ricci
