#pragma once

#include <optional>
#include <vector>

#include "ricci/chain.hpp"
#include "ricci/transport.hpp"

namespace ricci {

struct GeodesicState {
    Density rho;
    Potential psi;
    double time = 0.0;
};

struct GeodesicDerivative {
    Density drho;
    Potential dpsi;
};

constexpr double kInteriorFloor = 1e-10;

// drho(x) = -sum_y (psi(y)-psi(x)) theta(rho(x),rho(y)) K(x,y)
// dpsi(x) = -1/2 sum_y (psi(x)-psi(y))^2 d1theta(rho(x),rho(y)) K(x,y)
// Throws BoundaryState.
GeodesicDerivative geodesic_rhs(const MarkovChain& chain, const Density& rho, const Potential& psi);

// Classical RK4 with steps of size T/steps. Throws LeftInterior, StepRejected.
std::vector<GeodesicState> integrate(const MarkovChain& chain, const GeodesicState& initial, double T, int steps);

// Final state only, same scheme.
GeodesicState integrate_to(const MarkovChain& chain, const GeodesicState& initial, double T, int steps);

struct ShootConfig {
    int steps = 1000;        // RK4 steps per unit time
    double tol = 1e-8;       // max |rho(1) - rho1|
    int max_iterations = 50;
    double fd_step = 1e-7;
    SolverConfig solver;     // used for the initial guess and the fallback
};

struct ShootResult {
    bool converged = false;
    Potential psi0;
    std::vector<GeodesicState> trajectory;
    double endpoint_error = 0.0;
    int iterations = 0;
    double action = 0.0;  // A(rho0, psi0), constant along the geodesic
    double length = 0.0;  // sqrt(action)
    // Convex-solver path; always computed, reported as the result when shooting fails.
    PathSolution fallback;
};

// Damped Gauss-Newton on psi0 -> rho(1) with one coordinate of psi0 pinned.
// Both endpoints must be interior. Non-convergence is reported, not thrown.
ShootResult shoot(const MarkovChain& chain, const Density& rho0, const Density& rho1, const ShootConfig& config = {});

// d^2/dt^2 H(rho_t) at t = 0 along the geodesic ODE, by central differences with step tau.
double entropy_second_derivative(const MarkovChain& chain, const Density& rho, const Potential& psi, double tau = 1e-3,
                                 int steps = 20);

// min over interior grid nodes of (1-t)H0 + tH1 - (kappa/2) t(1-t) W^2 - H(rho_t), with W = path.w_est.
struct ConvexityCheck {
    double worst_margin = 0.0;
    int worst_node = -1;
};
ConvexityCheck entropy_convexity_along(const MarkovChain& chain, const PathSolution& path, double kappa);

}  // namespace ricci
