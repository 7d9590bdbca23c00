#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ricci/chain.hpp"

namespace ricci {

// B(rho, psi) = 1/2 <Deltahat rho grad psi, grad psi>_pi - <rhohat grad psi, grad Delta psi>_pi.
// Kernel form as explicit double sums over states. Throws BoundaryDensity.
double curvature_B(const MarkovChain& chain, const Density& rho, const Potential& psi);
// Same quantity through the sums over states and pairs of moves of a mapping representation.
double curvature_B_mapping(const MarkovChain& chain, const MappingRepresentation& rep, const Density& rho,
                           const Potential& psi);
// A(rho, psi) through a mapping representation.
double action_mapping(const MarkovChain& chain, const MappingRepresentation& rep, const Density& rho,
                      const Potential& psi);

// Edge-list evaluation of (A, B) used by samplers and the optimizer.
struct ActionPair {
    double a = 0.0;
    double b = 0.0;
};
ActionPair action_and_B(const MarkovChain& chain, const Density& rho, const Potential& psi);

// Analytic gradients of A and B with respect to rho and psi.
struct ActionGradients {
    double a = 0.0;
    double b = 0.0;
    Eigen::VectorXd da_drho, db_drho, da_dpsi, db_dpsi;
};
ActionGradients action_gradients(const MarkovChain& chain, const Density& rho, const Potential& psi);

// Symmetric matrices with A = psi' MA psi and B = psi' MB psi at fixed rho.
struct QuadraticForms {
    Eigen::MatrixXd ma;
    Eigen::MatrixXd mb;
};
QuadraticForms quadratic_forms(const MarkovChain& chain, const Density& rho);

// min over non-constant psi of B/A at fixed interior rho, with its minimizer
// (normalized to A = 1 and sum pi psi = 0).
struct RhoCurvature {
    double kappa = 0.0;
    Potential psi;
};
RhoCurvature curvature_at(const MarkovChain& chain, const Density& rho);

struct CriterionResult {
    bool commute = false;
    bool rate_invariant = false;
    bool involutive = false;
    std::optional<double> bound;
    double min_rate = 0.0;
};
CriterionResult criterion_bound(const MappingRepresentation& rep);

// (p+q)/2 + inf_{-1<b<1} theta(q(1+b), p(1-b)) / (1-b^2). Throws BadRate.
double two_point_kappa(double p, double q);
double two_point_relaxation(double p, double q);

struct BoundPart {
    double kappa = 0.0;
    double alpha = 0.0;
};
// min_i alpha_i kappa_i. Throws WeightSum.
double combine_bounds(const std::vector<BoundPart>& parts);
// lambda kappa. Throws BadLambda.
double lazy_bound(double kappa, double lambda);

struct CertifiedKappa {
    double value = 0.0;
    std::string provenance;  // criterion | two-point | tensorisation | laziness | closed-form
    std::string detail;
};
// Certified lower bound derived from how the chain was built, if one is known.
std::optional<CertifiedKappa> certified_kappa(const MarkovChain& chain);

struct CurvatureConfig {
    int restarts = 64;
    long samples = 100000;
    double floor = 1e-6;
    int max_iterations = 400;
    double tol = 1e-10;
    std::uint64_t seed = 42;
    int workers = 0;
};

struct SampleCheck {
    long samples = 0;
    double kappa = 0.0;
    double min_margin = 0.0;  // min of B - kappa A
    double min_ratio = 0.0;   // min of B / A
    long witness = -1;
    Density witness_rho;
    Potential witness_psi;
    long violations = 0;      // samples with B - kappa A < -threshold
    double threshold = 1e-8;
};
// Random interior (rho, psi): rho ~ Dirichlet(1) as a density, psi standard Gaussian.
SampleCheck sample_curvature(const MarkovChain& chain, double kappa, long samples, std::uint64_t seed,
                             double threshold = 1e-8, int workers = 0);

struct CurvatureReport {
    std::optional<CertifiedKappa> certified;
    std::optional<CriterionResult> criterion;
    double kappa_estimated = 0.0;
    Density argmin_rho;
    Potential argmin_psi;
    int restarts = 0;
    int restarts_converged = 0;
    double spread = 0.0;  // max - min over restart values
    bool at_floor = false;
    double min_rho = 0.0;
    SampleCheck sampling;                          // against kappa_estimated
    std::optional<SampleCheck> certified_sampling; // against the certified value
};

// Multi-start projected gradient minimization of B/A over interior rho, psi eliminated exactly.
CurvatureReport ricci_estimate(const MarkovChain& chain, const CurvatureConfig& config = {});

}  // namespace ricci
