#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "ricci/chain.hpp"
#include "ricci/transport.hpp"

namespace ricci {

// Heat semigroup P_t = exp(t(K - I)) through the pi-symmetrized generator.
class HeatSemigroup {
public:
    explicit HeatSemigroup(const MarkovChain& chain);
    Density apply(const Density& rho, double t) const;
    // Eigenvalues of I - K in ascending order.
    const Eigen::VectorXd& spectrum() const { return spectrum_; }

private:
    Eigen::VectorXd sqrt_pi_;
    Eigen::MatrixXd basis_;
    Eigen::VectorXd spectrum_;
};

// Throws EigFail.
Density heat(const MarkovChain& chain, const Density& rho, double t);

// sum pi rho log rho with 0 log 0 = 0
double entropy(const MarkovChain& chain, const Density& rho);
// 1/2 sum (rho(x)-rho(y))(log rho(x) - log rho(y)) K pi; +inf if some rho(x) = 0
double fisher(const MarkovChain& chain, const Density& rho);

// Smallest nonzero eigenvalue of I - K. Throws EigFail.
double poincare_lambda(const MarkovChain& chain);

// Functions with max over edges |phi(x) - phi(y)| = 1.
std::vector<Potential> lipschitz_sampler(const MarkovChain& chain, int count, std::uint64_t seed);

// Largest |phi(x) - phi(y)| over support edges.
double lipschitz_constant(const MarkovChain& chain, const Potential& phi);

struct LadderConfig {
    int densities = 2000;
    int transport_samples = 24;
    int lipschitz_functions = 200;
    std::vector<double> subgaussian_times{0.5, 1.0, 2.0, 4.0};
    std::vector<double> evi_times{0.0, 0.05, 0.2};
    std::vector<double> evi_steps{1e-3, 1e-4};
    std::vector<double> contraction_times{0.25, 1.0};
    std::vector<double> derivative_times{0.0, 0.1};
    double derivative_step = 1e-3;
    double lambda = 0.0;  // functional-inequality constant; 0 means use kappa
    std::uint64_t seed = 42;
    SolverConfig solver;
    int workers = 0;
    bool keep_rows = true;
};

struct CheckRow {
    long sample = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs + slack - lhs; negative means violated
};

struct CheckResult {
    std::string name;
    std::string inequality;
    std::string bound_direction;
    std::string status = "skipped";  // pass | fail | inconclusive | skipped | error
    double slack = 0.0;
    long instances = 0;
    long violations = 0;
    double worst_margin = 0.0;
    long witness = -1;
    std::string note;
    std::vector<CheckRow> rows;
};

struct InequalityReport {
    double kappa = 0.0;
    double lambda = 0.0;
    double poincare_lambda = 0.0;
    double mlsi_lambda_est = 0.0;
    long mlsi_witness = -1;
    Density mlsi_witness_rho;
    double reverse_ov_lambda = 0.0;
    CheckResult poincare;
    CheckResult mlsi;
    CheckResult talagrand;
    CheckResult hwi;
    CheckResult hwi_estimate;
    CheckResult t1;
    CheckResult evi;
    CheckResult contraction;
    CheckResult metric_derivative;
    CheckResult subgaussian;
    bool ladder_consistent = true;  // MLSI pass => T_W pass => Poincare pass
    std::vector<CheckResult*> checks();
};

// Mixed pool: Dirichlet(1), Dirichlet(0.3), near-boundary (one coordinate 1e-6) and near-uniform draws.
std::vector<Density> density_pool(const MarkovChain& chain, int count, std::uint64_t seed);

InequalityReport verify_ladder(const MarkovChain& chain, double kappa, const LadderConfig& config = {});

}  // namespace ricci
