#pragma once

#include <Eigen/Dense>

namespace ricci {

struct LpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
};

// Minimize c'x subject to A x = b, x >= 0, by a dense two-phase tableau simplex
// with Bland's rule. Throws LPFail if infeasible, unbounded, or out of iterations.
LpResult solve_standard_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           int max_iterations = 200000);

// Optimal transport between two probability vectors with cost matrix `cost`.
// Returns the coupling and its cost.
LpResult solve_transport(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::MatrixXd& cost);

}  // namespace ricci
