#include "ricci/lp.hpp"

#include <cmath>
#include <vector>

#include "ricci/error.hpp"

namespace ricci {

namespace {

constexpr double kPivotTol = 1e-11;

class Tableau {
public:
    // Rows 0..m-1 are constraints, column `cols` is the right-hand side.
    Tableau(int m, int cols) : t_(Eigen::MatrixXd::Zero(m + 1, cols + 1)), basis_(m, -1), m_(m), cols_(cols) {}

    Eigen::MatrixXd& t() { return t_; }
    std::vector<int>& basis() { return basis_; }

    void pivot(int r, int c) {
        t_.row(r) /= t_(r, c);
        for (int i = 0; i <= m_; ++i)
            if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
        basis_[r] = c;
    }

    // Runs simplex on the objective row m_, restricted to columns < allowed.
    int run(int allowed, int max_iterations) {
        int it = 0;
        for (;; ++it) {
            if (it >= max_iterations) fail(ErrorCode::LPFail, "simplex iteration cap reached");
            int enter = -1;
            for (int j = 0; j < allowed; ++j)
                if (t_(m_, j) < -kPivotTol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return it;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (t_(i, enter) <= kPivotTol) continue;
                const double ratio = t_(i, cols_) / t_(i, enter);
                if (leave < 0 || ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) fail(ErrorCode::LPFail, "linear program is unbounded");
            pivot(leave, enter);
        }
    }

private:
    Eigen::MatrixXd t_;
    std::vector<int> basis_;
    int m_;
    int cols_;
};

}  // namespace

LpResult solve_standard_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           int max_iterations) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    if (b.size() != m || c.size() != n) fail(ErrorCode::ShapeMismatch, "LP dimensions disagree");
    const int cols = n + m;
    Tableau tab(m, cols);
    auto& t = tab.t();
    for (int i = 0; i < m; ++i) {
        const double sign = b(i) < 0.0 ? -1.0 : 1.0;
        t.row(i).head(n) = sign * a.row(i);
        t(i, n + i) = 1.0;
        t(i, cols) = sign * b(i);
        tab.basis()[i] = n + i;
    }
    // Phase I: minimize the sum of artificials.
    for (int i = 0; i < m; ++i) t.row(m) -= t.row(i);
    for (int i = 0; i < m; ++i) t(m, n + i) = 0.0;
    int iterations = tab.run(n, max_iterations);
    const double scale = 1.0 + b.cwiseAbs().sum();
    if (-t(m, cols) > 1e-9 * scale) fail(ErrorCode::LPFail, "linear program is infeasible");
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
        if (tab.basis()[i] < n) continue;
        for (int j = 0; j < n; ++j)
            if (std::abs(t(i, j)) > kPivotTol) {
                tab.pivot(i, j);
                break;
            }
    }
    // Phase II.
    t.row(m).setZero();
    t.row(m).head(n) = c.transpose();
    for (int i = 0; i < m; ++i) {
        const int j = tab.basis()[i];
        if (j < n && t(m, j) != 0.0) t.row(m) -= t(m, j) * t.row(i);
    }
    iterations += tab.run(n, max_iterations);
    LpResult out;
    out.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
        if (tab.basis()[i] < n) out.x(tab.basis()[i]) = std::max(0.0, t(i, cols));
    out.objective = c.dot(out.x);
    out.iterations = iterations;
    return out;
}

LpResult solve_transport(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(mu.size());
    const int k = static_cast<int>(nu.size());
    if (cost.rows() != n || cost.cols() != k) fail(ErrorCode::ShapeMismatch, "cost matrix shape");
    // The last column constraint is implied by the others and is dropped.
    const int rows = n + k - 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n * k);
    Eigen::VectorXd b(rows);
    Eigen::VectorXd c(n * k);
    const Eigen::VectorXd nu_scaled = nu * (mu.sum() / nu.sum());
    for (int i = 0; i < n; ++i) {
        b(i) = mu(i);
        for (int j = 0; j < k; ++j) {
            a(i, i * k + j) = 1.0;
            c(i * k + j) = cost(i, j);
            if (j < k - 1) a(n + j, i * k + j) = 1.0;
        }
    }
    for (int j = 0; j < k - 1; ++j) b(n + j) = nu_scaled(j);
    return solve_standard_lp(a, b, c);
}

}  // namespace ricci
