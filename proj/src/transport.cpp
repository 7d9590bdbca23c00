#include "ricci/transport.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ricci/error.hpp"
#include "ricci/lp.hpp"
#include "ricci/means.hpp"

namespace ricci {

namespace {

void check_shape(const MarkovChain& chain, const Eigen::VectorXd& v) {
    if (v.size() != chain.size()) fail(ErrorCode::ShapeMismatch, "vector length differs from state count");
}

void check_shape(const MarkovChain& chain, const Eigen::MatrixXd& m) {
    if (m.rows() != chain.size() || m.cols() != chain.size())
        fail(ErrorCode::ShapeMismatch, "edge field shape differs from state count");
}

}  // namespace

Eigen::MatrixXd gradient(const MarkovChain& chain, const Potential& psi) {
    check_shape(chain, psi);
    const int n = chain.size();
    Eigen::MatrixXd g(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) g(x, y) = psi(y) - psi(x);
    return g;
}

Eigen::VectorXd divergence(const MarkovChain& chain, const Eigen::MatrixXd& field) {
    check_shape(chain, field);
    const Eigen::MatrixXd& k = chain.kernel();
    return 0.5 * (field - field.transpose()).cwiseProduct(k).rowwise().sum();
}

Eigen::VectorXd laplacian(const MarkovChain& chain, const Potential& psi) {
    check_shape(chain, psi);
    return chain.kernel() * psi - psi;
}

double pi_inner(const MarkovChain& chain, const Eigen::VectorXd& phi, const Eigen::VectorXd& psi) {
    check_shape(chain, phi);
    check_shape(chain, psi);
    return (phi.array() * psi.array() * chain.pi().array()).sum();
}

double pi_inner(const MarkovChain& chain, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi) {
    check_shape(chain, phi);
    check_shape(chain, psi);
    const Eigen::MatrixXd kp = chain.pi().asDiagonal() * chain.kernel();
    return 0.5 * (phi.array() * psi.array() * kp.array()).sum();
}

Eigen::MatrixXd rho_hat(const Density& rho) {
    const int n = static_cast<int>(rho.size());
    Eigen::MatrixXd r(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) r(x, y) = theta(rho(x), rho(y));
    return r;
}

double rho_inner(const MarkovChain& chain, const Density& rho, const Eigen::MatrixXd& phi,
                 const Eigen::MatrixXd& psi) {
    check_shape(chain, rho);
    check_shape(chain, phi);
    check_shape(chain, psi);
    const Eigen::MatrixXd kp = chain.pi().asDiagonal() * chain.kernel();
    return 0.5 * (phi.array() * psi.array() * rho_hat(rho).array() * kp.array()).sum();
}

double action(const MarkovChain& chain, const Density& rho, const Potential& psi) {
    check_shape(chain, rho);
    check_shape(chain, psi);
    double s = 0.0;
    for (const Edge& e : chain.edges()) {
        const double g = psi(e.b) - psi(e.a);
        s += g * g * theta(rho(e.a), rho(e.b)) * e.weight;
    }
    return s;
}

double action_prime(const MarkovChain& chain, const Density& rho, const Momentum& v) {
    check_shape(chain, rho);
    check_shape(chain, v);
    double s = 0.0;
    for (const Edge& e : chain.edges()) {
        const double a = 0.5 * (alpha_cost(v(e.a, e.b), rho(e.a), rho(e.b)) + alpha_cost(v(e.b, e.a), rho(e.b), rho(e.a)));
        s += a * e.weight;
    }
    return s;
}

namespace {

// Interior-point solver for
//   min sum_k h sum_e w_e v_{k,e}^2 / theta(rhobar_{k,a}, rhobar_{k,b})
//   s.t. rho_k - rho_{k-1} + h div V_k = 0,  rho_k > 0,
// with a log barrier on the interior densities and equality-constrained Newton steps.
class PathProgram {
public:
    PathProgram(const MarkovChain& chain, const Density& rho0, const Density& rho1, int grid)
        : chain_(chain), edges_(chain.edges()), n_(chain.size()), ne_(static_cast<int>(edges_.size())), grid_(grid),
          h_(1.0 / grid), rho0_(rho0 / chain.pi().dot(rho0)), rho1_(rho1 / chain.pi().dot(rho1)) {
        n_rho_ = (grid_ - 1) * n_;
        n_var_ = n_rho_ + grid_ * ne_;
        n_con_ = grid_ * n_ - 1;
        build_constraints();
    }

    int n_var() const { return n_var_; }
    int n_rho() const { return n_rho_; }

    Eigen::VectorXd initial_point() const {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n_var_);
        std::vector<Density> rho(grid_ + 1);
        for (int k = 0; k <= grid_; ++k) {
            const double tau = double(k) / grid_;
            const double mix = (k == 0 || k == grid_) ? 0.0 : 0.5 * std::sin(M_PI * tau);
            rho[k] = (1.0 - mix) * ((1.0 - tau) * rho0_ + tau * rho1_) + mix * Density::Ones(n_);
            if (k > 0 && k < grid_) z.segment((k - 1) * n_, n_) = rho[k];
        }
        if (ne_ > 0) {
            Eigen::MatrixXd div = Eigen::MatrixXd::Zero(n_, ne_);
            for (int e = 0; e < ne_; ++e) {
                div(edges_[e].a, e) = edges_[e].kab;
                div(edges_[e].b, e) = -edges_[e].kba;
            }
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(div);
            for (int k = 1; k <= grid_; ++k) z.segment(n_rho_ + (k - 1) * ne_, ne_) = cod.solve(-(rho[k] - rho[k - 1]) / h_);
        }
        return z;
    }

    Density density(const Eigen::VectorXd& z, int k) const {
        if (k == 0) return rho0_;
        if (k == grid_) return rho1_;
        return z.segment((k - 1) * n_, n_);
    }

    double objective(const Eigen::VectorXd& z) const {
        double f = 0.0;
        for (int k = 1; k <= grid_; ++k) {
            const Density mid = 0.5 * (density(z, k - 1) + density(z, k));
            for (int e = 0; e < ne_; ++e) {
                const double v = z(n_rho_ + (k - 1) * ne_ + e);
                f += h_ * edges_[e].weight * alpha_cost(v, mid(edges_[e].a), mid(edges_[e].b));
            }
        }
        return f;
    }

    double interval_action(const Eigen::VectorXd& z, int k) const {
        const Density mid = 0.5 * (density(z, k - 1) + density(z, k));
        double f = 0.0;
        for (int e = 0; e < ne_; ++e) {
            const double v = z(n_rho_ + (k - 1) * ne_ + e);
            f += h_ * edges_[e].weight * alpha_cost(v, mid(edges_[e].a), mid(edges_[e].b));
        }
        return f;
    }

    Momentum momentum(const Eigen::VectorXd& z, int k) const {
        Momentum v = Momentum::Zero(n_, n_);
        for (int e = 0; e < ne_; ++e) {
            const double val = z(n_rho_ + (k - 1) * ne_ + e);
            v(edges_[e].a, edges_[e].b) = val;
            v(edges_[e].b, edges_[e].a) = -val;
        }
        return v;
    }

    bool interior(const Eigen::VectorXd& z) const { return n_rho_ == 0 || z.head(n_rho_).minCoeff() > 0.0; }

    // Barrier function f(z) - mu sum log rho.
    double barrier(const Eigen::VectorXd& z, double mu) const {
        if (!interior(z)) return std::numeric_limits<double>::infinity();
        double b = objective(z);
        for (int i = 0; i < n_rho_; ++i) b -= mu * std::log(z(i));
        return b;
    }

    // Gradient and Hessian of the barrier function.
    void derivatives(const Eigen::VectorXd& z, double mu, Eigen::VectorXd& grad,
                     std::vector<Eigen::Triplet<double>>& hess) const {
        grad = Eigen::VectorXd::Zero(n_var_);
        hess.clear();
        for (int k = 1; k <= grid_; ++k) {
            const Density lo = density(z, k - 1);
            const Density hi = density(z, k);
            for (int e = 0; e < ne_; ++e) {
                const Edge& ed = edges_[e];
                const int iv = n_rho_ + (k - 1) * ne_ + e;
                const double v = z(iv);
                const double s = 0.5 * (lo(ed.a) + hi(ed.a));
                const double u = 0.5 * (lo(ed.b) + hi(ed.b));
                const MeanJet j = log_mean_jet(s, u);
                const double c = h_ * ed.weight;
                const double th = j.value;
                const double th2 = th * th;
                const double th3 = th2 * th;
                const double gv = 2.0 * c * v / th;
                const double gs = -c * v * v * j.d1 / th2;
                const double gu = -c * v * v * j.d2 / th2;
                const double hvv = 2.0 * c / th;
                const double hvs = -2.0 * c * v * j.d1 / th2;
                const double hvu = -2.0 * c * v * j.d2 / th2;
                const double hss = c * v * v * (2.0 * j.d1 * j.d1 / th3 - j.d11 / th2);
                const double huu = c * v * v * (2.0 * j.d2 * j.d2 / th3 - j.d22 / th2);
                const double hsu = c * v * v * (2.0 * j.d1 * j.d2 / th3 - j.d12 / th2);
                // Local variables: v, then (rho_{k-1}(a), rho_k(a)) feeding s, (rho_{k-1}(b), rho_k(b)) feeding u.
                int idx[5] = {iv, -1, -1, -1, -1};
                if (k - 1 >= 1) {
                    idx[1] = (k - 2) * n_ + ed.a;
                    idx[3] = (k - 2) * n_ + ed.b;
                }
                if (k <= grid_ - 1) {
                    idx[2] = (k - 1) * n_ + ed.a;
                    idx[4] = (k - 1) * n_ + ed.b;
                }
                const double lg[5] = {gv, 0.5 * gs, 0.5 * gs, 0.5 * gu, 0.5 * gu};
                const int kind[5] = {0, 1, 1, 2, 2};  // v, s, u
                const double lh[3][3] = {{hvv, hvs, hvu}, {hvs, hss, hsu}, {hvu, hsu, huu}};
                const double scale[5] = {1.0, 0.5, 0.5, 0.5, 0.5};
                for (int p = 0; p < 5; ++p) {
                    if (idx[p] < 0) continue;
                    grad(idx[p]) += lg[p];
                    for (int q = 0; q < 5; ++q) {
                        if (idx[q] < 0) continue;
                        hess.emplace_back(idx[p], idx[q], scale[p] * scale[q] * lh[kind[p]][kind[q]]);
                    }
                }
            }
        }
        for (int i = 0; i < n_rho_; ++i) {
            grad(i) -= mu / z(i);
            hess.emplace_back(i, i, mu / (z(i) * z(i)));
        }
    }

    const Eigen::SparseMatrix<double>& constraints() const { return cmat_; }
    const Eigen::VectorXd& rhs() const { return rhs_; }

    double residual(const Eigen::VectorXd& z) const {
        if (n_con_ == 0) return 0.0;
        return (cmat_ * z - rhs_).lpNorm<Eigen::Infinity>();
    }

    int grid() const { return grid_; }
    int n_con() const { return n_con_; }

    // Minimum-norm correction onto C z = d, using a fixed factorization of C C'.
    Eigen::VectorXd feasibility_correction(const Eigen::VectorXd& z) const {
        if (n_con_ == 0) return Eigen::VectorXd::Zero(n_var_);
        const Eigen::VectorXd r = rhs_ - cmat_ * z;
        return cmat_.transpose() * gram_.solve(r);
    }

private:
    void build_constraints() {
        std::vector<Eigen::Triplet<double>> trip;
        rhs_ = Eigen::VectorXd::Zero(n_con_);
        for (int k = 1; k <= grid_; ++k) {
            for (int x = 0; x < n_; ++x) {
                const int row = (k - 1) * n_ + x;
                if (row >= n_con_) continue;
                if (k <= grid_ - 1) trip.emplace_back(row, (k - 1) * n_ + x, 1.0);
                else rhs_(row) -= rho1_(x);
                if (k - 1 >= 1) trip.emplace_back(row, (k - 2) * n_ + x, -1.0);
                else rhs_(row) += rho0_(x);
            }
            for (int e = 0; e < ne_; ++e) {
                const int col = n_rho_ + (k - 1) * ne_ + e;
                const int ra = (k - 1) * n_ + edges_[e].a;
                const int rb = (k - 1) * n_ + edges_[e].b;
                if (ra < n_con_) trip.emplace_back(ra, col, h_ * edges_[e].kab);
                if (rb < n_con_) trip.emplace_back(rb, col, -h_ * edges_[e].kba);
            }
        }
        cmat_.resize(n_con_, n_var_);
        cmat_.setFromTriplets(trip.begin(), trip.end());
        if (n_con_ > 0) {
            const Eigen::SparseMatrix<double> g = cmat_ * cmat_.transpose();
            gram_.compute(g);
            if (gram_.info() != Eigen::Success) fail(ErrorCode::Infeasible, "continuity constraints are degenerate");
        }
    }

    const MarkovChain& chain_;
    const std::vector<Edge>& edges_;
    int n_, ne_, grid_;
    double h_;
    Density rho0_, rho1_;
    int n_rho_ = 0, n_var_ = 0, n_con_ = 0;
    Eigen::SparseMatrix<double> cmat_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> gram_;
    Eigen::VectorXd rhs_;
};

struct NewtonStep {
    Eigen::VectorXd dz;
    double decrement = 0.0;
    bool ok = false;
};

NewtonStep newton_step(const PathProgram& prog, const Eigen::VectorXd& z, double mu) {
    const int nv = prog.n_var();
    const int nc = prog.n_con();
    Eigen::VectorXd grad;
    std::vector<Eigen::Triplet<double>> trip;
    prog.derivatives(z, mu, grad, trip);
    const auto& c = prog.constraints();
    for (int col = 0; col < c.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(c, col); it; ++it) {
            trip.emplace_back(nv + it.row(), it.col(), it.value());
            trip.emplace_back(it.col(), nv + it.row(), it.value());
        }
    Eigen::SparseMatrix<double> kkt(nv + nc, nv + nc);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt.makeCompressed();
    Eigen::VectorXd rhs(nv + nc);
    rhs.head(nv) = -grad;
    if (nc > 0) rhs.tail(nc) = prog.rhs() - c * z;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(kkt);
    NewtonStep out;
    if (lu.info() != Eigen::Success) return out;
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int refine = 0; refine < 2; ++refine) {
        const Eigen::VectorXd r = rhs - kkt * sol;
        sol += lu.solve(r);
    }
    if (!sol.allFinite()) return out;
    out.dz = sol.head(nv);
    out.decrement = std::max(0.0, -grad.dot(out.dz));
    out.ok = true;
    return out;
}

PathSolution run_solver(const MarkovChain& chain, const Density& rho0, const Density& rho1, const SolverConfig& cfg) {
    if (cfg.grid < 2) fail(ErrorCode::InvalidArgument, "grid must be at least 2");
    check_density(chain, rho0);
    check_density(chain, rho1);
    PathProgram prog(chain, rho0, rho1, cfg.grid);
    Eigen::VectorXd z = prog.initial_point();
    const double m = std::max(1, prog.n_rho());
    // Barrier weight mu = 1/t keeps the Newton system well scaled.
    double mu = std::max(prog.objective(z), 1e-6) / m;
    constexpr double kGrowth = 12.0;
    constexpr double kCenterTol = 1e-9;
    int iterations = 0;
    bool converged = false;
    bool failed = false;
    bool floor_hit = false;
    auto project = [&](Eigen::VectorXd& x) {
        const Eigen::VectorXd corr = prog.feasibility_correction(x);
        for (int i = 0; i < prog.n_rho(); ++i)
            if (x(i) + corr(i) <= 0.5 * x(i)) return;
        x += corr;
    };
    project(z);
    while (!failed) {
        for (int inner = 0; inner < 80; ++inner) {
            if (iterations >= cfg.max_iterations) {
                failed = true;
                break;
            }
            ++iterations;
            const NewtonStep step = newton_step(prog, z, mu);
            if (!step.ok) {
                failed = true;
                break;
            }
            if (0.5 * step.decrement <= kCenterTol * mu) break;
            double alpha = 1.0;
            for (int i = 0; i < prog.n_rho(); ++i)
                if (step.dz(i) < 0.0) alpha = std::min(alpha, -0.99 * z(i) / step.dz(i));
            const double f0 = prog.barrier(z, mu);
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                const Eigen::VectorXd trial = z + alpha * step.dz;
                const double f1 = prog.barrier(trial, mu);
                if (std::isfinite(f1) && f1 <= f0 - 0.25 * alpha * step.decrement + 1e-14 * std::abs(f0)) {
                    z = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // Rounding floor of the barrier value: accept if centred to working precision,
                // but mu cannot usefully shrink further.
                if (0.5 * step.decrement <= 1e-12 * (1.0 + std::abs(f0))) floor_hit = true;
                else failed = true;
                break;
            }
            project(z);
        }
        if (failed) break;
        const double f = prog.objective(z);
        if (m * mu <= cfg.tol * (1.0 + f)) {
            converged = true;
            break;
        }
        // Below the rounding level of the objective the gap certificate means nothing.
        if (floor_hit || m * mu <= 1e-15 * (1.0 + f)) break;
        mu /= kGrowth;
    }
    const double t = 1.0 / mu;

    PathSolution out;
    const int grid = cfg.grid;
    out.iterations = iterations;
    out.duality_gap = m / t;
    out.continuity_residual = prog.residual(z);
    out.converged = converged && out.continuity_residual <= cfg.residual_tol;
    for (int k = 0; k <= grid; ++k) {
        out.times.push_back(double(k) / grid);
        out.densities.push_back(prog.density(z, k));
    }
    for (int k = 1; k <= grid; ++k) {
        out.momenta.push_back(prog.momentum(z, k));
        out.interval_actions.push_back(prog.interval_action(z, k));
    }
    out.action = 0.0;
    for (double a : out.interval_actions) out.action += a;
    out.w_est = std::sqrt(std::max(0.0, out.action));
    return out;
}

}  // namespace

PathSolution solve_W(const MarkovChain& chain, const Density& rho0, const Density& rho1, const SolverConfig& config) {
    PathSolution out = run_solver(chain, rho0, rho1, config);
    if (config.refine && config.grid >= 4) {
        SolverConfig coarse = config;
        coarse.grid = config.grid / 2;
        coarse.refine = false;
        coarse.throw_on_divergence = false;
        const PathSolution c = run_solver(chain, rho0, rho1, coarse);
        out.refined = true;
        out.w_coarse = c.w_est;
        out.refinement_gap = std::abs(out.w_est - c.w_est);
        out.converged = out.converged && c.converged;
    }
    if (!out.converged && config.throw_on_divergence)
        fail(ErrorCode::SolverDiverged, "continuity residual " + std::to_string(out.continuity_residual) +
                                            ", duality gap " + std::to_string(out.duality_gap));
    return out;
}

Potential recover_potential(const MarkovChain& chain, const PathSolution& path, int interval) {
    if (interval < 1 || interval > static_cast<int>(path.momenta.size()))
        fail(ErrorCode::InvalidArgument, "interval index out of range");
    const int n = chain.size();
    const Density mid = 0.5 * (path.densities[interval - 1] + path.densities[interval]);
    const Momentum& v = path.momenta[interval - 1];
    // Weighted least squares: sum_e w theta (psi_b - psi_a - v/theta)^2, gauge sum pi psi = 0.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (const Edge& e : chain.edges()) {
        const double th = theta(mid(e.a), mid(e.b));
        if (th <= 0.0) continue;
        const double wt = e.weight * th;
        const double target = v(e.a, e.b) / th;
        lap(e.a, e.a) += wt;
        lap(e.b, e.b) += wt;
        lap(e.a, e.b) -= wt;
        lap(e.b, e.a) -= wt;
        rhs(e.b) += wt * target;
        rhs(e.a) -= wt * target;
    }
    lap.block(n, 0, 1, n) = chain.pi().transpose();
    lap.block(0, n, n, 1) = chain.pi();
    const Eigen::VectorXd sol = lap.colPivHouseholderQr().solve(rhs);
    return sol.head(n);
}

double wasserstein(const MarkovChain& chain, const Density& rho0, const Density& rho1, const Eigen::MatrixXd& metric,
                   int p) {
    check_shape(chain, rho0);
    check_shape(chain, rho1);
    check_shape(chain, metric);
    if (p != 1 && p != 2) fail(ErrorCode::InvalidArgument, "p must be 1 or 2");
    for (int x = 0; x < chain.size(); ++x) {
        if (metric(x, x) != 0.0) fail(ErrorCode::InvalidArgument, "metric diagonal must vanish");
        for (int y = 0; y < chain.size(); ++y)
            if (metric(x, y) != metric(y, x) || metric(x, y) < 0.0)
                fail(ErrorCode::InvalidArgument, "metric must be symmetric and nonnegative");
    }
    const Eigen::VectorXd mu = rho0.cwiseProduct(chain.pi()).cwiseMax(0.0);
    const Eigen::VectorXd nu = rho1.cwiseProduct(chain.pi()).cwiseMax(0.0);
    const Eigen::MatrixXd cost = p == 1 ? metric : Eigen::MatrixXd(metric.cwiseProduct(metric));
    const LpResult r = solve_transport(mu / mu.sum(), nu / nu.sum(), cost);
    const double v = std::max(0.0, r.objective);
    return p == 1 ? v : std::sqrt(v);
}

double wasserstein_graph(const MarkovChain& chain, const Density& rho0, const Density& rho1, int p) {
    return wasserstein(chain, rho0, rho1, graph_distance(chain).cast<double>(), p);
}

double total_variation(const MarkovChain& chain, const Density& rho0, const Density& rho1) {
    check_shape(chain, rho0);
    check_shape(chain, rho1);
    return (chain.pi().array() * (rho0 - rho1).array().abs()).sum();
}

double min_positive_rate(const MarkovChain& chain) {
    double k = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd& m = chain.kernel();
    for (int x = 0; x < chain.size(); ++x)
        for (int y = 0; y < chain.size(); ++y)
            if (m(x, y) > 0.0) k = std::min(k, m(x, y));
    return k;
}

MetricBounds metric_bounds(const MarkovChain& chain, const Density& rho0, const Density& rho1) {
    static const double c = theta_constant_c();
    MetricBounds b;
    b.c = c;
    b.k = min_positive_rate(chain);
    b.d_tv = total_variation(chain, rho0, rho1);
    const Eigen::MatrixXd d = graph_distance(chain).cast<double>();
    b.w1_graph = wasserstein(chain, rho0, rho1, d, 1);
    b.w2_graph = wasserstein(chain, rho0, rho1, d, 2);
    b.lower = std::sqrt(2.0) * b.w1_graph;
    b.upper = c / std::sqrt(b.k) * b.w2_graph;
    return b;
}

}  // namespace ricci
