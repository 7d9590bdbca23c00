#include "ricci/geodesics.hpp"

#include <cmath>
#include <limits>

#include "ricci/analysis.hpp"
#include "ricci/error.hpp"
#include "ricci/means.hpp"

namespace ricci {

GeodesicDerivative geodesic_rhs(const MarkovChain& chain, const Density& rho, const Potential& psi) {
    const int n = chain.size();
    if (rho.size() != n || psi.size() != n) fail(ErrorCode::ShapeMismatch, "state and chain sizes differ");
    for (int x = 0; x < n; ++x)
        if (!(rho(x) > kInteriorFloor)) fail(ErrorCode::BoundaryState, "density at or below the interior floor");
    GeodesicDerivative d{Density::Zero(n), Potential::Zero(n)};
    for (const Edge& e : chain.edges()) {
        const MeanJet j = log_mean_jet(rho(e.a), rho(e.b));
        const double g = psi(e.b) - psi(e.a);
        d.drho(e.a) -= g * j.value * e.kab;
        d.drho(e.b) += g * j.value * e.kba;
        d.dpsi(e.a) -= 0.5 * g * g * j.d1 * e.kab;
        d.dpsi(e.b) -= 0.5 * g * g * j.d2 * e.kba;
    }
    return d;
}

namespace {

GeodesicDerivative rhs_or_left(const MarkovChain& chain, const Density& rho, const Potential& psi) {
    try {
        return geodesic_rhs(chain, rho, psi);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::BoundaryState) fail(ErrorCode::LeftInterior, "trajectory reached the interior floor");
        throw;
    }
}

GeodesicState rk4_step(const MarkovChain& chain, const GeodesicState& s, double h) {
    const GeodesicDerivative k1 = rhs_or_left(chain, s.rho, s.psi);
    const GeodesicDerivative k2 = rhs_or_left(chain, s.rho + 0.5 * h * k1.drho, s.psi + 0.5 * h * k1.dpsi);
    const GeodesicDerivative k3 = rhs_or_left(chain, s.rho + 0.5 * h * k2.drho, s.psi + 0.5 * h * k2.dpsi);
    const GeodesicDerivative k4 = rhs_or_left(chain, s.rho + h * k3.drho, s.psi + h * k3.dpsi);
    GeodesicState out;
    out.rho = s.rho + h / 6.0 * (k1.drho + 2.0 * k2.drho + 2.0 * k3.drho + k4.drho);
    out.psi = s.psi + h / 6.0 * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi);
    out.time = s.time + h;
    if (!out.rho.allFinite() || !out.psi.allFinite()) fail(ErrorCode::StepRejected, "non-finite state");
    if (std::abs(chain.pi().dot(out.rho) - chain.pi().dot(s.rho)) > 1e-10)
        fail(ErrorCode::StepRejected, "mass drift beyond 1e-10");
    if (out.rho.minCoeff() <= kInteriorFloor) fail(ErrorCode::LeftInterior, "trajectory reached the interior floor");
    return out;
}

void check_steps(double T, int steps) {
    if (steps < 1 || !std::isfinite(T) || T < 0.0) fail(ErrorCode::InvalidArgument, "need T >= 0 and steps >= 1");
}

}  // namespace

std::vector<GeodesicState> integrate(const MarkovChain& chain, const GeodesicState& initial, double T, int steps) {
    check_steps(T, steps);
    geodesic_rhs(chain, initial.rho, initial.psi);
    std::vector<GeodesicState> traj;
    traj.reserve(steps + 1);
    traj.push_back(initial);
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) traj.push_back(rk4_step(chain, traj.back(), h));
    return traj;
}

GeodesicState integrate_to(const MarkovChain& chain, const GeodesicState& initial, double T, int steps) {
    check_steps(T, steps);
    geodesic_rhs(chain, initial.rho, initial.psi);
    GeodesicState s = initial;
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) s = rk4_step(chain, s, h);
    return s;
}

namespace {

struct EndpointEval {
    bool ok = false;
    Eigen::VectorXd residual;
};

Potential unpin(const Eigen::VectorXd& x) {
    Potential psi(x.size() + 1);
    psi.head(x.size()) = x;
    psi(x.size()) = 0.0;
    return psi;
}

EndpointEval endpoint(const MarkovChain& chain, const Density& rho0, const Density& rho1, const Eigen::VectorXd& x,
                      int steps) {
    EndpointEval ev;
    try {
        const GeodesicState end = integrate_to(chain, {rho0, unpin(x), 0.0}, 1.0, steps);
        ev.residual = end.rho - rho1;
        ev.ok = true;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::LeftInterior && e.code() != ErrorCode::StepRejected) throw;
    }
    return ev;
}

}  // namespace

ShootResult shoot(const MarkovChain& chain, const Density& rho0, const Density& rho1, const ShootConfig& cfg) {
    const int n = chain.size();
    check_density(chain, rho0);
    check_density(chain, rho1);
    if (rho0.minCoeff() <= kInteriorFloor || rho1.minCoeff() <= kInteriorFloor)
        fail(ErrorCode::BoundaryState, "shooting needs interior endpoints");
    if (n < 2) fail(ErrorCode::InvalidArgument, "shooting needs at least two states");

    ShootResult out;
    SolverConfig scfg = cfg.solver;
    scfg.throw_on_divergence = false;
    out.fallback = solve_W(chain, rho0, rho1, scfg);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n - 1);
    if ((rho0 - rho1).lpNorm<Eigen::Infinity>() > 0.0) {
        const Potential guess = recover_potential(chain, out.fallback, 1);
        x = (guess.array() - guess(n - 1)).head(n - 1);
    }
    EndpointEval cur = endpoint(chain, rho0, rho1, x, cfg.steps);
    if (!cur.ok) {
        x.setZero();
        cur = endpoint(chain, rho0, rho1, x, cfg.steps);
    }
    int it = 0;
    for (; cur.ok && it < cfg.max_iterations; ++it) {
        if (cur.residual.lpNorm<Eigen::Infinity>() <= cfg.tol) break;
        Eigen::MatrixXd jac(n, n - 1);
        bool jac_ok = true;
        for (int i = 0; i < n - 1 && jac_ok; ++i) {
            const double step = cfg.fd_step * (1.0 + std::abs(x(i)));
            Eigen::VectorXd xp = x;
            xp(i) += step;
            const EndpointEval ev = endpoint(chain, rho0, rho1, xp, cfg.steps);
            if (!ev.ok) jac_ok = false;
            else jac.col(i) = (ev.residual - cur.residual) / step;
        }
        if (!jac_ok) break;
        const Eigen::VectorXd dx = jac.colPivHouseholderQr().solve(-cur.residual);
        double alpha = 1.0;
        bool improved = false;
        const double norm0 = cur.residual.norm();
        for (int ls = 0; ls < 30; ++ls) {
            const Eigen::VectorXd trial = x + alpha * dx;
            const EndpointEval ev = endpoint(chain, rho0, rho1, trial, cfg.steps);
            if (ev.ok && ev.residual.norm() < norm0) {
                x = trial;
                cur = ev;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) break;
    }
    out.iterations = it;
    if (cur.ok) {
        out.endpoint_error = cur.residual.lpNorm<Eigen::Infinity>();
        out.converged = out.endpoint_error <= cfg.tol;
    } else {
        out.endpoint_error = std::numeric_limits<double>::infinity();
    }
    Potential psi0 = unpin(x);
    psi0.array() -= chain.pi().dot(psi0);
    out.psi0 = psi0;
    if (out.converged) {
        out.trajectory = integrate(chain, {rho0, psi0, 0.0}, 1.0, cfg.steps);
        out.action = action(chain, rho0, psi0);
        out.length = std::sqrt(out.action);
    }
    return out;
}

double entropy_second_derivative(const MarkovChain& chain, const Density& rho, const Potential& psi, double tau,
                                 int steps) {
    const GeodesicState fwd = integrate_to(chain, {rho, psi, 0.0}, tau, steps);
    // The flow is reversible under psi -> -psi.
    const GeodesicState bwd = integrate_to(chain, {rho, -psi, 0.0}, tau, steps);
    return (entropy(chain, fwd.rho) - 2.0 * entropy(chain, rho) + entropy(chain, bwd.rho)) / (tau * tau);
}

ConvexityCheck entropy_convexity_along(const MarkovChain& chain, const PathSolution& path, double kappa) {
    ConvexityCheck out;
    out.worst_margin = std::numeric_limits<double>::infinity();
    const double h0 = entropy(chain, path.densities.front());
    const double h1 = entropy(chain, path.densities.back());
    const double w2 = path.w_est * path.w_est;
    for (std::size_t k = 1; k + 1 < path.densities.size(); ++k) {
        const double t = path.times[k];
        const double bound = (1.0 - t) * h0 + t * h1 - 0.5 * kappa * t * (1.0 - t) * w2;
        const double margin = bound - entropy(chain, path.densities[k]);
        if (margin < out.worst_margin) {
            out.worst_margin = margin;
            out.worst_node = static_cast<int>(k);
        }
    }
    return out;
}

}  // namespace ricci
