#include "ricci/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ricci/error.hpp"
#include "ricci/parallel.hpp"
#include "ricci/random.hpp"

namespace ricci {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HeatSemigroup::HeatSemigroup(const MarkovChain& chain) {
    const int n = chain.size();
    sqrt_pi_ = chain.pi().cwiseSqrt();
    Eigen::MatrixXd s(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            s(x, y) = sqrt_pi_(x) * ((x == y ? 1.0 : 0.0) - chain.kernel()(x, y)) / sqrt_pi_(y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
    if (eig.info() != Eigen::Success) fail(ErrorCode::EigFail, "symmetric eigensolver failed");
    basis_ = eig.eigenvectors();
    spectrum_ = eig.eigenvalues();
}

Density HeatSemigroup::apply(const Density& rho, double t) const {
    if (rho.size() != sqrt_pi_.size()) fail(ErrorCode::ShapeMismatch, "density length differs from state count");
    if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "time must be nonnegative");
    const Eigen::VectorXd coeff = basis_.transpose() * rho.cwiseProduct(sqrt_pi_);
    const Eigen::VectorXd decayed = coeff.cwiseProduct((-t * spectrum_).array().exp().matrix());
    return (basis_ * decayed).cwiseQuotient(sqrt_pi_);
}

Density heat(const MarkovChain& chain, const Density& rho, double t) { return HeatSemigroup(chain).apply(rho, t); }

double entropy(const MarkovChain& chain, const Density& rho) {
    if (rho.size() != chain.size()) fail(ErrorCode::ShapeMismatch, "density length differs from state count");
    double h = 0.0;
    for (int x = 0; x < rho.size(); ++x)
        if (rho(x) > 0.0) h += chain.pi()(x) * rho(x) * std::log(rho(x));
    return h;
}

double fisher(const MarkovChain& chain, const Density& rho) {
    if (rho.size() != chain.size()) fail(ErrorCode::ShapeMismatch, "density length differs from state count");
    if (rho.minCoeff() <= 0.0) return kInf;
    double s = 0.0;
    for (const Edge& e : chain.edges())
        s += (rho(e.a) - rho(e.b)) * (std::log(rho(e.a)) - std::log(rho(e.b))) * e.weight;
    return s;
}

double poincare_lambda(const MarkovChain& chain) {
    if (chain.size() < 2) fail(ErrorCode::EigFail, "a single state has no spectral gap");
    return HeatSemigroup(chain).spectrum()(1);
}

double lipschitz_constant(const MarkovChain& chain, const Potential& phi) {
    double l = 0.0;
    for (const Edge& e : chain.edges()) l = std::max(l, std::abs(phi(e.a) - phi(e.b)));
    return l;
}

std::vector<Potential> lipschitz_sampler(const MarkovChain& chain, int count, std::uint64_t seed) {
    const int n = chain.size();
    if (n < 2) fail(ErrorCode::InvalidArgument, "Lipschitz sampling needs at least two states");
    const Eigen::MatrixXi d = graph_distance(chain);
    std::vector<Potential> out;
    Rng rng(derive_seed(seed, 0x11F5ULL));
    std::uniform_real_distribution<double> spread(0.5, 3.0);
    while (static_cast<int>(out.size()) < count) {
        const Potential raw = spread(rng) * sample_gaussian(n, rng);
        // Inf-convolution with the graph distance gives the largest 1-Lipschitz minorant.
        Potential phi(n);
        for (int x = 0; x < n; ++x) {
            double best = kInf;
            for (int y = 0; y < n; ++y) best = std::min(best, raw(y) + d(x, y));
            phi(x) = best;
        }
        const double l = lipschitz_constant(chain, phi);
        if (l < 1e-12) continue;
        out.push_back(phi / l);
    }
    return out;
}

std::vector<CheckResult*> InequalityReport::checks() {
    return {&poincare, &mlsi, &talagrand, &hwi, &hwi_estimate, &t1, &evi, &contraction, &metric_derivative,
            &subgaussian};
}

std::vector<Density> density_pool(const MarkovChain& chain, int count, std::uint64_t seed) {
    std::vector<Density> pool(count);
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, 0xD0000000ULL + static_cast<std::uint64_t>(i)));
        const int kind = i % 20;
        if (kind < 12) {
            pool[i] = sample_dirichlet_density(chain, rng, 1.0);
        } else if (kind < 15) {
            pool[i] = sample_dirichlet_density(chain, rng, 0.3);
        } else if (kind < 18) {
            pool[i] = sample_near_boundary_density(chain, rng, 1e-6);
        } else {
            std::uniform_real_distribution<double> mix(1e-3, 5e-2);
            const double s = mix(rng);
            pool[i] = (1.0 - s) * uniform_density(chain) + s * sample_dirichlet_density(chain, rng, 1.0);
        }
    }
    return pool;
}

namespace {

void begin(CheckResult& c, std::string name, std::string inequality, std::string direction, double slack) {
    c.name = std::move(name);
    c.inequality = std::move(inequality);
    c.bound_direction = std::move(direction);
    c.slack = slack;
    c.status = "pass";
    c.worst_margin = kInf;
}

// rows carry rhs - lhs; a row violates when its margin is below -slack_row.
void add_row(CheckResult& c, long id, double lhs, double rhs, double slack_row, bool keep) {
    const double margin = rhs - lhs;
    ++c.instances;
    if (std::isnan(margin)) {
        c.status = "error";
        return;
    }
    if (margin < c.worst_margin) {
        c.worst_margin = margin;
        c.witness = id;
    }
    if (margin < -slack_row) ++c.violations;
    if (keep) c.rows.push_back({id, lhs, rhs, margin});
}

void finish(CheckResult& c, const char* fail_status = "fail") {
    if (c.status == "error" || c.status == "skipped") return;
    if (c.instances == 0) {
        c.status = "skipped";
        return;
    }
    c.status = c.violations == 0 ? "pass" : fail_status;
}

void skip(CheckResult& c, std::string name, std::string inequality, std::string note) {
    c.name = std::move(name);
    c.inequality = std::move(inequality);
    c.status = "skipped";
    c.note = std::move(note);
}

struct Solved {
    double w = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
};

Solved solve_distance(const MarkovChain& chain, const Density& a, const Density& b, const SolverConfig& base) {
    SolverConfig cfg = base;
    cfg.throw_on_divergence = false;
    cfg.refine = false;
    const PathSolution p = solve_W(chain, a, b, cfg);
    return {p.w_est, p.converged};
}

double log_mean_exp(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
    const double m = values.maxCoeff();
    return m + std::log((weights.array() * (values.array() - m).exp()).sum());
}

}  // namespace

InequalityReport verify_ladder(const MarkovChain& chain, double kappa, const LadderConfig& cfg) {
    if (chain.size() < 2) fail(ErrorCode::InvalidArgument, "inequalities need at least two states");
    InequalityReport rep;
    rep.kappa = kappa;
    rep.lambda = cfg.lambda > 0.0 ? cfg.lambda : kappa;
    const double lambda = rep.lambda;
    const bool positive = lambda > 0.0;
    const bool keep = cfg.keep_rows;
    const HeatSemigroup semigroup(chain);
    rep.poincare_lambda = semigroup.spectrum()(1);
    rep.reverse_ov_lambda =
        positive && kappa > -lambda ? std::max(0.25 * lambda * std::pow(1.0 + kappa / lambda, 2), kappa) : 0.0;

    const std::string need_positive = "requires a positive inequality constant";
    if (positive) {
        begin(rep.poincare, "poincare", "lambda <= spectral gap of I - K", "exact spectral", 1e-9);
        add_row(rep.poincare, 0, lambda, rep.poincare_lambda, 1e-9, keep);
        finish(rep.poincare);
    } else {
        skip(rep.poincare, "poincare", "lambda <= spectral gap of I - K", need_positive);
    }

    const std::vector<Density> pool = density_pool(chain, cfg.densities, cfg.seed);
    const int np = static_cast<int>(pool.size());
    std::vector<double> hs(np), is(np), w1(np);
    const Density one = uniform_density(chain);
    const Eigen::MatrixXd dg = graph_distance(chain).cast<double>();
    parallel_for(
        np,
        [&](int i) {
            hs[i] = entropy(chain, pool[i]);
            is[i] = fisher(chain, pool[i]);
            w1[i] = wasserstein(chain, pool[i], one, dg, 1);
        },
        cfg.workers);

    // MLSI and its best sampled constant.
    rep.mlsi_lambda_est = kInf;
    for (int i = 0; i < np; ++i)
        if (hs[i] > 1e-8 && std::isfinite(is[i])) {
            const double r = is[i] / (2.0 * hs[i]);
            if (r < rep.mlsi_lambda_est) {
                rep.mlsi_lambda_est = r;
                rep.mlsi_witness = i;
            }
        }
    if (rep.mlsi_witness >= 0) rep.mlsi_witness_rho = pool[rep.mlsi_witness];
    if (positive) {
        begin(rep.mlsi, "mlsi", "H <= I / (2 lambda)", "exact: both sides evaluated directly", 1e-9);
        for (int i = 0; i < np; ++i) add_row(rep.mlsi, i, hs[i], is[i] / (2.0 * lambda), 1e-9, keep);
        finish(rep.mlsi);
        begin(rep.t1, "t1", "W_1g(rho, 1) <= sqrt(H / lambda)", "exact: W_1g from the transport LP", 1e-9);
        for (int i = 0; i < np; ++i) add_row(rep.t1, i, w1[i], std::sqrt(hs[i] / lambda), 1e-9, keep);
        finish(rep.t1);
    } else {
        skip(rep.mlsi, "mlsi", "H <= I / (2 lambda)", need_positive);
        skip(rep.t1, "t1", "W_1g(rho, 1) <= sqrt(H / lambda)", need_positive);
    }

    // Densities that also get transport solves.
    const int nt = std::min(cfg.transport_samples, np);
    std::vector<int> tidx(nt);
    for (int k = 0; k < nt; ++k) tidx[k] = static_cast<int>((static_cast<long>(k) * np) / std::max(nt, 1));
    std::vector<Solved> to_one(nt);
    parallel_for(
        nt, [&](int k) { to_one[k] = solve_distance(chain, pool[tidx[k]], one, cfg.solver); }, cfg.workers);

    const std::string west =
        "W_est from the time-discretized solver in place of W; the midpoint rule converges from below in practice";
    if (positive) {
        begin(rep.talagrand, "talagrand", "W(rho, 1) <= sqrt(2 H / lambda)", west, 1e-6);
        for (int k = 0; k < nt; ++k) {
            const int i = tidx[k];
            add_row(rep.talagrand, i, to_one[k].ok ? to_one[k].w : std::nan(""), std::sqrt(2.0 * hs[i] / lambda), 1e-6,
                    keep);
        }
        finish(rep.talagrand);
    } else {
        skip(rep.talagrand, "talagrand", "W(rho, 1) <= sqrt(2 H / lambda)", need_positive);
    }

    begin(rep.hwi, "hwi", "H <= W sqrt(I) - (kappa/2) W^2",
          "sufficient test: sqrt(2) W_1g (a lower bound on W) in the first term, W_est in the second", 1e-9);
    begin(rep.hwi_estimate, "hwi_estimate", "H <= W sqrt(I) - (kappa/2) W^2", west, 1e-6);
    for (int k = 0; k < nt; ++k) {
        const int i = tidx[k];
        const double w = to_one[k].ok ? to_one[k].w : std::nan("");
        const double root_i = std::sqrt(is[i]);
        auto rhs = [&](double first, double second) {
            if (std::isinf(root_i)) return first > 0.0 ? kInf : -0.5 * kappa * second * second;
            return first * root_i - 0.5 * kappa * second * second;
        };
        add_row(rep.hwi, i, hs[i], rhs(std::sqrt(2.0) * w1[i], w), 1e-9, keep);
        add_row(rep.hwi_estimate, i, hs[i], rhs(w, w), 1e-6, keep);
    }
    finish(rep.hwi, "inconclusive");
    if (rep.hwi.status == "inconclusive")
        rep.hwi.note = "a failing sufficient test does not refute the inequality; see hwi_estimate";
    finish(rep.hwi_estimate);

    // EVI along the heat flow towards nu, one-sided differences in t.
    {
        begin(rep.evi, "evi", "1/2 d+/dt W^2(P_t rho, nu) + (kappa/2) W^2 <= H(nu) - H(P_t rho)",
              west + "; second-order one-sided differences, largest over step sizes", 1e-4);
        const int ne = static_cast<int>(cfg.evi_times.size());
        const int tasks = nt * ne;
        std::vector<CheckRow> rows(tasks);
        std::vector<double> slacks(tasks);
        parallel_for(
            tasks,
            [&](int task) {
                const int k = task / ne;
                const double t = cfg.evi_times[task % ne];
                const Density& rho = pool[tidx[k]];
                const Density& nu = pool[tidx[(k + 1) % nt]];
                const Density rt = semigroup.apply(rho, t);
                const Solved base = solve_distance(chain, rt, nu, cfg.solver);
                double deriv = -kInf;
                bool ok = base.ok;
                // Second-order one-sided difference; a plain forward difference is biased by h f''/2.
                for (double h : cfg.evi_steps) {
                    const Solved s1 = solve_distance(chain, semigroup.apply(rho, t + h), nu, cfg.solver);
                    const Solved s2 = solve_distance(chain, semigroup.apply(rho, t + 2.0 * h), nu, cfg.solver);
                    ok = ok && s1.ok && s2.ok;
                    const double d = (-3.0 * base.w * base.w + 4.0 * s1.w * s1.w - s2.w * s2.w) / (2.0 * h);
                    deriv = std::max(deriv, d);
                }
                const double w2 = base.w * base.w;
                rows[task] = {tidx[k], ok ? 0.5 * deriv + 0.5 * kappa * w2 : std::nan(""),
                              entropy(chain, nu) - entropy(chain, rt), 0.0};
                slacks[task] = 1e-4 * (1.0 + w2);
            },
            cfg.workers);
        for (int task = 0; task < tasks; ++task)
            add_row(rep.evi, task, rows[task].lhs, rows[task].rhs, slacks[task], keep);
        finish(rep.evi);
    }

    // Contraction of the heat flow.
    {
        begin(rep.contraction, "contraction", "W(P_t rho, P_t sigma) <= exp(-kappa t) W(rho, sigma)", west, 1e-6);
        const int nc = static_cast<int>(cfg.contraction_times.size());
        std::vector<Solved> w0(nt);
        std::vector<Solved> wt(static_cast<std::size_t>(nt) * nc);
        parallel_for(
            nt * (nc + 1),
            [&](int task) {
                const int k = task / (nc + 1);
                const int j = task % (nc + 1);
                const Density& rho = pool[tidx[k]];
                const Density& sigma = pool[tidx[(k + 1) % nt]];
                if (j == 0) {
                    w0[k] = solve_distance(chain, rho, sigma, cfg.solver);
                } else {
                    const double t = cfg.contraction_times[j - 1];
                    wt[k * nc + j - 1] =
                        solve_distance(chain, semigroup.apply(rho, t), semigroup.apply(sigma, t), cfg.solver);
                }
            },
            cfg.workers);
        for (int k = 0; k < nt; ++k)
            for (int j = 0; j < nc; ++j) {
                const Solved& a = wt[k * nc + j];
                const double rhs = std::exp(-kappa * cfg.contraction_times[j]) * w0[k].w;
                add_row(rep.contraction, k * nc + j, a.ok && w0[k].ok ? a.w : std::nan(""), rhs,
                        1e-6 * (1.0 + w0[k].w), keep);
            }
        finish(rep.contraction);
    }

    // Metric speed of the heat flow.
    {
        begin(rep.metric_derivative, "metric_derivative", "W(P_{t+h} rho, P_t rho) / h <= sqrt(I(P_t rho))", west,
              1e-6);
        const int nd = static_cast<int>(cfg.derivative_times.size());
        std::vector<CheckRow> rows(nt * nd);
        const double h = cfg.derivative_step;
        parallel_for(
            nt * nd,
            [&](int task) {
                const int k = task / nd;
                const double t = cfg.derivative_times[task % nd];
                const Density a = semigroup.apply(pool[tidx[k]], t);
                const Density b = semigroup.apply(pool[tidx[k]], t + h);
                const Solved s = solve_distance(chain, b, a, cfg.solver);
                rows[task] = {tidx[k], s.ok ? s.w / h : std::nan(""), std::sqrt(fisher(chain, a)), 0.0};
            },
            cfg.workers);
        for (int task = 0; task < nt * nd; ++task)
            add_row(rep.metric_derivative, task, rows[task].lhs, rows[task].rhs, 1e-6 * (1.0 + rows[task].rhs),
                    keep);
        finish(rep.metric_derivative);
    }

    // Sub-Gaussian concentration of 1-Lipschitz functions.
    if (positive) {
        begin(rep.subgaussian, "subgaussian", "log E_pi exp(t (phi - E phi)) <= t^2 / (4 lambda)",
              "exact: finite expectation", 1e-12);
        std::vector<Potential> fns = lipschitz_sampler(chain, cfg.lipschitz_functions, cfg.seed);
        Potential dist0 = dg.row(0).transpose();  // distance to the first state (Hamming weight on the hypercube)
        fns.push_back(dist0);
        const Eigen::VectorXd& pi = chain.pi();
        long id = 0;
        for (const Potential& phi : fns) {
            const Eigen::VectorXd centred = phi.array() - pi.dot(phi);
            for (double t : cfg.subgaussian_times)
                add_row(rep.subgaussian, id++, log_mean_exp(t * centred, pi), t * t / (4.0 * lambda), 1e-12, keep);
        }
        finish(rep.subgaussian);
        rep.subgaussian.note = std::to_string(fns.size()) + " functions including the graph distance to state " +
                               chain.states()[0];
    } else {
        skip(rep.subgaussian, "subgaussian", "log E_pi exp(t (phi - E phi)) <= t^2 / (4 lambda)", need_positive);
    }

    if (positive) {
        const bool mlsi_ok = rep.mlsi.status == "pass";
        const bool tw_ok = rep.talagrand.status == "pass";
        const bool p_ok = rep.poincare.status == "pass";
        rep.ladder_consistent = (!mlsi_ok || tw_ok) && (!tw_ok || p_ok);
    }
    return rep;
}

}  // namespace ricci
