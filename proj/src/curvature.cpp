#include "ricci/curvature.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ricci/error.hpp"
#include "ricci/means.hpp"
#include "ricci/parallel.hpp"
#include "ricci/random.hpp"

namespace ricci {

namespace {

void require_interior(const MarkovChain& chain, const Density& rho) {
    if (rho.size() != chain.size()) fail(ErrorCode::ShapeMismatch, "density length differs from state count");
    for (int i = 0; i < rho.size(); ++i)
        if (!(rho(i) > 0.0)) fail(ErrorCode::BoundaryDensity, "B is only defined for strictly positive densities");
}

void require_potential(const MarkovChain& chain, const Potential& psi) {
    if (psi.size() != chain.size()) fail(ErrorCode::ShapeMismatch, "potential length differs from state count");
}

Eigen::MatrixXd generator(const MarkovChain& chain) {
    return chain.kernel() - Eigen::MatrixXd::Identity(chain.size(), chain.size());
}

}  // namespace

double curvature_B(const MarkovChain& chain, const Density& rho, const Potential& psi) {
    require_interior(chain, rho);
    require_potential(chain, psi);
    const int n = chain.size();
    const Eigen::MatrixXd& k = chain.kernel();
    const Eigen::VectorXd& pi = chain.pi();
    const Eigen::VectorXd lrho = k * rho - rho;
    const Eigen::VectorXd lpsi = k * psi - psi;
    double t2 = 0.0;
    double t1 = 0.0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (x == y || k(x, y) == 0.0) continue;
            const MeanJet j = log_mean_jet(rho(x), rho(y));
            const double d = psi(x) - psi(y);
            t2 += 0.25 * d * d * (j.d1 * lrho(x) + j.d2 * lrho(y)) * k(x, y) * pi(x);
            t1 -= 0.5 * (lpsi(x) - lpsi(y)) * d * j.value * k(x, y) * pi(x);
        }
    return t2 + t1;
}

double action_mapping(const MarkovChain& chain, const MappingRepresentation& rep, const Density& rho,
                      const Potential& psi) {
    require_potential(chain, psi);
    double s = 0.0;
    for (int x = 0; x < chain.size(); ++x)
        for (int d = 0; d < rep.size(); ++d) {
            const int dx = rep.moves[d][x];
            const double g = psi(dx) - psi(x);
            s += 0.5 * g * g * theta(rho(x), rho(dx)) * rep.rates(x, d) * chain.pi()(x);
        }
    return s;
}

double curvature_B_mapping(const MarkovChain& chain, const MappingRepresentation& rep, const Density& rho,
                           const Potential& psi) {
    require_interior(chain, rho);
    require_potential(chain, psi);
    const int n = chain.size();
    const int m = rep.size();
    const Eigen::MatrixXd& c = rep.rates;
    auto grad = [&](const Eigen::VectorXd& f, int x, int d) { return f(rep.moves[d][x]) - f(x); };
    double t2 = 0.0;
    double t1 = 0.0;
    for (int x = 0; x < n; ++x)
        for (int d = 0; d < m; ++d) {
            const double cxd = c(x, d);
            if (cxd == 0.0) continue;
            const int dx = rep.moves[d][x];
            const double gd = grad(psi, x, d);
            if (gd == 0.0) continue;
            const MeanJet j = log_mean_jet(rho(x), rho(dx));
            for (int e = 0; e < m; ++e) {
                t2 += 0.25 * gd * gd *
                      (j.d1 * grad(rho, x, e) * c(x, e) + j.d2 * grad(rho, dx, e) * c(dx, e)) * cxd *
                      chain.pi()(x);
                t1 += 0.5 * gd * (grad(psi, dx, e) * c(dx, e) - grad(psi, x, e) * c(x, e)) * j.value * cxd *
                      chain.pi()(x);
            }
        }
    return t2 - t1;
}

ActionPair action_and_B(const MarkovChain& chain, const Density& rho, const Potential& psi) {
    require_interior(chain, rho);
    require_potential(chain, psi);
    const Eigen::VectorXd lrho = chain.kernel() * rho - rho;
    const Eigen::VectorXd lpsi = chain.kernel() * psi - psi;
    ActionPair out;
    for (const Edge& e : chain.edges()) {
        const MeanJet j = log_mean_jet(rho(e.a), rho(e.b));
        const double g = psi(e.b) - psi(e.a);
        const double h = lpsi(e.b) - lpsi(e.a);
        out.a += g * g * j.value * e.weight;
        out.b += 0.5 * g * g * e.weight * (j.d1 * lrho(e.a) + j.d2 * lrho(e.b)) - h * g * j.value * e.weight;
    }
    return out;
}

ActionGradients action_gradients(const MarkovChain& chain, const Density& rho, const Potential& psi) {
    require_interior(chain, rho);
    require_potential(chain, psi);
    const int n = chain.size();
    const Eigen::MatrixXd l = generator(chain);
    const Eigen::VectorXd lrho = l * rho;
    const Eigen::VectorXd lpsi = l * psi;
    ActionGradients out;
    out.da_drho = Eigen::VectorXd::Zero(n);
    out.db_drho = Eigen::VectorXd::Zero(n);
    out.da_dpsi = Eigen::VectorXd::Zero(n);
    out.db_dpsi = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd lt_acc = Eigen::VectorXd::Zero(n);  // accumulates sum_e theta w g delta_e, later mapped by L'
    for (const Edge& e : chain.edges()) {
        const MeanJet j = log_mean_jet(rho(e.a), rho(e.b));
        const double w = e.weight;
        const double g = psi(e.b) - psi(e.a);
        const double h = lpsi(e.b) - lpsi(e.a);
        const double s = 0.5 * w * (j.d1 * lrho(e.a) + j.d2 * lrho(e.b));
        out.a += g * g * j.value * w;
        out.b += g * g * s - h * g * j.value * w;

        out.da_drho(e.a) += g * g * j.d1 * w;
        out.da_drho(e.b) += g * g * j.d2 * w;
        out.da_dpsi(e.b) += 2.0 * g * j.value * w;
        out.da_dpsi(e.a) -= 2.0 * g * j.value * w;

        // T2 part
        const double half = 0.5 * g * g * w;
        out.db_drho += half * j.d1 * l.row(e.a).transpose() + half * j.d2 * l.row(e.b).transpose();
        out.db_drho(e.a) += half * (j.d11 * lrho(e.a) + j.d12 * lrho(e.b));
        out.db_drho(e.b) += half * (j.d12 * lrho(e.a) + j.d22 * lrho(e.b));
        out.db_dpsi(e.b) += 2.0 * g * s;
        out.db_dpsi(e.a) -= 2.0 * g * s;
        // T1 part
        out.db_drho(e.a) -= h * g * j.d1 * w;
        out.db_drho(e.b) -= h * g * j.d2 * w;
        out.db_dpsi(e.b) -= j.value * w * h;
        out.db_dpsi(e.a) += j.value * w * h;
        lt_acc(e.b) += j.value * w * g;
        lt_acc(e.a) -= j.value * w * g;
    }
    out.db_dpsi -= l.transpose() * lt_acc;
    return out;
}

QuadraticForms quadratic_forms(const MarkovChain& chain, const Density& rho) {
    require_interior(chain, rho);
    const int n = chain.size();
    const Eigen::MatrixXd l = generator(chain);
    const Eigen::VectorXd lrho = l * rho;
    QuadraticForms q;
    q.ma = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : chain.edges()) {
        const MeanJet j = log_mean_jet(rho(e.a), rho(e.b));
        const double ca = j.value * e.weight;
        const double cb = 0.5 * e.weight * (j.d1 * lrho(e.a) + j.d2 * lrho(e.b));
        q.ma(e.a, e.a) += ca;
        q.ma(e.b, e.b) += ca;
        q.ma(e.a, e.b) -= ca;
        q.ma(e.b, e.a) -= ca;
        t2(e.a, e.a) += cb;
        t2(e.b, e.b) += cb;
        t2(e.a, e.b) -= cb;
        t2(e.b, e.a) -= cb;
    }
    const Eigen::MatrixXd mal = q.ma * l;
    q.mb = t2 - 0.5 * (mal + mal.transpose());
    return q;
}

namespace {

// Orthonormal basis of the complement of the constant vector.
Eigen::MatrixXd constant_complement(int n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
    const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    return full.rightCols(n - 1);
}

}  // namespace

RhoCurvature curvature_at(const MarkovChain& chain, const Density& rho) {
    const int n = chain.size();
    if (n < 2) fail(ErrorCode::InvalidArgument, "curvature needs at least two states");
    const QuadraticForms q = quadratic_forms(chain, rho);
    const Eigen::MatrixXd basis = constant_complement(n);
    const Eigen::MatrixXd ar = basis.transpose() * q.ma * basis;
    const Eigen::MatrixXd br = basis.transpose() * q.mb * basis;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (br + br.transpose()),
                                                                      0.5 * (ar + ar.transpose()));
    if (solver.info() != Eigen::Success) fail(ErrorCode::EigFail, "generalized eigenproblem failed");
    RhoCurvature out;
    out.kappa = solver.eigenvalues()(0);
    out.psi = basis * solver.eigenvectors().col(0);
    out.psi.array() -= chain.pi().dot(out.psi);
    const double a = out.psi.dot(q.ma * out.psi);
    if (a > 0.0) out.psi /= std::sqrt(a);
    return out;
}

CriterionResult criterion_bound(const MappingRepresentation& rep) {
    const int n = rep.n_states;
    const int m = rep.size();
    CriterionResult r;
    r.commute = true;
    r.rate_invariant = true;
    r.involutive = true;
    for (int d = 0; d < m && r.commute; ++d)
        for (int e = 0; e < m && r.commute; ++e)
            for (int x = 0; x < n; ++x)
                if (rep.moves[d][rep.moves[e][x]] != rep.moves[e][rep.moves[d][x]]) {
                    r.commute = false;
                    break;
                }
    for (int d = 0; d < m && r.rate_invariant; ++d)
        for (int e = 0; e < m && r.rate_invariant; ++e)
            for (int x = 0; x < n; ++x)
                if (std::abs(rep.rates(rep.moves[d][x], e) - rep.rates(x, e)) > 1e-12) {
                    r.rate_invariant = false;
                    break;
                }
    for (int d = 0; d < m && r.involutive; ++d)
        for (int x = 0; x < n; ++x)
            if (rep.moves[d][rep.moves[d][x]] != x) {
                r.involutive = false;
                break;
            }
    double cmin = std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x)
        for (int d = 0; d < m; ++d)
            if (rep.rates(x, d) > 0.0) cmin = std::min(cmin, rep.rates(x, d));
    r.min_rate = std::isfinite(cmin) ? cmin : 0.0;
    if (r.commute && r.rate_invariant) r.bound = r.involutive ? 2.0 * r.min_rate : 0.0;
    return r;
}

double two_point_relaxation(double p, double q) { return 0.5 * (p + q) + std::sqrt(p * q); }

double two_point_kappa(double p, double q) {
    if (!(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0)) fail(ErrorCode::BadRate, "rates must lie in (0,1]");
    auto f = [p, q](double beta) { return theta(q * (1.0 + beta), p * (1.0 - beta)) / (1.0 - beta * beta); };
    // The objective blows up at both ends; a coarse scan brackets the minimum for Brent.
    constexpr int kScan = 4000;
    double best_beta = 0.0;
    double best = f(0.0);
    for (int i = 1; i < kScan; ++i) {
        const double beta = -1.0 + 2.0 * i / kScan;
        const double v = f(beta);
        if (v < best) {
            best = v;
            best_beta = beta;
        }
    }
    const double lo = std::max(-1.0 + 1e-15, best_beta - 2.0 / kScan);
    const double hi = std::min(1.0 - 1e-15, best_beta + 2.0 / kScan);
    const auto res = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits);
    return 0.5 * (p + q) + std::min(best, res.second);
}

double combine_bounds(const std::vector<BoundPart>& parts) {
    if (parts.empty()) fail(ErrorCode::EmptyProduct, "no factors");
    double total = 0.0;
    double k = std::numeric_limits<double>::infinity();
    for (const BoundPart& p : parts) {
        if (!(p.alpha >= 0.0)) fail(ErrorCode::WeightSum, "weights must be nonnegative");
        total += p.alpha;
        k = std::min(k, p.alpha * p.kappa);
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::WeightSum, "weights sum to " + std::to_string(total));
    return k;
}

double lazy_bound(double kappa, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) fail(ErrorCode::BadLambda, "lambda must lie in (0,1)");
    return lambda * kappa;
}

std::optional<CertifiedKappa> certified_kappa(const MarkovChain& chain) {
    const Construction& how = chain.construction();
    switch (how.kind) {
        case Construction::Kind::Hypercube:
        case Construction::Kind::Cycle: {
            const auto rep = natural_representation(chain);
            const CriterionResult r = criterion_bound(*rep);
            if (!r.bound) return std::nullopt;
            return CertifiedKappa{*r.bound, "criterion",
                                  how.kind == Construction::Kind::Hypercube ? "bit-flip moves" : "moves +1 and -1"};
        }
        case Construction::Kind::TwoPoint:
            return CertifiedKappa{two_point_kappa(how.params[0], how.params[1]), "two-point",
                                  "exact minimization over beta"};
        case Construction::Kind::Complete: {
            const double n = how.params[0];
            if (n < 2) return std::nullopt;
            return CertifiedKappa{0.5 + 0.5 / n, "closed-form", "complete graph 1/2 + 1/(2n)"};
        }
        case Construction::Kind::Lazy: {
            const auto base = certified_kappa(*how.parts[0]);
            if (!base) return std::nullopt;
            return CertifiedKappa{lazy_bound(base->value, how.params[0]), "laziness",
                                  "lambda times " + base->provenance + " bound"};
        }
        case Construction::Kind::Torus:
        case Construction::Kind::Product: {
            std::vector<BoundPart> parts;
            const std::size_t d = how.parts.size();
            for (std::size_t i = 0; i < d; ++i) {
                const auto k = certified_kappa(*how.parts[i]);
                if (!k) return std::nullopt;
                const double alpha = how.kind == Construction::Kind::Product ? how.params[i] : 1.0 / d;
                parts.push_back({k->value, alpha});
            }
            return CertifiedKappa{combine_bounds(parts), "tensorisation", "min over factors of alpha_i kappa_i"};
        }
        case Construction::Kind::Custom: {
            if (chain.size() < 2) return std::nullopt;
            const CriterionResult r = criterion_bound(transposition_representation(chain));
            if (!r.bound) return std::nullopt;
            return CertifiedKappa{*r.bound, "criterion", "transposition moves"};
        }
    }
    return std::nullopt;
}

SampleCheck sample_curvature(const MarkovChain& chain, double kappa, long samples, std::uint64_t seed,
                             double threshold, int workers) {
    constexpr long kBlock = 1000;
    const int blocks = static_cast<int>((samples + kBlock - 1) / kBlock);
    struct Partial {
        double margin = std::numeric_limits<double>::infinity();
        double ratio = std::numeric_limits<double>::infinity();
        long witness = -1;
        long violations = 0;
    };
    std::vector<Partial> parts(blocks);
    parallel_for(
        blocks,
        [&](int blk) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(blk)));
            Partial& p = parts[blk];
            const long begin = blk * kBlock;
            const long end = std::min(samples, begin + kBlock);
            for (long i = begin; i < end; ++i) {
                const Density rho = sample_dirichlet_density(chain, rng);
                const Potential psi = sample_gaussian(chain.size(), rng);
                if (!(rho.minCoeff() > 0.0)) continue;
                const ActionPair ab = action_and_B(chain, rho, psi);
                const double margin = ab.b - kappa * ab.a;
                if (margin < p.margin) {
                    p.margin = margin;
                    p.witness = i;
                }
                if (ab.a > 0.0) p.ratio = std::min(p.ratio, ab.b / ab.a);
                if (margin < -threshold) ++p.violations;
            }
        },
        workers);
    SampleCheck out;
    out.samples = samples;
    out.kappa = kappa;
    out.threshold = threshold;
    out.min_margin = std::numeric_limits<double>::infinity();
    out.min_ratio = std::numeric_limits<double>::infinity();
    for (const Partial& p : parts) {
        if (p.margin < out.min_margin) {
            out.min_margin = p.margin;
            out.witness = p.witness;
        }
        out.min_ratio = std::min(out.min_ratio, p.ratio);
        out.violations += p.violations;
    }
    if (out.witness >= 0) {
        // Regenerate the witness from its block stream.
        const long blk = out.witness / kBlock;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(blk)));
        for (long i = blk * kBlock; i <= out.witness; ++i) {
            out.witness_rho = sample_dirichlet_density(chain, rng);
            out.witness_psi = sample_gaussian(chain.size(), rng);
        }
    }
    return out;
}

namespace {

// Euclidean projection onto {x : pi'x = 1, x >= floor}.
Density project(const Eigen::VectorXd& y, const Eigen::VectorXd& pi, double floor) {
    auto mass = [&](double tau) { return (pi.array() * (y.array() - tau * pi.array()).max(floor)).sum(); };
    double lo = -1.0, hi = 1.0;
    while (mass(lo) < 1.0) lo *= 2.0;
    while (mass(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) > 1.0) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-17 * std::max(1.0, std::abs(mid))) break;
    }
    Density x = (y.array() - 0.5 * (lo + hi) * pi.array()).max(floor);
    // Remove the bisection residue on the free coordinates.
    const double err = pi.dot(x) - 1.0;
    double free_mass = 0.0;
    for (int i = 0; i < x.size(); ++i)
        if (x(i) > floor) free_mass += pi(i) * pi(i);
    if (free_mass > 0.0)
        for (int i = 0; i < x.size(); ++i)
            if (x(i) > floor) x(i) -= err * pi(i) / free_mass;
    return x;
}

struct RestartResult {
    double kappa = std::numeric_limits<double>::infinity();
    Density rho;
    Potential psi;
    bool converged = false;
};

Eigen::VectorXd kappa_gradient(const MarkovChain& chain, const Density& rho, const RhoCurvature& rc) {
    const ActionGradients g = action_gradients(chain, rho, rc.psi);
    return g.db_drho - rc.kappa * g.da_drho;
}

RestartResult run_restart(const MarkovChain& chain, Density rho, const CurvatureConfig& cfg) {
    const Eigen::VectorXd& pi = chain.pi();
    rho = project(rho, pi, cfg.floor);
    RhoCurvature cur = curvature_at(chain, rho);
    Eigen::VectorXd grad = kappa_gradient(chain, rho, cur);
    double step = 1.0 / std::max(1.0, grad.norm());
    RestartResult out;
    int stall = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        bool accepted = false;
        Density next;
        RhoCurvature next_cur;
        for (int ls = 0; ls < 50; ++ls) {
            next = project(rho - step * grad, pi, cfg.floor);
            next_cur = curvature_at(chain, next);
            const double decrease = grad.dot(rho - next);
            if (next_cur.kappa <= cur.kappa - 1e-4 * decrease) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.converged = true;
            break;
        }
        const Eigen::VectorXd next_grad = kappa_gradient(chain, next, next_cur);
        const Eigen::VectorXd s = next - rho;
        const Eigen::VectorXd yv = next_grad - grad;
        const double improvement = cur.kappa - next_cur.kappa;
        rho = next;
        cur = next_cur;
        grad = next_grad;
        const double sy = s.dot(yv);
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e6) : std::min(step * 4.0, 1e6);
        if (s.norm() <= 1e-12 * (1.0 + rho.norm()) || improvement <= cfg.tol * (1.0 + std::abs(cur.kappa))) {
            if (++stall >= 5) {
                out.converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    out.kappa = cur.kappa;
    out.rho = rho;
    out.psi = cur.psi;
    return out;
}

}  // namespace

CurvatureReport ricci_estimate(const MarkovChain& chain, const CurvatureConfig& cfg) {
    if (chain.size() < 2) fail(ErrorCode::InvalidArgument, "curvature needs at least two states");
    if (cfg.restarts < 1) fail(ErrorCode::InvalidArgument, "at least one restart is required");
    CurvatureReport rep;
    rep.certified = certified_kappa(chain);
    const auto natural = natural_representation(chain);
    rep.criterion = criterion_bound(natural ? *natural : transposition_representation(chain));

    std::vector<RestartResult> results(cfg.restarts);
    parallel_for(
        cfg.restarts,
        [&](int r) {
            Density start;
            if (r == 0) {
                start = uniform_density(chain);
            } else {
                Rng rng(derive_seed(cfg.seed ^ 0x5EEDC0FFEEULL, static_cast<std::uint64_t>(r)));
                start = sample_dirichlet_density(chain, rng);
            }
            results[r] = run_restart(chain, start, cfg);
        },
        cfg.workers);

    int best = -1;
    double worst = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        if (results[r].converged) ++rep.restarts_converged;
        if (!std::isfinite(results[r].kappa)) continue;
        worst = std::max(worst, results[r].kappa);
        if (best < 0 || results[r].kappa < results[best].kappa) best = r;
    }
    if (best < 0 || rep.restarts_converged == 0) fail(ErrorCode::OptFail, "no restart converged");
    rep.restarts = cfg.restarts;
    rep.kappa_estimated = results[best].kappa;
    rep.argmin_rho = results[best].rho;
    rep.argmin_psi = results[best].psi;
    rep.spread = worst - rep.kappa_estimated;
    rep.min_rho = rep.argmin_rho.minCoeff();
    rep.at_floor = rep.min_rho <= cfg.floor * (1.0 + 1e-6);

    if (cfg.samples > 0) {
        rep.sampling = sample_curvature(chain, rep.kappa_estimated, cfg.samples, cfg.seed, 1e-8, cfg.workers);
        if (rep.certified)
            rep.certified_sampling = sample_curvature(chain, rep.certified->value, cfg.samples, cfg.seed, 1e-8, cfg.workers);
    }
    return rep;
}

}  // namespace ricci
