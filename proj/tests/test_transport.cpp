#include <doctest.h>

#include <cmath>
#include <random>

#include "ricci/error.hpp"
#include "ricci/means.hpp"
#include "ricci/random.hpp"
#include "ricci/transport.hpp"

using namespace ricci;

TEST_CASE("discrete calculus identities") {
    const MarkovChain c = builtin("cycle:5");
    Rng rng(7);
    const Potential phi = sample_gaussian(5, rng);
    const Potential psi = sample_gaussian(5, rng);
    // div grad = K - I
    CHECK((divergence(c, gradient(c, psi)) - laplacian(c, psi)).norm() < 1e-14);
    // Integration by parts: <grad phi, Psi>_pi = -<phi, div Psi>_pi
    Eigen::MatrixXd field = Eigen::MatrixXd::Random(5, 5);
    CHECK(pi_inner(c, gradient(c, phi), field) ==
          doctest::Approx(-pi_inner(c, phi, divergence(c, field))).epsilon(1e-13));
    // At rho = 1 the rho inner product is the pi inner product.
    const Density one = uniform_density(c);
    CHECK(rho_inner(c, one, gradient(c, phi), gradient(c, psi)) ==
          doctest::Approx(pi_inner(c, gradient(c, phi), gradient(c, psi))).epsilon(1e-14));
}

TEST_CASE("action on the symmetric two-point chain") {
    const MarkovChain c = builtin("twopoint:1,1");
    Potential psi(2);
    psi << 0.0, 1.0;
    // 1/2 sum (psi(y)-psi(x))^2 K pi = 1/2 (1/2 + 1/2)
    CHECK(action(c, uniform_density(c), psi) == doctest::Approx(0.5).epsilon(1e-15));
    Density rho(2);
    rho << 1.5, 0.5;
    CHECK(action(c, rho, psi) == doctest::Approx(0.5 * theta(1.5, 0.5)).epsilon(1e-14));
    // A'(rho, rhohat grad psi) = A(rho, psi)
    const Momentum v = rho_hat(rho).cwiseProduct(gradient(c, psi));
    CHECK(action_prime(c, rho, v) == doctest::Approx(action(c, rho, psi)).epsilon(1e-14));
    // Positive flux on an edge with zero mean is infinitely expensive.
    Density dirac(2);
    dirac << 2.0, 0.0;
    Momentum w = Momentum::Zero(2, 2);
    w(0, 1) = 1.0;
    w(1, 0) = -1.0;
    CHECK(std::isinf(action_prime(c, dirac, w)));
}

TEST_CASE("solve_W: Dirac to Dirac on two points matches c / sqrt(p)") {
    const double c = theta_constant_c();
    for (double p : {0.25, 0.5, 1.0}) {
        const MarkovChain ch = builtin("twopoint:" + std::to_string(p) + "," + std::to_string(p));
        SolverConfig cfg;
        cfg.grid = 64;
        const PathSolution s = solve_W(ch, dirac_density(ch, 0), dirac_density(ch, 1), cfg);
        CHECK(s.converged);
        CHECK(s.w_est == doctest::Approx(c / std::sqrt(p)).epsilon(0.01));
        CHECK(s.continuity_residual < 1e-9);
    }
}

TEST_CASE("solve_W: interior two-point distance matches the quadrature oracle") {
    // (1/sqrt(p)) int_{-0.5}^{0.3} dr / sqrt(2 theta(1-r, 1+r)), p = 0.5, by mpmath.
    const MarkovChain ch = builtin("twopoint:0.5,0.5");
    Density a(2), b(2);
    a << 0.5, 1.5;
    b << 1.3, 0.7;
    SolverConfig cfg;
    cfg.grid = 64;
    const PathSolution s = solve_W(ch, a, b, cfg);
    CHECK(s.converged);
    CHECK(s.w_est == doctest::Approx(0.809101064087805828).epsilon(1e-3));
}

TEST_CASE("solve_W: basic metric properties") {
    const MarkovChain ch = builtin("cycle:4");
    Rng rng(11);
    const Density a = sample_dirichlet_density(ch, rng);
    const Density b = sample_dirichlet_density(ch, rng);
    const PathSolution same = solve_W(ch, a, a);
    CHECK(same.w_est < 1e-5);
    const PathSolution ab = solve_W(ch, a, b);
    const PathSolution ba = solve_W(ch, b, a);
    CHECK(ab.converged);
    CHECK(ab.w_est == doctest::Approx(ba.w_est).epsilon(1e-6));
    // Path endpoints and mass conservation.
    CHECK((ab.densities.front() - a).norm() < 1e-12);
    CHECK((ab.densities.back() - b).norm() < 1e-12);
    for (const Density& d : ab.densities) CHECK(ch.pi().dot(d) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(static_cast<int>(ab.densities.size()) == 33);
}

TEST_CASE("solve_W: refinement reports the grid gap") {
    const MarkovChain ch = builtin("twopoint:1,1");
    SolverConfig cfg;
    cfg.grid = 32;
    cfg.refine = true;
    const PathSolution s = solve_W(ch, dirac_density(ch, 0), dirac_density(ch, 1), cfg);
    CHECK(s.refined);
    CHECK(s.refinement_gap == doctest::Approx(std::abs(s.w_est - s.w_coarse)));
    CHECK(s.refinement_gap > 0.0);
    CHECK(s.refinement_gap < 0.01);
}

TEST_CASE("solve_W: near-stationary distance matches the linearized norm") {
    // W(1 + e f, 1 - e f)^2 ~ <2 e f, (I - K)^+ 2 e f>_pi for small e.
    const MarkovChain ch = builtin("cycle:5");
    Eigen::VectorXd f(5);
    f << 1.0, -0.5, 0.25, -1.0, 0.25;
    const double e = 1e-3;
    const Density a = Eigen::VectorXd::Ones(5) + e * f;
    const Density b = Eigen::VectorXd::Ones(5) - e * f;
    const Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(5, 5) - ch.kernel();
    const Eigen::VectorXd g = lap.completeOrthogonalDecomposition().solve(2 * e * f);
    const double expect = std::sqrt(ch.pi().dot((2 * e * f).cwiseProduct(g)));
    SolverConfig cfg;
    cfg.grid = 16;
    const PathSolution s = solve_W(ch, a, b, cfg);
    CHECK(s.w_est == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("solve_W rejects bad input") {
    const MarkovChain ch = builtin("twopoint:1,1");
    Density bad(2);
    bad << 3.0, 0.0;
    CHECK_THROWS_AS(solve_W(ch, bad, uniform_density(ch)), Error);
    SolverConfig cfg;
    cfg.grid = 1;
    CHECK_THROWS_AS(solve_W(ch, uniform_density(ch), uniform_density(ch), cfg), Error);
}

TEST_CASE("recover_potential reproduces the flux on interior paths") {
    const MarkovChain ch = builtin("twopoint:1,1");
    Density a(2), b(2);
    a << 1.4, 0.6;
    b << 0.6, 1.4;
    const PathSolution s = solve_W(ch, a, b);
    const Potential psi = recover_potential(ch, s, 16);
    CHECK(ch.pi().dot(psi) == doctest::Approx(0.0).epsilon(1e-12));
    const Density mid = 0.5 * (s.densities[15] + s.densities[16]);
    const double flux = theta(mid(0), mid(1)) * (psi(1) - psi(0));
    CHECK(flux == doctest::Approx(s.momenta[15](0, 1)).epsilon(1e-8));
}

TEST_CASE("exact Wasserstein LP on graph distance") {
    const MarkovChain c4 = builtin("cycle:4");
    Density a(4), b(4);
    a << 2.0, 1.0, 1.0, 0.0;
    b << 0.0, 1.0, 1.0, 2.0;
    CHECK(wasserstein_graph(c4, a, b, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(wasserstein_graph(c4, a, b, 2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    // scipy linprog (HiGHS) oracle on cycle:5
    const MarkovChain c5 = builtin("cycle:5");
    Density r0(5), r1(5);
    r0 << 1.5, 0.5, 1.0, 1.2, 0.8;
    r1 << 0.2, 1.8, 1.0, 0.6, 1.4;
    CHECK(wasserstein_graph(c5, r0, r1, 1) == doctest::Approx(0.38).epsilon(1e-10));
    CHECK(wasserstein_graph(c5, r0, r1, 2) == doctest::Approx(0.6164414002968976).epsilon(1e-10));
    CHECK(total_variation(c5, r0, r1) == doctest::Approx(0.2 * (1.3 + 1.3 + 0.0 + 0.6 + 0.6)).epsilon(1e-14));
}

TEST_CASE("metric bounds sandwich the solver estimate") {
    const MarkovChain ch = builtin("hypercube:2");
    Rng rng(3);
    for (int i = 0; i < 3; ++i) {
        const Density a = sample_dirichlet_density(ch, rng);
        const Density b = sample_dirichlet_density(ch, rng);
        SolverConfig cfg;
        cfg.refine = true;
        cfg.grid = 64;
        const PathSolution s = solve_W(ch, a, b, cfg);
        const MetricBounds m = metric_bounds(ch, a, b);
        CHECK(m.k == 0.5);
        CHECK(m.d_tv / std::sqrt(2.0) <= m.lower + 1e-12);
        CHECK(m.lower <= s.w_est + s.refinement_gap);
        CHECK(s.w_est <= m.upper + s.refinement_gap);
    }
    CHECK(min_positive_rate(builtin("complete:3")) == doctest::Approx(1.0 / 3.0));
}
