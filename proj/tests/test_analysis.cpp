#include <doctest.h>

#include <cmath>

#include "ricci/analysis.hpp"
#include "ricci/curvature.hpp"
#include "ricci/error.hpp"
#include "ricci/random.hpp"

using namespace ricci;

TEST_CASE("spectral gaps of the builtin families") {
    for (int n = 1; n <= 4; ++n)
        CHECK(std::abs(poincare_lambda(builtin("hypercube:" + std::to_string(n))) - 2.0 / n) <= 1e-12);
    for (int n = 2; n <= 6; ++n) CHECK(std::abs(poincare_lambda(builtin("complete:" + std::to_string(n))) - 1.0) <= 1e-12);
    for (int n = 3; n <= 7; ++n)
        CHECK(poincare_lambda(builtin("cycle:" + std::to_string(n))) ==
              doctest::Approx(1.0 - std::cos(2.0 * M_PI / n)).epsilon(1e-12));
    CHECK(poincare_lambda(builtin("twopoint:0.3,0.7")) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(poincare_lambda(builtin("twopoint:0.2,0.5")) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("heat semigroup") {
    // Two points: rho_t - 1 = exp(-(p + q) t) (rho_0 - 1).
    const MarkovChain c = builtin("twopoint:0.2,0.5");
    Density rho(2);
    rho << 0.4, 2.5;
    CHECK(c.pi().dot(rho) == doctest::Approx(1.0));
    for (double t : {0.0, 0.3, 2.0}) {
        const Density r = heat(c, rho, t);
        const Eigen::VectorXd expect = Eigen::VectorXd::Ones(2) + std::exp(-0.7 * t) * (rho - Eigen::VectorXd::Ones(2));
        CHECK((r - expect).lpNorm<Eigen::Infinity>() < 1e-13);
    }
    const MarkovChain h = builtin("hypercube:3");
    Rng rng(1);
    const Density d = sample_dirichlet_density(h, rng);
    const HeatSemigroup sg(h);
    CHECK(h.pi().dot(sg.apply(d, 1.3)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK((sg.apply(sg.apply(d, 0.4), 0.6) - sg.apply(d, 1.0)).norm() < 1e-13);
    CHECK((sg.apply(d, 60.0).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("entropy and Fisher information") {
    const MarkovChain c = builtin("twopoint:1,1");
    CHECK(entropy(c, uniform_density(c)) == 0.0);
    CHECK(entropy(c, dirac_density(c, 0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    Density rho(2);
    rho << 1.5, 0.5;
    // 1/2 sum (rho(x)-rho(y))(log rho(x) - log rho(y)) K pi = 1/2 log 3
    CHECK(fisher(c, rho) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-15));
    CHECK(std::isinf(fisher(c, dirac_density(c, 0))));
    CHECK(fisher(c, uniform_density(c)) == 0.0);
}

TEST_CASE("Lipschitz sampler") {
    const MarkovChain c = builtin("hypercube:3");
    const std::vector<Potential> fs = lipschitz_sampler(c, 20, 5);
    REQUIRE(fs.size() == 20);
    for (const Potential& f : fs) CHECK(lipschitz_constant(c, f) == doctest::Approx(1.0).epsilon(1e-14));
    const std::vector<Potential> again = lipschitz_sampler(c, 20, 5);
    CHECK((again[7] - fs[7]).norm() == 0.0);
}

TEST_CASE("density pool composition") {
    const MarkovChain c = builtin("cycle:4");
    const std::vector<Density> pool = density_pool(c, 40, 42);
    REQUIRE(pool.size() == 40);
    int boundary = 0;
    for (const Density& d : pool) {
        CHECK(c.pi().dot(d) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.minCoeff() > 0.0);
        if (d.minCoeff() < 1e-5) ++boundary;
    }
    CHECK(boundary >= 6);
}

TEST_CASE("verify_ladder on the symmetric two-point chain") {
    LadderConfig cfg;
    cfg.densities = 200;
    cfg.transport_samples = 6;
    cfg.lipschitz_functions = 20;
    InequalityReport r = verify_ladder(builtin("twopoint:1,1"), 2.0, cfg);
    CHECK(r.poincare_lambda == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.mlsi_lambda_est >= 2.0 - 1e-3);
    for (const CheckResult* c : r.checks()) {
        CAPTURE(c->name);
        CHECK(c->status != "fail");
        CHECK(c->status != "error");
    }
    CHECK(r.talagrand.status == "pass");
    CHECK(r.mlsi.status == "pass");
    CHECK(r.ladder_consistent);
}

TEST_CASE("verify_ladder catches an overstated constant") {
    LadderConfig cfg;
    cfg.densities = 200;
    cfg.transport_samples = 4;
    cfg.lipschitz_functions = 10;
    // The true MLSI constant of hypercube:2 is 1; claiming 3 must fail the Poincare and MLSI checks.
    const InequalityReport r = verify_ladder(builtin("hypercube:2"), 3.0, cfg);
    CHECK(r.poincare.status == "fail");
    CHECK(r.mlsi.status == "fail");
    CHECK(r.mlsi.violations > 0);
}

TEST_CASE("verify_ladder skips checks that need a positive constant") {
    LadderConfig cfg;
    cfg.densities = 100;
    cfg.transport_samples = 4;
    cfg.lipschitz_functions = 10;
    const InequalityReport r = verify_ladder(builtin("cycle:4"), 0.0, cfg);
    CHECK(r.mlsi.status == "skipped");
    CHECK(r.talagrand.status == "skipped");
    CHECK(r.contraction.status == "pass");
}
