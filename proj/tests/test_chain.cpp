#include <doctest.h>

#include <cmath>
#include <functional>

#include "ricci/chain.hpp"
#include "ricci/error.hpp"

using namespace ricci;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

}  // namespace

TEST_CASE("validate_chain computes the stationary vector") {
    Eigen::MatrixXd k(2, 2);
    k << 0.5, 0.5, 0.5, 0.5;
    MarkovChain c = validate_chain(k);
    CHECK(c.pi()(0) == doctest::Approx(0.5).epsilon(1e-14));
    // p = 1/3, q = 2/3: pi = (q, p) / (p + q) = (2/3, 1/3)
    k << 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0;
    c = validate_chain(k);
    CHECK(c.pi()(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(c.pi()(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(c.states() == std::vector<std::string>{"0", "1"});
}

TEST_CASE("validate_chain rejects bad kernels") {
    Eigen::MatrixXd k(2, 2);
    k << 0.5, 0.6, 0.5, 0.5;
    CHECK(code_of([&] { validate_chain(k); }) == ErrorCode::NotStochastic);
    k << 0.0, 1.0, 0.0, 1.0;
    const ErrorCode absorbing = code_of([&] { validate_chain(k); });
    CHECK((absorbing == ErrorCode::NotIrreducible || absorbing == ErrorCode::NotReversible));
    k << 1.0, 0.0, 0.0, 1.0;
    CHECK(code_of([&] { validate_chain(k); }) == ErrorCode::NotIrreducible);
    // Irreducible but not reversible: directed 3-cycle with a bias.
    Eigen::MatrixXd r(3, 3);
    r << 0.0, 0.9, 0.1, 0.1, 0.0, 0.9, 0.9, 0.1, 0.0;
    CHECK(code_of([&] { validate_chain(r); }) == ErrorCode::NotReversible);
    Eigen::VectorXd wrong(2);
    wrong << 0.3, 0.7;
    k << 0.5, 0.5, 0.5, 0.5;
    CHECK(code_of([&] { validate_chain(k, wrong); }) == ErrorCode::NotReversible);
    Eigen::MatrixXd rect(2, 3);
    rect.setConstant(1.0 / 3.0);
    CHECK(code_of([&] { validate_chain(rect); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("builtin families") {
    const MarkovChain c3 = builtin("complete:3");
    CHECK((c3.kernel().array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
    CHECK((c3.pi().array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);

    const MarkovChain h2 = builtin("hypercube:2");
    REQUIRE(h2.size() == 4);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) {
            const int hamming = __builtin_popcount(x ^ y);
            CHECK(h2.kernel()(x, y) == doctest::Approx(hamming == 1 ? 0.5 : 0.0));
        }

    const MarkovChain tp = builtin("twopoint:1,1");
    CHECK(tp.kernel()(0, 1) == 1.0);
    CHECK(tp.kernel()(0, 0) == 0.0);
    CHECK(tp.pi()(0) == doctest::Approx(0.5));

    const MarkovChain cy = builtin("cycle:5");
    CHECK(cy.kernel()(0, 1) == 0.5);
    CHECK(cy.kernel()(0, 4) == 0.5);

    const MarkovChain t = builtin("torus:3x3");
    CHECK(t.size() == 9);
    CHECK(builtin("torus:3×4").size() == 12);

    CHECK(code_of([] { builtin("hypercube:0"); }) == ErrorCode::BadSpec);
    CHECK(code_of([] { builtin("twopoint:0,1"); }) == ErrorCode::BadSpec);
    CHECK(code_of([] { builtin("twopoint:0.5,1.5"); }) == ErrorCode::BadSpec);
    CHECK(code_of([] { builtin("moebius:3"); }) == ErrorCode::BadSpec);
    CHECK(code_of([] { builtin("cycle:x"); }) == ErrorCode::BadSpec);
}

TEST_CASE("builtin chains round trip through validation and JSON") {
    for (const char* s : {"complete:4", "cycle:6", "hypercube:3", "twopoint:0.3,0.7", "torus:2x3"}) {
        const MarkovChain c = builtin(s);
        const MarkovChain v = validate_chain(c.kernel(), c.pi(), c.states());
        CHECK((v.kernel() - c.kernel()).norm() == 0.0);
        const MarkovChain j = chain_from_json(chain_to_json(c));
        CHECK((j.kernel() - c.kernel()).norm() < 1e-15);
        CHECK((j.pi() - c.pi()).norm() < 1e-15);
        CHECK(j.states() == c.states());
        CHECK(c.reversibility_residual() < 1e-15);
    }
}

TEST_CASE("lazy chains") {
    const MarkovChain l = lazy(builtin("twopoint:1,1"), 0.5);
    CHECK((l.kernel().array() - 0.5).abs().maxCoeff() < 1e-15);
    const MarkovChain h = builtin("hypercube:3");
    const MarkovChain lh = lazy(h, 0.3);
    CHECK((lh.pi() - h.pi()).norm() < 1e-15);
    const MarkovChain lc = lazy(builtin("complete:2"), 0.5);
    CHECK((lc.kernel().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
            if (x != y) CHECK((h.kernel()(x, y) > 0) == (lh.kernel()(x, y) > 0));
    CHECK(code_of([&] { lazy(h, 0.0); }) == ErrorCode::BadLambda);
    CHECK(code_of([&] { lazy(h, 1.0); }) == ErrorCode::BadLambda);
}

TEST_CASE("product chains") {
    const MarkovChain tp = builtin("twopoint:1,1");
    const MarkovChain p = product({tp, tp}, {0.5, 0.5});
    const MarkovChain h2 = builtin("hypercube:2");
    CHECK((p.kernel() - h2.kernel()).cwiseAbs().maxCoeff() < 1e-15);

    const MarkovChain one = product({builtin("cycle:4")}, {1.0});
    CHECK((one.kernel() - builtin("cycle:4").kernel()).norm() < 1e-15);

    // Bernoulli(lambda) x Bernoulli(lambda), lambda = p / (p + q) is the weight of state 1.
    const double pp = 0.2, qq = 0.6, lam = pp / (pp + qq);
    const MarkovChain a = builtin("twopoint:0.2,0.6");
    const MarkovChain pa = product({a, a}, {0.5, 0.5});
    const double expect[4] = {(1 - lam) * (1 - lam), (1 - lam) * lam, lam * (1 - lam), lam * lam};
    for (int i = 0; i < 4; ++i) CHECK(pa.pi()(i) == doctest::Approx(expect[i]).epsilon(1e-12));
    CHECK(pa.states()[1] == "0,1");

    CHECK(code_of([&] { product({tp, tp}, {0.5, 0.6}); }) == ErrorCode::WeightSum);
    CHECK(code_of([&] { product({}, {}); }) == ErrorCode::EmptyProduct);
}

TEST_CASE("graph distance") {
    const Eigen::MatrixXi d = graph_distance(builtin("hypercube:3"));
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) CHECK(d(x, y) == __builtin_popcount(x ^ y));
    CHECK(graph_distance(builtin("cycle:5"))(0, 3) == 2);
    const Eigen::MatrixXi c = graph_distance(builtin("complete:4"));
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) CHECK(c(x, y) == (x == y ? 0 : 1));
    CHECK(graph_diameter(builtin("cycle:6")) == 3);
}

TEST_CASE("densities") {
    const MarkovChain c = builtin("twopoint:0.2,0.6");
    const Density d = dirac_density(c, 1);
    CHECK(c.pi().dot(d) == doctest::Approx(1.0));
    CHECK((parse_density(c, "dirac:1") - d).norm() == 0.0);
    CHECK((parse_density(c, "uniform").array() - 1.0).abs().maxCoeff() == 0.0);
    const Density inline_rho = parse_density(c, "[0.5, 2.5]");
    CHECK(c.pi().dot(inline_rho) == doctest::Approx(1.0));
    CHECK(code_of([&] { parse_density(c, "[1, 1, 1]"); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([&] { parse_density(c, "[2, 2]"); }) == ErrorCode::InvalidDensity);
    CHECK(code_of([&] { parse_density(c, "dirac:7"); }) != ErrorCode::Ok);
}

TEST_CASE("natural mapping representations validate") {
    for (const char* s : {"hypercube:3", "cycle:5", "twopoint:0.3,0.7", "torus:3x4"}) {
        const MarkovChain c = builtin(s);
        const auto rep = natural_representation(c);
        REQUIRE(rep.has_value());
        CHECK_NOTHROW(validate_representation(c, *rep));
    }
    const MappingRepresentation h = *natural_representation(builtin("hypercube:3"));
    CHECK(h.size() == 3);
    CHECK((h.rates.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
    const MappingRepresentation cy = *natural_representation(builtin("cycle:5"));
    CHECK(cy.size() == 2);
    CHECK((cy.rates.array() - 0.5).abs().maxCoeff() < 1e-15);
}

TEST_CASE("transposition representation and its failure modes") {
    const MarkovChain tp = builtin("twopoint:1,1");
    const MappingRepresentation t = transposition_representation(tp);
    CHECK(t.size() == 1);
    CHECK(t.rates(0, 0) == 1.0);
    CHECK(t.rates(1, 0) == 1.0);
    CHECK_NOTHROW(validate_representation(tp, t));

    const MarkovChain c = builtin("cycle:4");
    MappingRepresentation bad = *natural_representation(c);
    bad.rates(0, 0) *= 2.0;
    CHECK(code_of([&] { validate_representation(c, bad); }) == ErrorCode::GeneratorMismatch);

    MappingRepresentation noinv = *natural_representation(c);
    noinv.inverse[0] = 0;
    CHECK(code_of([&] { validate_representation(c, noinv); }) == ErrorCode::NoInverse);

    // Two swap moves, each declared its own inverse, with rates split by state: the generator
    // and inverse property hold but the summation identity does not.
    const MarkovChain tp1 = builtin("twopoint:1,1");
    MappingRepresentation split;
    split.n_states = 2;
    split.names = {"s1", "s2"};
    split.moves = {{1, 0}, {1, 0}};
    split.inverse = {0, 1};
    split.rates = Eigen::MatrixXd(2, 2);
    split.rates << 1.0, 0.0, 0.0, 1.0;
    CHECK(code_of([&] { validate_representation(tp1, split); }) == ErrorCode::ReversibilityFail);
    split.inverse = {1, 0};
    CHECK_NOTHROW(validate_representation(tp1, split));
}
