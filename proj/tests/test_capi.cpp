// Exercises the shared library through its C header only.
#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "entropic_ricci.h"

namespace {

struct Chain {
    er_chain* p = nullptr;
    ~Chain() { er_chain_free(p); }
};

std::string take(char* s) {
    std::string out = s ? s : "";
    er_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("status names and error messages") {
    CHECK(std::string(er_status_name(ER_OK)) == "Ok");
    CHECK(std::string(er_status_name(ER_NOT_STOCHASTIC)) == "NotStochastic");
    CHECK(std::string(er_status_name(ER_SOLVER_DIVERGED)) == "SolverDiverged");
    CHECK(std::string(er_status_name(static_cast<er_status>(999))) == "Unknown");

    Chain c;
    CHECK(er_chain_from_builtin("hypercube:0", &c.p) == ER_BAD_SPEC);
    CHECK(c.p == nullptr);
    CHECK(std::string(er_last_error_message()).rfind("BadSpec", 0) == 0);
    CHECK(er_chain_from_builtin("hypercube:2", &c.p) == ER_OK);
    CHECK(std::string(er_last_error_message()).empty());
    CHECK(er_chain_from_builtin(nullptr, &c.p) == ER_INVALID_ARGUMENT);
}

TEST_CASE("chains from kernels and JSON") {
    const double bad[4] = {0.5, 0.6, 0.5, 0.5};
    Chain c;
    CHECK(er_chain_from_kernel(2, bad, nullptr, &c.p) == ER_NOT_STOCHASTIC);
    const double good[4] = {2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0};
    REQUIRE(er_chain_from_kernel(2, good, nullptr, &c.p) == ER_OK);
    CHECK(er_chain_size(c.p) == 2);
    double pi[2];
    REQUIRE(er_chain_pi(c.p, pi, 2) == ER_OK);
    CHECK(pi[0] == doctest::Approx(2.0 / 3.0));
    CHECK(er_chain_pi(c.p, pi, 3) == ER_SHAPE_MISMATCH);

    Chain j;
    CHECK(er_chain_from_json(R"({"states":["a","b"],"kernel":[[0,1],[1,0]]})", &j.p) == ER_OK);
    char* s = nullptr;
    REQUIRE(er_chain_summary_json(j.p, &s) == ER_OK);
    const nlohmann::json summary = nlohmann::json::parse(take(s));
    CHECK(summary["chain"]["states"][1] == "b");
    CHECK(summary["chain"]["graph_diameter"]["value"] == 1.0);
    Chain broken;
    CHECK(er_chain_from_json("{not json", &broken.p) != ER_OK);
}

TEST_CASE("lazy and product constructors") {
    Chain tp, l, p;
    REQUIRE(er_chain_from_builtin("twopoint:1,1", &tp.p) == ER_OK);
    CHECK(er_chain_lazy(tp.p, 1.5, &l.p) == ER_BAD_LAMBDA);
    REQUIRE(er_chain_lazy(tp.p, 0.5, &l.p) == ER_OK);
    const er_chain* parts[2] = {tp.p, tp.p};
    const double bad_alpha[2] = {0.5, 0.6};
    CHECK(er_chain_product(parts, bad_alpha, 2, &p.p) == ER_WEIGHT_SUM);
    CHECK(er_chain_product(parts, bad_alpha, 0, &p.p) == ER_EMPTY_PRODUCT);
    const double alpha[2] = {0.5, 0.5};
    REQUIRE(er_chain_product(parts, alpha, 2, &p.p) == ER_OK);
    CHECK(er_chain_size(p.p) == 4);
    double gap = 0.0;
    REQUIRE(er_poincare_lambda(p.p, &gap) == ER_OK);
    CHECK(gap == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("numerics through the C API") {
    double c = 0.0;
    REQUIRE(er_theta_constant(&c) == ER_OK);
    CHECK(c == doctest::Approx(1.558707451453659).epsilon(1e-12));
    double m = 0.0;
    REQUIRE(er_log_mean(2.0, 1.0, &m) == ER_OK);
    CHECK(m == doctest::Approx(1.0 / std::log(2.0)));
    CHECK(er_log_mean(-1.0, 1.0, &m) == ER_NEGATIVE_INPUT);

    Chain tp;
    REQUIRE(er_chain_from_builtin("twopoint:1,1", &tp.p) == ER_OK);
    double a[2], b[2];
    REQUIRE(er_parse_density(tp.p, "dirac:0", a, 2) == ER_OK);
    REQUIRE(er_parse_density(tp.p, "dirac:1", b, 2) == ER_OK);
    CHECK(a[0] == 2.0);
    CHECK(er_parse_density(tp.p, "[3, 3]", a, 2) == ER_INVALID_DENSITY);
    er_parse_density(tp.p, "dirac:0", a, 2);
    double w = 0.0;
    int conv = 0;
    REQUIRE(er_solve_w(tp.p, a, b, 64, 0.0, &w, &conv) == ER_OK);
    CHECK(conv == 1);
    CHECK(w == doctest::Approx(c).epsilon(0.01));
}

TEST_CASE("JSON reports through the C API") {
    Chain h;
    REQUIRE(er_chain_from_builtin("hypercube:3", &h.p) == ER_OK);
    char* s = nullptr;
    REQUIRE(er_curvature_json(h.p, R"({"samples": 1000})", &s) == ER_OK);
    const nlohmann::json cj = nlohmann::json::parse(take(s));
    CHECK(cj["certified"]["kappa"]["value"].get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(er_curvature_json(h.p, R"({"bogus": 1})", &s) == ER_INVALID_ARGUMENT);

    Chain tp;
    REQUIRE(er_chain_from_builtin("twopoint:1,1", &tp.p) == ER_OK);
    s = nullptr;
    const er_status st = er_distance_json(tp.p, "dirac:0", "dirac:1", R"({"tol": 1e-30, "max_iterations": 30})", &s);
    CHECK(st == ER_SOLVER_DIVERGED);
    REQUIRE(s != nullptr);
    const nlohmann::json dj = nlohmann::json::parse(take(s));
    CHECK(dj["solver"]["converged"] == false);

    s = nullptr;
    REQUIRE(er_geodesic_json(tp.p, "[1.2, 0.8]", "[0.8, 1.2]", R"({"shoot": true})", &s) == ER_OK);
    const std::string gj = take(s);
    CHECK(nlohmann::json::parse(gj)["shooting"]["status"] == "converged");
    char* csv = nullptr;
    REQUIRE(er_report_csv("geodesic", gj.c_str(), &csv) == ER_OK);
    CHECK(take(csv).rfind("time,state,density,potential", 0) == 0);

    s = nullptr;
    REQUIRE(er_inequalities_json(tp.p, R"({"densities": 100, "transport_samples": 3, "lipschitz_functions": 10})", &s) ==
            ER_OK);
    const nlohmann::json ij = nlohmann::json::parse(take(s));
    CHECK(ij["kappa"]["provenance"] == "certified");
    CHECK(er_report_json(tp.p, "dirac:0", nullptr, nullptr, &s) == ER_INVALID_ARGUMENT);
}
