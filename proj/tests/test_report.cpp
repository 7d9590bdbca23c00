#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "ricci/error.hpp"
#include "ricci/report_json.hpp"

using namespace ricci;

namespace {

const std::set<std::string> kTags = {"certified", "estimated", "sampled", "exact-spectral", "exact"};

// Every number must sit under an object that declares a known provenance.
void check_provenance(const Json& j, bool covered, const std::string& path, int& bad) {
    if (j.is_object()) {
        bool here = covered;
        if (j.contains("provenance")) {
            if (!kTags.count(j["provenance"].get<std::string>())) ++bad;
            here = true;
        }
        for (auto it = j.begin(); it != j.end(); ++it) check_provenance(it.value(), here, path + "." + it.key(), bad);
    } else if (j.is_array()) {
        for (const Json& e : j) check_provenance(e, covered, path + "[]", bad);
    } else if (j.is_number() && !covered) {
        MESSAGE("untagged number at " << path);
        ++bad;
    }
}

ReportConfig small() {
    ReportConfig cfg;
    cfg.curvature.restarts = 4;
    cfg.curvature.samples = 2000;
    cfg.ladder.densities = 100;
    cfg.ladder.transport_samples = 3;
    cfg.ladder.lipschitz_functions = 10;
    cfg.estimate_curvature = true;
    return cfg;
}

}  // namespace

TEST_CASE("tagged values") {
    const Json t = tagged(1.5, provenance::certified);
    CHECK(t["value"] == 1.5);
    CHECK(t["provenance"] == "certified");
    CHECK(tagged(std::numeric_limits<double>::infinity(), provenance::exact)["value"].is_null());
}

TEST_CASE("every number in every report carries provenance") {
    const MarkovChain c = builtin("hypercube:2");
    const ReportConfig cfg = small();
    int bad = 0;
    check_provenance(chain_summary(c), false, "chain", bad);
    const Density a = dirac_density(c, 0), b = uniform_density(c);
    check_provenance(distance_report(c, a, b, cfg).json, false, "distance", bad);
    ReportConfig shoot = cfg;
    shoot.shoot = true;
    Density x(4), y(4);
    x << 1.3, 0.9, 0.8, 1.0;
    y << 0.8, 1.1, 1.2, 0.9;
    check_provenance(geodesic_report(c, x, y, shoot).json, false, "geodesic", bad);
    check_provenance(curvature_report(c, cfg).json, false, "curvature", bad);
    check_provenance(full_report(c, a, b, cfg).json, false, "report", bad);
    CHECK(bad == 0);
}

TEST_CASE("curvature report contents") {
    const MarkovChain c = builtin("hypercube:3");
    ReportConfig cfg = small();
    cfg.estimate_curvature = false;
    const Outcome o = curvature_report(c, cfg);
    CHECK(o.converged);
    const Json& j = o.json;
    CHECK(j["criterion"]["bound"]["value"].get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(j["criterion"]["bound"]["provenance"] == "certified");
    CHECK(j["certified"]["rule"] == "criterion");
    CHECK(j["certified"]["sampling"]["min_margin"]["value"].get<double>() >= -1e-8);
    CHECK_FALSE(j.contains("estimate"));

    cfg.estimate_curvature = true;
    const Json e = curvature_report(builtin("twopoint:1,1"), cfg).json;
    CHECK(e["estimate"]["status"] == "NON-CERTIFIED");
    CHECK(e["estimate"]["kappa"]["provenance"] == "estimated");
    CHECK(e["estimate"]["kappa"]["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("distance report bound table") {
    const MarkovChain c = builtin("twopoint:0.5,0.5");
    ReportConfig cfg;
    cfg.solver.grid = 64;
    const Outcome o = distance_report(c, dirac_density(c, 0), dirac_density(c, 1), cfg);
    CHECK(o.converged);
    const Json& b = o.json["bounds"];
    CHECK(b["w_est"]["value"].get<double>() == doctest::Approx(2.2043452176).epsilon(0.01));
    CHECK(b["lower_consistent"] == true);
    CHECK(b["upper_consistent"] == true);
    CHECK(b["w1_graph"]["value"].get<double>() == doctest::Approx(1.0));
    CHECK(o.json["solver"]["refinement_gap"]["value"].get<double>() > 0.0);
}

TEST_CASE("non-convergence is flagged, not thrown") {
    const MarkovChain c = builtin("twopoint:1,1");
    ReportConfig cfg;
    cfg.solver.tol = 1e-30;
    cfg.solver.max_iterations = 40;
    const Outcome o = distance_report(c, dirac_density(c, 0), dirac_density(c, 1), cfg);
    CHECK_FALSE(o.converged);
    CHECK(o.issue == "SolverDiverged");
    CHECK(o.json["solver"]["converged"] == false);
    CHECK(o.json["solver"]["w_est"]["value"].get<double>() > 0.0);
}

TEST_CASE("reports are byte-identical for a fixed seed") {
    const MarkovChain c = builtin("cycle:4");
    ReportConfig cfg = small();
    cfg.curvature.workers = 1;
    cfg.ladder.workers = 1;
    const std::string a = dump(full_report(c, dirac_density(c, 0), uniform_density(c), cfg).json);
    cfg.curvature.workers = 3;
    cfg.ladder.workers = 3;
    const std::string b = dump(full_report(c, dirac_density(c, 0), uniform_density(c), cfg).json);
    CHECK(a == b);
    cfg.seed = cfg.curvature.seed = cfg.ladder.seed = 7;
    const std::string d = dump(full_report(c, dirac_density(c, 0), uniform_density(c), cfg).json);
    CHECK(a != d);
}

TEST_CASE("csv projections") {
    const MarkovChain c = builtin("twopoint:1,1");
    const ReportConfig cfg = small();
    const Outcome g = geodesic_report(c, dirac_density(c, 0), dirac_density(c, 1), cfg);
    const std::string gcsv = to_csv("geodesic", g.json);
    CHECK(gcsv.rfind("time,state,density,potential\n", 0) == 0);
    // 33 nodes times 2 states plus the header.
    CHECK(std::count(gcsv.begin(), gcsv.end(), '\n') == 67);

    const Outcome i = inequalities_report(c, cfg);
    const std::string icsv = to_csv("inequalities", i.json);
    CHECK(icsv.rfind("check,sample,lhs,rhs,margin\n", 0) == 0);
    CHECK(icsv.find("\nmlsi,") != std::string::npos);

    const std::string ccsv = to_csv("chain", Json{{"chain", chain_summary(c)}});
    CHECK(ccsv.rfind("field,value,provenance\n", 0) == 0);
    CHECK(ccsv.find("chain.pi[0],0.5,exact") != std::string::npos);
}

TEST_CASE("inequalities need a curvature constant") {
    const MarkovChain custom = validate_chain((Eigen::MatrixXd(3, 3) << 0.2, 0.5, 0.3, 0.5, 0.2, 0.3, 0.3, 0.3, 0.4).finished());
    // A custom chain gets its certificate from the transposition criterion, which may be absent.
    ReportConfig cfg = small();
    if (!certified_kappa(custom)) CHECK_THROWS_AS(inequalities_report(custom, cfg), Error);
    cfg.kappa = 0.1;
    const Outcome o = inequalities_report(custom, cfg);
    CHECK(o.json["kappa"]["value"].get<double>() == 0.1);
    CHECK(o.json["kappa_source"] == "command line");
}
