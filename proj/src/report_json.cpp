#include "ricci/report_json.hpp"

#include <cmath>
#include <sstream>

#include "ricci/error.hpp"
#include "ricci/means.hpp"

namespace ricci {

namespace {

Json number_or_null(double x) {
    if (std::isfinite(x)) return Json(x);
    return Json(nullptr);
}

Json vector_json(const Eigen::VectorXd& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_or_null(v(i)));
    return arr;
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
    return rows;
}

Json count(long n) { return tagged(static_cast<double>(n), provenance::exact); }

SolverConfig quiet(SolverConfig s) {
    s.throw_on_divergence = false;
    return s;
}

Json sample_json(const MarkovChain& chain, const SampleCheck& s) {
    Json j;
    j["samples"] = count(s.samples);
    j["kappa"] = tagged(s.kappa, provenance::exact);
    j["threshold"] = tagged(s.threshold, provenance::exact);
    j["min_margin"] = tagged(s.min_margin, provenance::sampled);
    j["min_ratio"] = tagged(s.min_ratio, provenance::sampled);
    j["violations"] = tagged(static_cast<double>(s.violations), provenance::sampled);
    j["witness"] = tagged(static_cast<double>(s.witness), provenance::sampled);
    if (s.witness_rho.size() == chain.size()) {
        j["witness_rho"] = tagged(s.witness_rho, provenance::sampled);
        j["witness_psi"] = tagged(s.witness_psi, provenance::sampled);
    }
    return j;
}

Json criterion_json(const CriterionResult& c, const std::string& representation, int moves) {
    Json j;
    j["representation"] = representation;
    j["moves"] = count(moves);
    j["commute"] = c.commute;
    j["rate_invariant"] = c.rate_invariant;
    j["involutive"] = c.involutive;
    j["min_rate"] = tagged(c.min_rate, provenance::exact);
    j["bound"] = c.bound ? tagged(*c.bound, provenance::certified) : Json(nullptr);
    return j;
}

Json check_json(const CheckResult& c) {
    Json j;
    j["name"] = c.name;
    j["inequality"] = c.inequality;
    j["bound_direction"] = c.bound_direction;
    j["status"] = c.status;
    j["slack"] = tagged(c.slack, provenance::exact);
    j["instances"] = count(c.instances);
    j["violations"] = tagged(static_cast<double>(c.violations), provenance::sampled);
    j["worst_margin"] = tagged(c.worst_margin, provenance::sampled);
    j["witness"] = tagged(static_cast<double>(c.witness), provenance::sampled);
    if (!c.note.empty()) j["note"] = c.note;
    Json rows = Json::array();
    for (const CheckRow& r : c.rows)
        rows.push_back(Json::array({r.sample, number_or_null(r.lhs), number_or_null(r.rhs), number_or_null(r.margin)}));
    j["rows"] = {{"columns", {"sample", "lhs", "rhs", "margin"}}, {"values", rows}, {"provenance", provenance::sampled}};
    return j;
}

std::string csv_field(const Json& v) {
    std::string text = v.is_string() ? v.get<std::string>() : v.dump();
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char ch : text) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return quoted + "\"";
}

void flatten_value(const Json& v, const std::string& prefix, const std::string& prov, std::ostringstream& out) {
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten_value(v[i], prefix + "[" + std::to_string(i) + "]", prov, out);
        return;
    }
    out << csv_field(Json(prefix)) << "," << csv_field(v) << "," << prov << "\n";
}

// Tagged values keep their provenance; untagged leaves are flags and labels with an empty provenance.
void flatten(const Json& j, const std::string& prefix, std::ostringstream& out) {
    if (j.is_object()) {
        if (j.contains("provenance") && j.contains("value")) {
            flatten_value(j["value"], prefix, j["provenance"].get<std::string>(), out);
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "rows" || it.key() == "path" || it.key() == "trajectory") continue;
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else if (!j.is_number()) {
        flatten_value(j, prefix, "", out);
    }
}

}  // namespace

Json tagged(double value, const char* prov) { return {{"value", number_or_null(value)}, {"provenance", prov}}; }

Json tagged(const Eigen::VectorXd& values, const char* prov) {
    return {{"value", vector_json(values)}, {"provenance", prov}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json chain_summary(const MarkovChain& chain) {
    Json j;
    j["label"] = chain.construction().label;
    j["states"] = chain.states();
    j["size"] = count(chain.size());
    j["kernel"] = {{"value", matrix_json(chain.kernel())}, {"provenance", provenance::exact}};
    j["pi"] = tagged(chain.pi(), provenance::exact);
    j["reversibility_residual"] = tagged(chain.reversibility_residual(), provenance::exact);
    j["graph_diameter"] = count(graph_diameter(chain));
    j["edges"] = count(static_cast<long>(chain.edges().size()));
    j["min_positive_rate"] = tagged(min_positive_rate(chain), provenance::exact);
    return j;
}

Json path_json(const MarkovChain& chain, const PathSolution& path) {
    Json j;
    j["provenance"] = provenance::estimated;
    j["times"] = path.times;
    Json dens = Json::array();
    for (const Density& d : path.densities) dens.push_back(vector_json(d));
    j["densities"] = dens;
    Json edges = Json::array();
    for (const Edge& e : chain.edges()) edges.push_back(Json::array({chain.states()[e.a], chain.states()[e.b]}));
    j["edges"] = edges;
    Json flux = Json::array();
    for (const Momentum& v : path.momenta) {
        Json row = Json::array();
        for (const Edge& e : chain.edges()) row.push_back(number_or_null(v(e.a, e.b)));
        flux.push_back(row);
    }
    j["momenta"] = flux;
    Json pots = Json::array();
    for (int k = 1; k <= static_cast<int>(path.momenta.size()); ++k) {
        try {
            pots.push_back(vector_json(recover_potential(chain, path, k)));
        } catch (const Error&) {
            pots.push_back(nullptr);
        }
    }
    j["potentials"] = pots;
    Json acts = Json::array();
    for (double a : path.interval_actions) acts.push_back(number_or_null(a));
    j["interval_actions"] = acts;
    return j;
}

namespace {

Json solve_json(const PathSolution& p) {
    Json j;
    j["w_est"] = tagged(p.w_est, provenance::estimated);
    j["action"] = tagged(p.action, provenance::estimated);
    j["grid"] = count(static_cast<long>(p.momenta.size()));
    if (p.refined) {
        j["w_coarse"] = tagged(p.w_coarse, provenance::estimated);
        j["refinement_gap"] = tagged(p.refinement_gap, provenance::estimated);
    }
    j["converged"] = p.converged;
    j["iterations"] = count(p.iterations);
    j["continuity_residual"] = tagged(p.continuity_residual, provenance::exact);
    j["duality_gap"] = tagged(p.duality_gap, provenance::estimated);
    return j;
}

SolverConfig refined(const ReportConfig& cfg) {
    SolverConfig s = quiet(cfg.solver);
    s.refine = true;
    return s;
}

}  // namespace

Outcome distance_report(const MarkovChain& chain, const Density& rho0, const Density& rho1, const ReportConfig& cfg) {
    Outcome out;
    Json& j = out.json;
    j["command"] = "distance";
    j["chain"] = chain.construction().label;
    j["from"] = tagged(rho0, provenance::exact);
    j["to"] = tagged(rho1, provenance::exact);
    const PathSolution path = solve_W(chain, rho0, rho1, refined(cfg));
    j["solver"] = solve_json(path);
    const MetricBounds b = metric_bounds(chain, rho0, rho1);
    const double eps = path.refinement_gap;
    Json t;
    t["d_tv"] = tagged(b.d_tv, provenance::exact);
    t["d_tv_over_sqrt2"] = tagged(b.d_tv / std::sqrt(2.0), provenance::exact);
    t["w1_graph"] = tagged(b.w1_graph, provenance::exact);
    t["w2_graph"] = tagged(b.w2_graph, provenance::exact);
    t["lower_sqrt2_w1_graph"] = tagged(b.lower, provenance::certified);
    t["w_est"] = tagged(path.w_est, provenance::estimated);
    t["upper_c_over_sqrt_k_w2_graph"] = tagged(b.upper, provenance::certified);
    t["k"] = tagged(b.k, provenance::exact);
    t["c"] = tagged(b.c, provenance::exact);
    t["epsilon"] = tagged(eps, provenance::estimated);
    t["lower_consistent"] = b.d_tv / std::sqrt(2.0) <= b.lower + 1e-12 && b.lower <= path.w_est + eps + 1e-12;
    t["upper_consistent"] = path.w_est <= b.upper + eps + 1e-12;
    j["bounds"] = t;
    if (!path.converged) {
        out.converged = false;
        out.issue = error_name(ErrorCode::SolverDiverged);
    }
    return out;
}

Outcome geodesic_report(const MarkovChain& chain, const Density& rho0, const Density& rho1, const ReportConfig& cfg) {
    Outcome out;
    Json& j = out.json;
    j["command"] = "geodesic";
    j["chain"] = chain.construction().label;
    j["from"] = tagged(rho0, provenance::exact);
    j["to"] = tagged(rho1, provenance::exact);
    const PathSolution path = solve_W(chain, rho0, rho1, refined(cfg));
    Json s = solve_json(path);
    s["path"] = path_json(chain, path);
    j["solver"] = s;
    if (!path.converged) {
        out.converged = false;
        out.issue = error_name(ErrorCode::SolverDiverged);
    }
    if (!cfg.shoot) return out;

    Json sh;
    const bool interior = rho0.minCoeff() > kInteriorFloor && rho1.minCoeff() > kInteriorFloor;
    if (!interior) {
        sh["status"] = "skipped";
        sh["note"] = std::string(error_name(ErrorCode::BoundaryState)) + ": shooting needs interior endpoints";
        j["shooting"] = sh;
        return out;
    }
    ShootConfig sc;
    sc.solver = quiet(cfg.solver);
    const ShootResult r = shoot(chain, rho0, rho1, sc);
    sh["status"] = r.converged ? "converged" : "fallback";
    sh["iterations"] = count(r.iterations);
    sh["endpoint_error"] = tagged(r.endpoint_error, provenance::estimated);
    sh["psi0"] = tagged(r.psi0, provenance::estimated);
    if (r.converged) {
        sh["length"] = tagged(r.length, provenance::estimated);
        sh["action"] = tagged(r.action, provenance::estimated);
        Json traj = Json::array();
        const int stride = std::max<int>(1, static_cast<int>(r.trajectory.size() - 1) / 100);
        for (std::size_t i = 0; i < r.trajectory.size(); i += stride) {
            const GeodesicState& g = r.trajectory[i];
            traj.push_back({{"time", g.time},
                            {"density", vector_json(g.rho)},
                            {"potential", vector_json(g.psi)},
                            {"action", number_or_null(action(chain, g.rho, g.psi))}});
        }
        sh["trajectory"] = {{"provenance", provenance::estimated}, {"nodes", traj}};
    } else {
        sh["note"] = std::string(error_name(ErrorCode::NoConvergence)) + ": reporting the convex-solver path";
        if (out.converged) {
            out.converged = false;
            out.issue = error_name(ErrorCode::NoConvergence);
        }
    }
    j["shooting"] = sh;
    return out;
}

Outcome curvature_report(const MarkovChain& chain, const ReportConfig& cfg) {
    Outcome out;
    Json& j = out.json;
    j["command"] = "curvature";
    j["chain"] = chain.construction().label;

    const std::optional<MappingRepresentation> natural = natural_representation(chain);
    const MappingRepresentation rep = natural ? *natural : transposition_representation(chain);
    j["criterion"] = criterion_json(criterion_bound(rep), natural ? "natural" : "transpositions", rep.size());

    const std::optional<CertifiedKappa> cert = certified_kappa(chain);
    std::optional<CurvatureReport> est;
    if (cfg.estimate_curvature) {
        try {
            est = ricci_estimate(chain, cfg.curvature);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OptFail) throw;
            out.converged = false;
            out.issue = error_name(ErrorCode::OptFail);
            j["estimate"] = {{"status", "failed"}, {"note", e.what()}};
        }
    }

    if (cert) {
        Json c;
        c["kappa"] = tagged(cert->value, provenance::certified);
        c["rule"] = cert->provenance;
        c["detail"] = cert->detail;
        if (est && est->certified_sampling) {
            c["sampling"] = sample_json(chain, *est->certified_sampling);
        } else if (cfg.curvature.samples > 0) {
            const SampleCheck s = sample_curvature(chain, cert->value, cfg.curvature.samples, cfg.curvature.seed, 1e-8,
                                                   cfg.curvature.workers);
            c["sampling"] = sample_json(chain, s);
        }
        j["certified"] = c;
    } else {
        j["certified"] = nullptr;
    }

    if (est) {
        Json e;
        e["status"] = "NON-CERTIFIED";
        e["note"] = "best local minimum of B/A over interior densities; an upper bound on the true infimum";
        e["kappa"] = tagged(est->kappa_estimated, provenance::estimated);
        e["restarts"] = count(est->restarts);
        e["restarts_converged"] = count(est->restarts_converged);
        e["spread"] = tagged(est->spread, provenance::estimated);
        e["at_floor"] = est->at_floor;
        e["min_rho"] = tagged(est->min_rho, provenance::estimated);
        e["argmin_rho"] = tagged(est->argmin_rho, provenance::estimated);
        e["argmin_psi"] = tagged(est->argmin_psi, provenance::estimated);
        if (cfg.curvature.samples > 0) e["sampling"] = sample_json(chain, est->sampling);
        j["estimate"] = e;
    }
    return out;
}

Outcome inequalities_report(const MarkovChain& chain, const ReportConfig& cfg) {
    Outcome out;
    Json& j = out.json;
    j["command"] = "inequalities";
    j["chain"] = chain.construction().label;
    double kappa = 0.0;
    const char* kprov = provenance::exact;
    std::string source = "command line";
    if (cfg.kappa) {
        kappa = *cfg.kappa;
    } else if (const auto cert = certified_kappa(chain)) {
        kappa = cert->value;
        kprov = provenance::certified;
        source = cert->provenance;
    } else {
        fail(ErrorCode::InvalidArgument, "no curvature constant given and none certified for this chain");
    }
    LadderConfig lc = cfg.ladder;
    lc.solver = quiet(lc.solver);
    InequalityReport rep = verify_ladder(chain, kappa, lc);
    j["kappa"] = tagged(kappa, kprov);
    j["kappa_source"] = source;
    j["lambda"] = tagged(rep.lambda, kprov);
    j["poincare_lambda"] = tagged(rep.poincare_lambda, provenance::spectral);
    j["mlsi_lambda_est"] = tagged(rep.mlsi_lambda_est, provenance::sampled);
    j["mlsi_witness"] = tagged(static_cast<double>(rep.mlsi_witness), provenance::sampled);
    if (rep.mlsi_witness_rho.size() == chain.size())
        j["mlsi_witness_rho"] = tagged(rep.mlsi_witness_rho, provenance::sampled);
    j["reverse_ov_lambda"] = tagged(rep.reverse_ov_lambda, kprov);
    j["ladder_consistent"] = rep.ladder_consistent;
    Json checks = Json::array();
    for (const CheckResult* c : rep.checks()) {
        checks.push_back(check_json(*c));
        if (c->status == "error" && out.converged) {
            out.converged = false;
            out.issue = error_name(ErrorCode::SolverDiverged);
        }
    }
    j["checks"] = checks;
    return out;
}

Outcome full_report(const MarkovChain& chain, const std::optional<Density>& rho0, const std::optional<Density>& rho1,
                    const ReportConfig& cfg) {
    Outcome out;
    Json& j = out.json;
    j["command"] = "report";
    j["chain"] = chain_summary(chain);
    const HeatSemigroup sg(chain);
    j["spectrum"] = tagged(sg.spectrum(), provenance::spectral);
    j["poincare_lambda"] = tagged(chain.size() > 1 ? sg.spectrum()(1) : 0.0, provenance::spectral);
    j["theta_constant"] = tagged(theta_constant_c(), provenance::exact);

    auto merge = [&](const char* key, Outcome part) {
        part.json.erase("command");
        part.json.erase("chain");
        j[key] = std::move(part.json);
        if (!part.converged && out.converged) {
            out.converged = false;
            out.issue = part.issue;
        }
    };
    merge("curvature", curvature_report(chain, cfg));
    if (rho0 && rho1) merge("distance", distance_report(chain, *rho0, *rho1, cfg));
    if (chain.size() >= 2 && (cfg.kappa || certified_kappa(chain))) {
        merge("inequalities", inequalities_report(chain, cfg));
    } else {
        j["inequalities"] = {{"status", "skipped"}, {"note", "no curvature constant given and none certified"}};
    }
    return out;
}

std::string to_csv(const std::string& command, const Json& report) {
    std::ostringstream out;
    if (command == "geodesic" && report.contains("solver") && report["solver"].contains("path")) {
        const Json& p = report["solver"]["path"];
        const Json& pots = p["potentials"];
        out << "time,state,density,potential\n";
        for (std::size_t k = 0; k < p["densities"].size(); ++k) {
            const Json& d = p["densities"][k];
            // Potentials live on intervals; node k uses the interval ending at k (the first one at k = 0).
            const std::size_t iv = k == 0 ? 0 : k - 1;
            for (std::size_t x = 0; x < d.size(); ++x) {
                out << p["times"][k].dump() << "," << x << "," << d[x].dump() << ",";
                if (iv < pots.size() && !pots[iv].is_null()) out << pots[iv][x].dump();
                out << "\n";
            }
        }
        return out.str();
    }
    if (command == "inequalities" && report.contains("checks")) {
        out << "check,sample,lhs,rhs,margin\n";
        for (const Json& c : report["checks"])
            for (const Json& r : c["rows"]["values"])
                out << c["name"].get<std::string>() << "," << r[0].dump() << "," << r[1].dump() << "," << r[2].dump()
                    << "," << r[3].dump() << "\n";
        return out.str();
    }
    out << "field,value,provenance\n";
    flatten(report, "", out);
    return out.str();
}

}  // namespace ricci
