// Command-line front end over the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "entropic_ricci.h"

namespace {

struct RunConfig {
    std::string builtin;
    std::string input;
    std::string from;
    std::string to;
    std::optional<int> grid;
    std::optional<double> tol;
    std::optional<int> restarts;
    std::optional<long> samples;
    std::optional<double> kappa;
    std::uint64_t seed = 42;
    std::string out;
    std::string format = "json";
    bool estimate = false;
    bool shoot = false;
};

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitDiverged = 2;

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return true;
}

// Densities may be given inline or as a path to a file holding one of the inline forms.
std::string density_text(const std::string& arg) {
    std::error_code ec;
    if (arg.rfind("dirac:", 0) != 0 && arg != "uniform" && std::filesystem::is_regular_file(arg, ec)) {
        std::string text;
        if (read_file(arg, text)) return text;
    }
    return arg;
}

std::string options_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    if (cfg.grid) j["grid"] = *cfg.grid;
    if (cfg.tol) j["tol"] = *cfg.tol;
    if (cfg.restarts) j["restarts"] = *cfg.restarts;
    if (cfg.samples) j["samples"] = *cfg.samples;
    if (cfg.kappa) j["kappa"] = *cfg.kappa;
    j["seed"] = cfg.seed;
    j["estimate"] = cfg.estimate;
    j["shoot"] = cfg.shoot;
    return j.dump();
}

int report_error(er_status status) {
    const std::string msg = er_last_error_message();
    if (msg.empty()) std::cerr << er_status_name(status) << "\n";
    else std::cerr << msg << "\n";
    return kExitInvalid;
}

bool is_divergence(er_status s) { return s == ER_SOLVER_DIVERGED || s == ER_NO_CONVERGENCE || s == ER_OPT_FAIL; }

int write_output(const RunConfig& cfg, const std::string& command, const char* json) {
    std::string body = json;
    if (cfg.format == "csv") {
        char* csv = nullptr;
        const er_status s = er_report_csv(command.c_str(), json, &csv);
        if (s != ER_OK) return report_error(s);
        body = csv;
        er_string_free(csv);
    }
    if (cfg.out.empty()) {
        std::cout << body;
        std::cout.flush();
        return kExitOk;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f || !(f << body)) {
        std::cerr << "Io: cannot write " << cfg.out << "\n";
        return kExitInvalid;
    }
    return kExitOk;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
    auto* b = sub->add_option("--builtin", cfg.builtin, "complete:n, cycle:n, hypercube:n, twopoint:p,q, torus:AxB");
    auto* i = sub->add_option("--input", cfg.input, "chain JSON file");
    b->excludes(i);
    i->excludes(b);
    sub->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

void add_solver(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--grid", cfg.grid, "time grid N (default 32)");
    sub->add_option("--tol", cfg.tol, "relative duality gap target (default 1e-10)");
}

void add_curvature(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--restarts", cfg.restarts, "optimizer restarts (default 64)");
    sub->add_option("--samples", cfg.samples, "random (rho, psi) samples (default 100000)");
    sub->add_flag("--estimate", cfg.estimate, "run the multi-start curvature optimizer");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transport metric, entropic Ricci curvature and functional inequalities for reversible Markov chains"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* chain_cmd = app.add_subcommand("chain", "validate a chain and print its summary");
    add_common(chain_cmd, cfg);

    auto* distance_cmd = app.add_subcommand("distance", "W estimate with Wasserstein and total variation bounds");
    add_common(distance_cmd, cfg);
    add_solver(distance_cmd, cfg);
    distance_cmd->add_option("--from", cfg.from, "uniform, dirac:<state>, JSON array, or file")->required();
    distance_cmd->add_option("--to", cfg.to, "uniform, dirac:<state>, JSON array, or file")->required();

    auto* geodesic_cmd = app.add_subcommand("geodesic", "solver path, optionally shot with the geodesic ODE");
    add_common(geodesic_cmd, cfg);
    add_solver(geodesic_cmd, cfg);
    geodesic_cmd->add_option("--from", cfg.from, "uniform, dirac:<state>, JSON array, or file")->required();
    geodesic_cmd->add_option("--to", cfg.to, "uniform, dirac:<state>, JSON array, or file")->required();
    geodesic_cmd->add_flag("--shoot", cfg.shoot, "also integrate the geodesic ODE (interior endpoints)");

    auto* curvature_cmd = app.add_subcommand("curvature", "certified and estimated curvature lower bounds");
    add_common(curvature_cmd, cfg);
    add_curvature(curvature_cmd, cfg);

    auto* ineq_cmd = app.add_subcommand("inequalities", "functional inequality checks for a curvature constant");
    add_common(ineq_cmd, cfg);
    add_solver(ineq_cmd, cfg);
    ineq_cmd->add_option("--kappa", cfg.kappa, "curvature constant (default: certified value)");

    auto* report_cmd = app.add_subcommand("report", "full pipeline bundled with provenance");
    add_common(report_cmd, cfg);
    add_solver(report_cmd, cfg);
    add_curvature(report_cmd, cfg);
    report_cmd->add_option("--kappa", cfg.kappa, "curvature constant (default: certified value)");
    auto* rf = report_cmd->add_option("--from", cfg.from, "optional distance source density");
    auto* rt = report_cmd->add_option("--to", cfg.to, "optional distance target density");
    rf->needs(rt);
    rt->needs(rf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    if (cfg.builtin.empty() == cfg.input.empty()) {
        std::cerr << "InvalidArgument: exactly one of --builtin or --input is required\n";
        return kExitInvalid;
    }

    er_chain* chain = nullptr;
    er_status status;
    if (!cfg.builtin.empty()) {
        status = er_chain_from_builtin(cfg.builtin.c_str(), &chain);
    } else {
        std::string text;
        if (!read_file(cfg.input, text)) {
            std::cerr << "Io: cannot read " << cfg.input << "\n";
            return kExitInvalid;
        }
        status = er_chain_from_json(text.c_str(), &chain);
    }
    if (status != ER_OK) return report_error(status);

    const std::string opts = options_json(cfg);
    const std::string from = density_text(cfg.from);
    const std::string to = density_text(cfg.to);
    char* json = nullptr;
    if (command == "chain") status = er_chain_summary_json(chain, &json);
    else if (command == "distance") status = er_distance_json(chain, from.c_str(), to.c_str(), opts.c_str(), &json);
    else if (command == "geodesic") status = er_geodesic_json(chain, from.c_str(), to.c_str(), opts.c_str(), &json);
    else if (command == "curvature") status = er_curvature_json(chain, opts.c_str(), &json);
    else if (command == "inequalities") status = er_inequalities_json(chain, opts.c_str(), &json);
    else
        status = er_report_json(chain, cfg.from.empty() ? nullptr : from.c_str(), cfg.to.empty() ? nullptr : to.c_str(),
                                opts.c_str(), &json);
    er_chain_free(chain);
    const std::string issue = er_last_error_message();

    if (status != ER_OK && !(is_divergence(status) && json)) return report_error(status);
    const int written = write_output(cfg, command, json);
    er_string_free(json);
    if (written != kExitOk) return written;
    if (status != ER_OK) {
        std::cerr << issue << "\n";
        return kExitDiverged;
    }
    return kExitOk;
}
