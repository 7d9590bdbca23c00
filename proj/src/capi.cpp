#include "entropic_ricci.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "ricci/analysis.hpp"
#include "ricci/chain.hpp"
#include "ricci/error.hpp"
#include "ricci/means.hpp"
#include "ricci/report_json.hpp"
#include "ricci/transport.hpp"

struct er_chain {
    ricci::MarkovChain chain;
};

namespace {

thread_local std::string last_error;

er_status to_status(ricci::ErrorCode code) { return static_cast<er_status>(static_cast<int>(code)); }

er_status record(er_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <class F>
er_status guarded(F&& body) {
    try {
        last_error.clear();
        return body();
    } catch (const ricci::Error& e) {
        return record(to_status(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return record(ER_INVALID_ARGUMENT, std::string("InvalidArgument: ") + e.what());
    } catch (const std::bad_alloc&) {
        return record(ER_INTERNAL, "Internal: out of memory");
    } catch (const std::exception& e) {
        return record(ER_INTERNAL, std::string("Internal: ") + e.what());
    } catch (...) {
        return record(ER_INTERNAL, "Internal: unknown exception");
    }
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void* p, const char* what) {
    if (!p) ricci::fail(ricci::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

ricci::ReportConfig parse_options(const char* options) {
    ricci::ReportConfig cfg;
    if (!options || !*options) return cfg;
    const ricci::Json j = ricci::Json::parse(options);
    if (!j.is_object()) ricci::fail(ricci::ErrorCode::InvalidArgument, "options must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const ricci::Json& v = it.value();
        if (k == "grid") cfg.solver.grid = v.get<int>();
        else if (k == "tol") cfg.solver.tol = v.get<double>();
        else if (k == "max_iterations") cfg.solver.max_iterations = v.get<int>();
        else if (k == "restarts") cfg.curvature.restarts = v.get<int>();
        else if (k == "samples") cfg.curvature.samples = v.get<long>();
        else if (k == "seed") cfg.seed = v.get<std::uint64_t>();
        else if (k == "kappa") cfg.kappa = v.get<double>();
        else if (k == "estimate") cfg.estimate_curvature = v.get<bool>();
        else if (k == "shoot") cfg.shoot = v.get<bool>();
        else if (k == "densities") cfg.ladder.densities = v.get<int>();
        else if (k == "transport_samples") cfg.ladder.transport_samples = v.get<int>();
        else if (k == "lipschitz_functions") cfg.ladder.lipschitz_functions = v.get<int>();
        else if (k == "workers") cfg.curvature.workers = cfg.ladder.workers = v.get<int>();
        else ricci::fail(ricci::ErrorCode::InvalidArgument, "unknown option '" + k + "'");
    }
    if (cfg.solver.grid < 2) ricci::fail(ricci::ErrorCode::InvalidArgument, "grid must be at least 2");
    if (!(cfg.solver.tol > 0.0)) ricci::fail(ricci::ErrorCode::InvalidArgument, "tol must be positive");
    if (cfg.curvature.restarts < 1) ricci::fail(ricci::ErrorCode::InvalidArgument, "restarts must be positive");
    if (cfg.curvature.samples < 0) ricci::fail(ricci::ErrorCode::InvalidArgument, "samples must be nonnegative");
    cfg.curvature.seed = cfg.seed;
    cfg.ladder.seed = cfg.seed;
    cfg.ladder.solver = cfg.solver;
    return cfg;
}

er_status emit(const ricci::Outcome& o, char** out) {
    *out = copy_string(ricci::dump(o.json));
    if (o.converged) return ER_OK;
    const std::string issue = o.issue.empty() ? "SolverDiverged" : o.issue;
    er_status status = ER_SOLVER_DIVERGED;
    if (issue == "NoConvergence") status = ER_NO_CONVERGENCE;
    else if (issue == "OptFail") status = ER_OPT_FAIL;
    return record(status, issue + ": report written with non-converged parts flagged");
}

er_chain* wrap(ricci::MarkovChain c) { return new er_chain{std::move(c)}; }

}  // namespace

extern "C" {

const char* er_status_name(er_status status) {
    if (status < ER_OK || status > ER_INTERNAL) return "Unknown";
    // Names are string literals, so the view is null-terminated.
    return ricci::error_name(static_cast<ricci::ErrorCode>(status)).data();
}

const char* er_last_error_message(void) { return last_error.c_str(); }

er_status er_chain_from_builtin(const char* spec, er_chain** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        *out = wrap(ricci::builtin(spec));
        return ER_OK;
    });
}

er_status er_chain_from_json(const char* text, er_chain** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = wrap(ricci::chain_from_json(text));
        return ER_OK;
    });
}

er_status er_chain_from_kernel(int n, const double* kernel, const double* pi, er_chain** out) {
    return guarded([&] {
        require(kernel, "kernel");
        require(out, "out");
        if (n < 1) ricci::fail(ricci::ErrorCode::ShapeMismatch, "n must be positive");
        Eigen::MatrixXd k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) k(i, j) = kernel[i * n + j];
        std::optional<Eigen::VectorXd> p;
        if (pi) p = Eigen::Map<const Eigen::VectorXd>(pi, n);
        *out = wrap(ricci::validate_chain(k, p));
        return ER_OK;
    });
}

er_status er_chain_lazy(const er_chain* chain, double lambda, er_chain** out) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        *out = wrap(ricci::lazy(chain->chain, lambda));
        return ER_OK;
    });
}

er_status er_chain_product(const er_chain* const* chains, const double* alpha, int count, er_chain** out) {
    return guarded([&] {
        require(out, "out");
        if (count > 0) {
            require(chains, "chains");
            require(alpha, "alpha");
        }
        std::vector<ricci::MarkovChain> parts;
        std::vector<double> weights;
        for (int i = 0; i < count; ++i) {
            require(chains[i], "chain");
            parts.push_back(chains[i]->chain);
            weights.push_back(alpha[i]);
        }
        *out = wrap(ricci::product(parts, weights));
        return ER_OK;
    });
}

void er_chain_free(er_chain* chain) { delete chain; }

int er_chain_size(const er_chain* chain) { return chain ? chain->chain.size() : 0; }

er_status er_chain_pi(const er_chain* chain, double* out, int len) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        if (len != chain->chain.size()) ricci::fail(ricci::ErrorCode::ShapeMismatch, "buffer length differs from size");
        for (int i = 0; i < len; ++i) out[i] = chain->chain.pi()(i);
        return ER_OK;
    });
}

er_status er_parse_density(const er_chain* chain, const char* text, double* out, int len) {
    return guarded([&] {
        require(chain, "chain");
        require(text, "text");
        require(out, "out");
        if (len != chain->chain.size()) ricci::fail(ricci::ErrorCode::ShapeMismatch, "buffer length differs from size");
        const ricci::Density rho = ricci::parse_density(chain->chain, text);
        for (int i = 0; i < len; ++i) out[i] = rho(i);
        return ER_OK;
    });
}

er_status er_solve_w(const er_chain* chain, const double* rho0, const double* rho1, int grid, double tol,
                     double* w_est, int* converged) {
    return guarded([&] {
        require(chain, "chain");
        require(rho0, "rho0");
        require(rho1, "rho1");
        require(w_est, "w_est");
        const int n = chain->chain.size();
        ricci::SolverConfig cfg;
        cfg.grid = grid;
        if (tol > 0.0) cfg.tol = tol;
        cfg.throw_on_divergence = false;
        const ricci::PathSolution p = ricci::solve_W(chain->chain, Eigen::Map<const Eigen::VectorXd>(rho0, n),
                                                     Eigen::Map<const Eigen::VectorXd>(rho1, n), cfg);
        *w_est = p.w_est;
        if (converged) *converged = p.converged ? 1 : 0;
        if (!p.converged) return record(ER_SOLVER_DIVERGED, "SolverDiverged: continuity residual or gap not reached");
        return ER_OK;
    });
}

er_status er_poincare_lambda(const er_chain* chain, double* out) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        *out = ricci::poincare_lambda(chain->chain);
        return ER_OK;
    });
}

er_status er_theta_constant(double* out) {
    return guarded([&] {
        require(out, "out");
        *out = ricci::theta_constant_c();
        return ER_OK;
    });
}

er_status er_log_mean(double s, double t, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = ricci::theta(s, t);
        return ER_OK;
    });
}

er_status er_chain_summary_json(const er_chain* chain, char** out) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        ricci::Json j;
        j["command"] = "chain";
        j["chain"] = ricci::chain_summary(chain->chain);
        *out = copy_string(ricci::dump(j));
        return ER_OK;
    });
}

er_status er_distance_json(const er_chain* chain, const char* from, const char* to, const char* options, char** out) {
    return guarded([&] {
        require(chain, "chain");
        require(from, "from");
        require(to, "to");
        require(out, "out");
        const ricci::ReportConfig cfg = parse_options(options);
        const ricci::Density a = ricci::parse_density(chain->chain, from);
        const ricci::Density b = ricci::parse_density(chain->chain, to);
        return emit(ricci::distance_report(chain->chain, a, b, cfg), out);
    });
}

er_status er_geodesic_json(const er_chain* chain, const char* from, const char* to, const char* options, char** out) {
    return guarded([&] {
        require(chain, "chain");
        require(from, "from");
        require(to, "to");
        require(out, "out");
        const ricci::ReportConfig cfg = parse_options(options);
        const ricci::Density a = ricci::parse_density(chain->chain, from);
        const ricci::Density b = ricci::parse_density(chain->chain, to);
        return emit(ricci::geodesic_report(chain->chain, a, b, cfg), out);
    });
}

er_status er_curvature_json(const er_chain* chain, const char* options, char** out) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        return emit(ricci::curvature_report(chain->chain, parse_options(options)), out);
    });
}

er_status er_inequalities_json(const er_chain* chain, const char* options, char** out) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        return emit(ricci::inequalities_report(chain->chain, parse_options(options)), out);
    });
}

er_status er_report_json(const er_chain* chain, const char* from, const char* to, const char* options, char** out) {
    return guarded([&] {
        require(chain, "chain");
        require(out, "out");
        if ((from == nullptr) != (to == nullptr))
            ricci::fail(ricci::ErrorCode::InvalidArgument, "from and to must be given together");
        const ricci::ReportConfig cfg = parse_options(options);
        std::optional<ricci::Density> a, b;
        if (from) {
            a = ricci::parse_density(chain->chain, from);
            b = ricci::parse_density(chain->chain, to);
        }
        return emit(ricci::full_report(chain->chain, a, b, cfg), out);
    });
}

er_status er_report_csv(const char* command, const char* report_json, char** out) {
    return guarded([&] {
        require(command, "command");
        require(report_json, "report_json");
        require(out, "out");
        *out = copy_string(ricci::to_csv(command, ricci::Json::parse(report_json)));
        return ER_OK;
    });
}

void er_string_free(char* s) { std::free(s); }

}  // extern "C"
