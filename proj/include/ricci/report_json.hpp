#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "ricci/analysis.hpp"
#include "ricci/chain.hpp"
#include "ricci/curvature.hpp"
#include "ricci/geodesics.hpp"
#include "ricci/transport.hpp"

namespace ricci {

using Json = nlohmann::ordered_json;

// Every computed number is emitted as {"value": ..., "provenance": ...}.
// Provenance tags:
//   certified       rigorous bound from a proven criterion or construction rule
//   estimated       optimizer or solver output, not a proof
//   sampled         extremum over random instances
//   exact-spectral  eigen-decomposition of the generator
//   exact           finite exact computation (LP optimum, BFS, quadrature, input echo)
namespace provenance {
inline constexpr const char* certified = "certified";
inline constexpr const char* estimated = "estimated";
inline constexpr const char* sampled = "sampled";
inline constexpr const char* spectral = "exact-spectral";
inline constexpr const char* exact = "exact";
}  // namespace provenance

Json tagged(double value, const char* prov);
Json tagged(const Eigen::VectorXd& values, const char* prov);

// Knobs shared by all report builders.
struct ReportConfig {
    SolverConfig solver;               // refine is forced on for distances
    CurvatureConfig curvature;
    LadderConfig ladder;
    bool estimate_curvature = false;   // run the multi-start optimizer
    bool shoot = false;                // also integrate the geodesic ODE
    std::optional<double> kappa;       // inequalities: curvature constant to test
    std::uint64_t seed = 42;
};

// Completion flag for callers that must signal non-convergence.
struct Outcome {
    Json json;
    bool converged = true;
    std::string issue;  // error name of the first non-convergence
};

Json chain_summary(const MarkovChain& chain);
Json path_json(const MarkovChain& chain, const PathSolution& path);

Outcome distance_report(const MarkovChain& chain, const Density& rho0, const Density& rho1, const ReportConfig& cfg);
Outcome geodesic_report(const MarkovChain& chain, const Density& rho0, const Density& rho1, const ReportConfig& cfg);
Outcome curvature_report(const MarkovChain& chain, const ReportConfig& cfg);
Outcome inequalities_report(const MarkovChain& chain, const ReportConfig& cfg);
// Chain summary, curvature, inequalities and optionally a distance between two densities.
Outcome full_report(const MarkovChain& chain, const std::optional<Density>& rho0, const std::optional<Density>& rho1,
                    const ReportConfig& cfg);

// CSV projections. Flat reports become (field,value,provenance) rows; geodesics
// become (time,state,density[,potential]); inequalities become (check,sample,lhs,rhs,margin).
std::string to_csv(const std::string& command, const Json& report);

// Canonical serialization: two-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace ricci
