#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ricci {

struct ChainTolerances {
    double row_sum = 1e-12;
    double pi_sum = 1e-12;
    double detailed_balance = 1e-10;
    double structural_zero = 1e-15;
    double density_mass = 1e-10;
};

// Undirected edge a < b of the support graph; weight = K(a,b) pi(a) = K(b,a) pi(b).
struct Edge {
    int a = 0;
    int b = 0;
    double kab = 0.0;
    double kba = 0.0;
    double weight = 0.0;
};

class MarkovChain;

// How a chain was built. Curvature certificates are derived from this.
struct Construction {
    enum class Kind { Custom, Complete, Cycle, Hypercube, TwoPoint, Torus, Lazy, Product };
    Kind kind = Kind::Custom;
    std::vector<double> params;  // n | n | n | (p,q) | cycle sizes | lambda | alpha
    std::vector<std::shared_ptr<const MarkovChain>> parts;
    std::string label;
};

class MarkovChain {
public:
    MarkovChain(std::vector<std::string> states, Eigen::MatrixXd kernel, Eigen::VectorXd pi, Construction how);

    int size() const { return static_cast<int>(states_.size()); }
    const std::vector<std::string>& states() const { return states_; }
    const Eigen::MatrixXd& kernel() const { return kernel_; }
    const Eigen::VectorXd& pi() const { return pi_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Construction& construction() const { return how_; }

    // Symmetric matrix W(x,y) = K(x,y) pi(x), zero diagonal.
    const Eigen::MatrixXd& edge_weights() const { return weights_; }

    // max |K(x,y) pi(x) - K(y,x) pi(y)|
    double reversibility_residual() const;

    // Index of a state label, or of a plain integer index.
    std::optional<int> find_state(std::string_view label) const;

private:
    std::vector<std::string> states_;
    Eigen::MatrixXd kernel_;
    Eigen::VectorXd pi_;
    Eigen::MatrixXd weights_;
    std::vector<Edge> edges_;
    Construction how_;
};

MarkovChain validate_chain(const Eigen::MatrixXd& kernel, const std::optional<Eigen::VectorXd>& pi = std::nullopt,
                           std::vector<std::string> states = {}, const ChainTolerances& tol = {},
                           Construction how = {});

// complete:n, cycle:n, hypercube:n, twopoint:p,q, torus:c1xc2x...
MarkovChain builtin(std::string_view spec);

MarkovChain lazy(const MarkovChain& chain, double lambda);

MarkovChain product(const std::vector<MarkovChain>& chains, const std::vector<double>& alpha);

Eigen::MatrixXi graph_distance(const MarkovChain& chain);

int graph_diameter(const MarkovChain& chain);

// Chain JSON: {"states": [...], "kernel": [[...]], "pi": optional [...]}
MarkovChain chain_from_json(std::string_view text);
std::string chain_to_json(const MarkovChain& chain);

// Densities are vectors rho with sum_x pi(x) rho(x) = 1.
using Density = Eigen::VectorXd;
using Potential = Eigen::VectorXd;

Density uniform_density(const MarkovChain& chain);
Density dirac_density(const MarkovChain& chain, int state);
// Throws InvalidDensity / ShapeMismatch.
void check_density(const MarkovChain& chain, const Density& rho, double tol = 1e-10);
// "uniform", "dirac:<state>", or an inline JSON array.
Density parse_density(const MarkovChain& chain, std::string_view text);

struct MappingRepresentation {
    int n_states = 0;
    std::vector<std::string> names;
    std::vector<std::vector<int>> moves;  // moves[d][x] = image of x under move d
    std::vector<int> inverse;              // index of the inverse move
    Eigen::MatrixXd rates;                 // rates(x, d) = c(x, d)
    int size() const { return static_cast<int>(moves.size()); }
};

// Default: transpositions t_{x,y} over the support edges with c(x, t_{x,y}) = K(x,y).
MappingRepresentation transposition_representation(const MarkovChain& chain);

// Coordinate moves for hypercube, cycle, torus and two-point chains; none otherwise.
std::optional<MappingRepresentation> natural_representation(const MarkovChain& chain);

// Throws GeneratorMismatch, NoInverse or ReversibilityFail.
void validate_representation(const MarkovChain& chain, const MappingRepresentation& rep, double tol = 1e-12);

// Validated representation: the custom one if given, else natural moves, else transpositions.
MappingRepresentation mapping_representation(const MarkovChain& chain,
                                             const std::optional<MappingRepresentation>& custom = std::nullopt);

}  // namespace ricci
