#include "ricci/chain.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <sstream>

#include "ricci/error.hpp"

namespace ricci {

using nlohmann::json;

MarkovChain::MarkovChain(std::vector<std::string> states, Eigen::MatrixXd kernel, Eigen::VectorXd pi,
                         Construction how)
    : states_(std::move(states)), kernel_(std::move(kernel)), pi_(std::move(pi)), how_(std::move(how)) {
    const int n = size();
    weights_ = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (kernel_(a, b) == 0.0 && kernel_(b, a) == 0.0) continue;
            const double w = 0.5 * (kernel_(a, b) * pi_(a) + kernel_(b, a) * pi_(b));
            weights_(a, b) = weights_(b, a) = w;
            edges_.push_back({a, b, kernel_(a, b), kernel_(b, a), w});
        }
}

double MarkovChain::reversibility_residual() const {
    double r = 0.0;
    for (int x = 0; x < size(); ++x)
        for (int y = 0; y < size(); ++y)
            r = std::max(r, std::abs(kernel_(x, y) * pi_(x) - kernel_(y, x) * pi_(y)));
    return r;
}

std::optional<int> MarkovChain::find_state(std::string_view label) const {
    for (int i = 0; i < size(); ++i)
        if (states_[i] == label) return i;
    int idx = 0;
    const auto res = std::from_chars(label.data(), label.data() + label.size(), idx);
    if (res.ec == std::errc() && res.ptr == label.data() + label.size() && idx >= 0 && idx < size()) return idx;
    return std::nullopt;
}

namespace {

bool strongly_connected(const Eigen::MatrixXd& k) {
    const int n = static_cast<int>(k.rows());
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            const int x = q.front();
            q.pop();
            for (int y = 0; y < n; ++y) {
                const double v = transpose ? k(y, x) : k(x, y);
                if (v > 0.0 && !seen[y]) {
                    seen[y] = 1;
                    ++count;
                    q.push(y);
                }
            }
        }
        return count == n;
    };
    return reach(false) && reach(true);
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& k) {
    const int n = static_cast<int>(k.rows());
    Eigen::MatrixXd a = k.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
    return pi / pi.sum();
}

std::vector<std::string> index_labels(int n) {
    std::vector<std::string> s(n);
    for (int i = 0; i < n; ++i) s[i] = std::to_string(i);
    return s;
}

double parse_double(std::string_view s, std::string_view spec) {
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v))
        fail(ErrorCode::BadSpec, "cannot parse number '" + tmp + "' in '" + std::string(spec) + "'");
    return v;
}

int parse_count(std::string_view s, std::string_view spec) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(ErrorCode::BadSpec, "cannot parse integer '" + std::string(s) + "' in '" + std::string(spec) + "'");
    if (v < 1) fail(ErrorCode::BadSpec, "size must be at least 1 in '" + std::string(spec) + "'");
    return v;
}

MarkovChain make_cycle(int n) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        k(m, (m + 1) % n) += 0.5;
        k(m, (m + n - 1) % n) += 0.5;
    }
    Construction how{Construction::Kind::Cycle, {double(n)}, {}, "cycle:" + std::to_string(n)};
    return validate_chain(k, Eigen::VectorXd::Constant(n, 1.0 / n), index_labels(n), {}, how);
}

MarkovChain make_twopoint(double p, double q, std::string label) {
    Eigen::MatrixXd k(2, 2);
    k << 1.0 - p, p, q, 1.0 - q;
    Eigen::VectorXd pi(2);
    pi << q / (p + q), p / (p + q);
    Construction how{Construction::Kind::TwoPoint, {p, q}, {}, std::move(label)};
    return validate_chain(k, pi, {"0", "1"}, {}, how);
}

}  // namespace

MarkovChain validate_chain(const Eigen::MatrixXd& kernel, const std::optional<Eigen::VectorXd>& pi,
                           std::vector<std::string> states, const ChainTolerances& tol, Construction how) {
    const int n = static_cast<int>(kernel.rows());
    if (n == 0 || kernel.cols() != n) fail(ErrorCode::ShapeMismatch, "kernel must be a nonempty square matrix");
    if (!states.empty() && static_cast<int>(states.size()) != n)
        fail(ErrorCode::ShapeMismatch, "state list length differs from kernel size");
    if (states.empty()) states = index_labels(n);
    Eigen::MatrixXd k = kernel;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (!std::isfinite(k(x, y)) || k(x, y) < 0.0)
                fail(ErrorCode::NotStochastic, "kernel entry (" + std::to_string(x) + "," + std::to_string(y) +
                                                   ") is negative or not finite");
            if (k(x, y) < tol.structural_zero) k(x, y) = 0.0;
        }
    for (int x = 0; x < n; ++x) {
        const double s = k.row(x).sum();
        if (std::abs(s - 1.0) > tol.row_sum)
            fail(ErrorCode::NotStochastic, "row " + std::to_string(x) + " sums to " + std::to_string(s));
    }
    if (!strongly_connected(k)) fail(ErrorCode::NotIrreducible, "support graph is not connected");
    Eigen::VectorXd p;
    if (pi) {
        if (pi->size() != n) fail(ErrorCode::ShapeMismatch, "pi length differs from kernel size");
        p = *pi;
        if ((p.array() <= 0.0).any() || std::abs(p.sum() - 1.0) > tol.pi_sum)
            fail(ErrorCode::NotReversible, "pi must be a positive probability vector");
    } else {
        p = stationary(k);
        if ((p.array() <= 0.0).any()) fail(ErrorCode::NotIrreducible, "stationary vector is not positive");
    }
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            if (std::abs(k(x, y) * p(x) - k(y, x) * p(y)) > tol.detailed_balance)
                fail(ErrorCode::NotReversible,
                     "detailed balance fails on (" + std::to_string(x) + "," + std::to_string(y) + ")");
    return MarkovChain(std::move(states), std::move(k), std::move(p), std::move(how));
}

MarkovChain builtin(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) fail(ErrorCode::BadSpec, "expected family:args, got '" + std::string(spec) + "'");
    const std::string_view family = spec.substr(0, colon);
    const std::string_view args = spec.substr(colon + 1);
    const std::string label(spec);

    if (family == "complete") {
        const int n = parse_count(args, spec);
        Construction how{Construction::Kind::Complete, {double(n)}, {}, label};
        return validate_chain(Eigen::MatrixXd::Constant(n, n, 1.0 / n), Eigen::VectorXd::Constant(n, 1.0 / n),
                              index_labels(n), {}, how);
    }
    if (family == "cycle") return make_cycle(parse_count(args, spec));
    if (family == "hypercube") {
        const int d = parse_count(args, spec);
        if (d > 20) fail(ErrorCode::BadSpec, "hypercube dimension too large");
        const int n = 1 << d;
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
        std::vector<std::string> states(n);
        for (int x = 0; x < n; ++x) {
            for (int i = 0; i < d; ++i) {
                k(x, x ^ (1 << (d - 1 - i))) = 1.0 / d;
                states[x].push_back(((x >> (d - 1 - i)) & 1) ? '1' : '0');
            }
        }
        Construction how{Construction::Kind::Hypercube, {double(d)}, {}, label};
        return validate_chain(k, Eigen::VectorXd::Constant(n, 1.0 / n), std::move(states), {}, how);
    }
    if (family == "twopoint") {
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) fail(ErrorCode::BadSpec, "twopoint needs p,q");
        const double p = parse_double(args.substr(0, comma), spec);
        const double q = parse_double(args.substr(comma + 1), spec);
        if (!(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0)) fail(ErrorCode::BadSpec, "p and q must lie in (0,1]");
        return make_twopoint(p, q, label);
    }
    if (family == "torus") {
        std::vector<int> sizes;
        std::string rest(args);
        // accept both 'x' and the multiplication sign as separators
        for (std::string::size_type pos; (pos = rest.find("\xC3\x97")) != std::string::npos;) rest.replace(pos, 2, "x");
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, 'x')) sizes.push_back(parse_count(tok, spec));
        if (sizes.empty()) fail(ErrorCode::BadSpec, "torus needs at least one cycle size");
        std::vector<MarkovChain> cycles;
        for (int c : sizes) cycles.push_back(make_cycle(c));
        MarkovChain prod = product(cycles, std::vector<double>(sizes.size(), 1.0 / sizes.size()));
        Construction how = prod.construction();
        how.kind = Construction::Kind::Torus;
        how.params.assign(sizes.begin(), sizes.end());
        how.label = label;
        return MarkovChain(prod.states(), prod.kernel(), prod.pi(), std::move(how));
    }
    fail(ErrorCode::BadSpec, "unknown chain family '" + std::string(family) + "'");
}

MarkovChain lazy(const MarkovChain& chain, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) fail(ErrorCode::BadLambda, "lambda must lie in (0,1)");
    const int n = chain.size();
    Eigen::MatrixXd k = (1.0 - lambda) * Eigen::MatrixXd::Identity(n, n) + lambda * chain.kernel();
    std::ostringstream label;
    label << "lazy(" << chain.construction().label << "," << lambda << ")";
    Construction how{Construction::Kind::Lazy, {lambda}, {std::make_shared<const MarkovChain>(chain)}, label.str()};
    return validate_chain(k, chain.pi(), chain.states(), {}, how);
}

MarkovChain product(const std::vector<MarkovChain>& chains, const std::vector<double>& alpha) {
    if (chains.empty()) fail(ErrorCode::EmptyProduct, "product of zero chains");
    if (alpha.size() != chains.size()) fail(ErrorCode::ShapeMismatch, "one weight per factor is required");
    double total = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) fail(ErrorCode::WeightSum, "weights must be nonnegative");
        total += a;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::WeightSum, "weights sum to " + std::to_string(total));

    const int d = static_cast<int>(chains.size());
    std::vector<int> dims(d);
    long long n_long = 1;
    for (int i = 0; i < d; ++i) {
        dims[i] = chains[i].size();
        n_long *= dims[i];
        if (n_long > 1 << 14) fail(ErrorCode::InvalidArgument, "product state space too large");
    }
    const int n = static_cast<int>(n_long);
    // Lexicographic order, first factor most significant.
    std::vector<int> stride(d, 1);
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
    auto coord = [&](int x, int i) { return (x / stride[i]) % dims[i]; };

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd pi = Eigen::VectorXd::Ones(n);
    std::vector<std::string> states(n);
    for (int x = 0; x < n; ++x) {
        for (int i = 0; i < d; ++i) {
            const int xi = coord(x, i);
            pi(x) *= chains[i].pi()(xi);
            if (i) states[x] += ",";
            states[x] += chains[i].states()[xi];
            k(x, x) += alpha[i] * chains[i].kernel()(xi, xi);
            for (int yi = 0; yi < dims[i]; ++yi) {
                if (yi == xi) continue;
                k(x, x + (yi - xi) * stride[i]) += alpha[i] * chains[i].kernel()(xi, yi);
            }
        }
    }
    Construction how;
    how.kind = Construction::Kind::Product;
    how.params = alpha;
    std::ostringstream label;
    label << "product(";
    for (int i = 0; i < d; ++i) {
        how.parts.push_back(std::make_shared<const MarkovChain>(chains[i]));
        label << (i ? ";" : "") << chains[i].construction().label;
    }
    label << ")";
    how.label = label.str();
    return validate_chain(k, pi, std::move(states), {}, how);
}

Eigen::MatrixXi graph_distance(const MarkovChain& chain) {
    const int n = chain.size();
    std::vector<std::vector<int>> adj(n);
    for (const Edge& e : chain.edges()) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, -1);
    for (int s = 0; s < n; ++s) {
        std::queue<int> q;
        q.push(s);
        dist(s, s) = 0;
        while (!q.empty()) {
            const int x = q.front();
            q.pop();
            for (int y : adj[x])
                if (dist(s, y) < 0) {
                    dist(s, y) = dist(s, x) + 1;
                    q.push(y);
                }
        }
    }
    return dist;
}

int graph_diameter(const MarkovChain& chain) { return graph_distance(chain).maxCoeff(); }

MarkovChain chain_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::BadSpec, std::string("invalid chain JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kernel") || !j["kernel"].is_array())
        fail(ErrorCode::BadSpec, "chain JSON needs a 'kernel' array");
    try {
        const auto& rows = j["kernel"];
        const int n = static_cast<int>(rows.size());
        Eigen::MatrixXd k(n, n);
        for (int x = 0; x < n; ++x) {
            if (!rows[x].is_array() || static_cast<int>(rows[x].size()) != n)
                fail(ErrorCode::ShapeMismatch, "kernel must be square");
            for (int y = 0; y < n; ++y) k(x, y) = rows[x][y].get<double>();
        }
        std::vector<std::string> states;
        if (j.contains("states"))
            for (const auto& s : j["states"]) states.push_back(s.is_string() ? s.get<std::string>() : s.dump());
        std::optional<Eigen::VectorXd> pi;
        if (j.contains("pi") && !j["pi"].is_null()) {
            const auto& pj = j["pi"];
            Eigen::VectorXd p(pj.size());
            for (std::size_t i = 0; i < pj.size(); ++i) p(i) = pj[i].get<double>();
            pi = p;
        }
        return validate_chain(k, pi, std::move(states), {}, {Construction::Kind::Custom, {}, {}, "custom"});
    } catch (const json::exception& e) {
        fail(ErrorCode::BadSpec, std::string("invalid chain JSON: ") + e.what());
    }
}

std::string chain_to_json(const MarkovChain& chain) {
    json j;
    j["states"] = chain.states();
    json rows = json::array();
    for (int x = 0; x < chain.size(); ++x) {
        json row = json::array();
        for (int y = 0; y < chain.size(); ++y) row.push_back(chain.kernel()(x, y));
        rows.push_back(row);
    }
    j["kernel"] = rows;
    j["pi"] = std::vector<double>(chain.pi().data(), chain.pi().data() + chain.size());
    return j.dump();
}

Density uniform_density(const MarkovChain& chain) { return Density::Ones(chain.size()); }

Density dirac_density(const MarkovChain& chain, int state) {
    if (state < 0 || state >= chain.size()) fail(ErrorCode::InvalidArgument, "state index out of range");
    Density rho = Density::Zero(chain.size());
    rho(state) = 1.0 / chain.pi()(state);
    return rho;
}

void check_density(const MarkovChain& chain, const Density& rho, double tol) {
    if (rho.size() != chain.size()) fail(ErrorCode::ShapeMismatch, "density length differs from state count");
    for (int i = 0; i < rho.size(); ++i)
        if (!std::isfinite(rho(i)) || rho(i) < 0.0)
            fail(ErrorCode::InvalidDensity, "density entry " + std::to_string(i) + " is negative or not finite");
    const double mass = chain.pi().dot(rho);
    if (std::abs(mass - 1.0) > tol)
        fail(ErrorCode::InvalidDensity, "density has pi-mass " + std::to_string(mass));
}

Density parse_density(const MarkovChain& chain, std::string_view text) {
    if (text == "uniform") return uniform_density(chain);
    if (text.substr(0, 6) == "dirac:") {
        const auto idx = chain.find_state(text.substr(6));
        if (!idx) fail(ErrorCode::InvalidDensity, "unknown state '" + std::string(text.substr(6)) + "'");
        return dirac_density(chain, *idx);
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception&) {
        fail(ErrorCode::InvalidDensity, "expected uniform, dirac:<state> or a JSON array");
    }
    if (j.is_object() && j.contains("density")) j = j["density"];
    if (!j.is_array()) fail(ErrorCode::InvalidDensity, "density JSON must be an array");
    Density rho(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(ErrorCode::InvalidDensity, "density entries must be numbers");
        rho(i) = j[i].get<double>();
    }
    check_density(chain, rho);
    return rho;
}

MappingRepresentation transposition_representation(const MarkovChain& chain) {
    const int n = chain.size();
    MappingRepresentation rep;
    rep.n_states = n;
    const auto& edges = chain.edges();
    rep.rates = Eigen::MatrixXd::Zero(n, static_cast<int>(edges.size()));
    for (std::size_t d = 0; d < edges.size(); ++d) {
        const Edge& e = edges[d];
        std::vector<int> m(n);
        for (int x = 0; x < n; ++x) m[x] = x;
        std::swap(m[e.a], m[e.b]);
        rep.moves.push_back(std::move(m));
        rep.inverse.push_back(static_cast<int>(d));
        rep.names.push_back("t(" + chain.states()[e.a] + "," + chain.states()[e.b] + ")");
        rep.rates(e.a, d) = e.kab;
        rep.rates(e.b, d) = e.kba;
    }
    return rep;
}

namespace {

MappingRepresentation cycle_representation(int n) {
    MappingRepresentation rep;
    rep.n_states = n;
    rep.names = {"+", "-"};
    rep.moves.assign(2, std::vector<int>(n));
    for (int m = 0; m < n; ++m) {
        rep.moves[0][m] = (m + 1) % n;
        rep.moves[1][m] = (m + n - 1) % n;
    }
    rep.inverse = {1, 0};
    rep.rates = Eigen::MatrixXd::Constant(n, 2, 0.5);
    return rep;
}

MappingRepresentation product_representation(const std::vector<MappingRepresentation>& reps,
                                             const std::vector<double>& alpha) {
    const int d = static_cast<int>(reps.size());
    std::vector<int> dims(d), stride(d, 1);
    int n = 1;
    for (int i = 0; i < d; ++i) {
        dims[i] = reps[i].n_states;
        n *= dims[i];
    }
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
    MappingRepresentation out;
    out.n_states = n;
    int total = 0;
    for (const auto& r : reps) total += r.size();
    out.rates = Eigen::MatrixXd::Zero(n, total);
    int offset = 0;
    for (int i = 0; i < d; ++i) {
        for (int m = 0; m < reps[i].size(); ++m) {
            std::vector<int> map(n);
            for (int x = 0; x < n; ++x) {
                const int xi = (x / stride[i]) % dims[i];
                map[x] = x + (reps[i].moves[m][xi] - xi) * stride[i];
                out.rates(x, offset + m) = alpha[i] * reps[i].rates(xi, m);
            }
            out.moves.push_back(std::move(map));
            out.inverse.push_back(offset + reps[i].inverse[m]);
            out.names.push_back(std::to_string(i) + ":" + reps[i].names[m]);
        }
        offset += reps[i].size();
    }
    return out;
}

}  // namespace

std::optional<MappingRepresentation> natural_representation(const MarkovChain& chain) {
    const Construction& how = chain.construction();
    switch (how.kind) {
        case Construction::Kind::Cycle:
            return cycle_representation(chain.size());
        case Construction::Kind::Hypercube: {
            const int d = static_cast<int>(how.params[0]);
            const int n = chain.size();
            MappingRepresentation rep;
            rep.n_states = n;
            rep.rates = Eigen::MatrixXd::Constant(n, d, 1.0 / d);
            for (int i = 0; i < d; ++i) {
                std::vector<int> m(n);
                for (int x = 0; x < n; ++x) m[x] = x ^ (1 << (d - 1 - i));
                rep.moves.push_back(std::move(m));
                rep.inverse.push_back(i);
                rep.names.push_back("flip" + std::to_string(i));
            }
            return rep;
        }
        case Construction::Kind::TwoPoint: {
            MappingRepresentation rep;
            rep.n_states = 2;
            rep.names = {"swap"};
            rep.moves = {{1, 0}};
            rep.inverse = {0};
            rep.rates = Eigen::MatrixXd(2, 1);
            rep.rates << how.params[0], how.params[1];
            return rep;
        }
        case Construction::Kind::Torus:
        case Construction::Kind::Product: {
            std::vector<MappingRepresentation> reps;
            for (const auto& part : how.parts) {
                auto r = natural_representation(*part);
                reps.push_back(r ? *r : transposition_representation(*part));
            }
            std::vector<double> alpha = how.kind == Construction::Kind::Product
                                            ? how.params
                                            : std::vector<double>(how.parts.size(), 1.0 / how.parts.size());
            return product_representation(reps, alpha);
        }
        case Construction::Kind::Lazy: {
            auto r = natural_representation(*how.parts[0]);
            if (!r) return std::nullopt;
            r->rates *= how.params[0];
            return r;
        }
        default:
            return std::nullopt;
    }
}

void validate_representation(const MarkovChain& chain, const MappingRepresentation& rep, double tol) {
    const int n = chain.size();
    const int m = rep.size();
    if (rep.n_states != n || rep.rates.rows() != n || rep.rates.cols() != m || static_cast<int>(rep.inverse.size()) != m)
        fail(ErrorCode::ShapeMismatch, "representation shape differs from chain");
    for (int d = 0; d < m; ++d) {
        if (static_cast<int>(rep.moves[d].size()) != n) fail(ErrorCode::ShapeMismatch, "move of wrong length");
        if (rep.inverse[d] < 0 || rep.inverse[d] >= m) fail(ErrorCode::NoInverse, "move " + rep.names[d] + " names no inverse");
        for (int x = 0; x < n; ++x) {
            if (rep.moves[d][x] < 0 || rep.moves[d][x] >= n) fail(ErrorCode::ShapeMismatch, "move leaves the state set");
            if (rep.rates(x, d) < 0.0) fail(ErrorCode::GeneratorMismatch, "negative rate");
        }
    }
    // Generator identity on the standard basis: off-diagonal rates must reproduce K.
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
    for (int d = 0; d < m; ++d)
        for (int x = 0; x < n; ++x)
            if (rep.moves[d][x] != x) gen(x, rep.moves[d][x]) += rep.rates(x, d);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (x != y && std::abs(gen(x, y) - chain.kernel()(x, y)) > tol)
                fail(ErrorCode::GeneratorMismatch,
                     "rates do not reproduce K(" + std::to_string(x) + "," + std::to_string(y) + ")");
    for (int d = 0; d < m; ++d) {
        const auto& inv = rep.moves[rep.inverse[d]];
        for (int x = 0; x < n; ++x)
            if (rep.rates(x, d) > 0.0 && inv[rep.moves[d][x]] != x)
                fail(ErrorCode::NoInverse, "declared inverse of " + rep.names[d] + " does not undo it");
    }
    // Summation identity tested on indicator functions F = 1_{(y,eta)}:
    // c(y,eta) pi(y) = sum over (x,delta) with delta x = y, delta^{-1} = eta of c(x,delta) pi(x).
    Eigen::MatrixXd pushed = Eigen::MatrixXd::Zero(n, m);
    for (int d = 0; d < m; ++d)
        for (int x = 0; x < n; ++x) pushed(rep.moves[d][x], rep.inverse[d]) += rep.rates(x, d) * chain.pi()(x);
    for (int y = 0; y < n; ++y)
        for (int e = 0; e < m; ++e)
            if (std::abs(pushed(y, e) - rep.rates(y, e) * chain.pi()(y)) > tol)
                fail(ErrorCode::ReversibilityFail, "summation identity fails at move " + rep.names[e]);
}

MappingRepresentation mapping_representation(const MarkovChain& chain,
                                             const std::optional<MappingRepresentation>& custom) {
    std::optional<MappingRepresentation> natural;
    if (!custom) natural = natural_representation(chain);
    MappingRepresentation rep = custom ? *custom : natural ? *natural : transposition_representation(chain);
    validate_representation(chain, rep);
    return rep;
}

}  // namespace ricci
