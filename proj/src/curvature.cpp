#include "ricci/curvature.hpp"

#include "ricci/logmean.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace ricci {

namespace lm = logmean;

namespace {
constexpr double kStrictFloor = 1e-300;
}

void require_strict(const MarkovTriple& t, const Eigen::VectorXd& rho, const char* where) {
    if (static_cast<std::size_t>(rho.size()) != t.size()) {
        throw std::invalid_argument(std::string(where) + ": density size does not match state space");
    }
    for (Eigen::Index x = 0; x < rho.size(); ++x) {
        if (!(rho[x] >= kStrictFloor) || !std::isfinite(rho[x])) {
            throw std::domain_error(std::string(where) + ": density must be strictly positive (rho(" +
                                    std::to_string(x) + ") = " + std::to_string(rho[x]) + ")");
        }
    }
}

namespace {

void require_potential(const MarkovTriple& t, const Potential& psi, const char* where) {
    if (static_cast<std::size_t>(psi.size()) != t.size()) {
        throw std::invalid_argument(std::string(where) + ": potential size does not match state space");
    }
}

double sq(double v) { return v * v; }

}  // namespace

EdgeKey make_edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::vector<EdgeKey> SubgraphPattern::edges() const {
    std::vector<EdgeKey> out;
    out.reserve(cycle.size());
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        out.push_back(make_edge_key(cycle[i], cycle[(i + 1) % cycle.size()]));
    }
    return out;
}

SubgraphPattern make_subgraph(const MarkovTriple& t, SubgraphKind kind, std::vector<int> cycle) {
    const std::size_t expected = kind == SubgraphKind::Triangle ? 3 : 4;
    if (cycle.size() != expected) {
        throw std::invalid_argument("invalid subgraph: expected " + std::to_string(expected) + " vertices");
    }
    std::set<int> distinct(cycle.begin(), cycle.end());
    if (distinct.size() != cycle.size()) {
        throw std::invalid_argument("invalid subgraph: vertices are not distinct");
    }
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const int a = cycle[i];
        const int b = cycle[(i + 1) % cycle.size()];
        if (a < 0 || static_cast<std::size_t>(a) >= t.size() || !t.adjacent(a, b)) {
            throw std::invalid_argument("invalid subgraph: " + std::to_string(a) + " and " +
                                        std::to_string(b) + " are not adjacent");
        }
    }
    return SubgraphPattern{kind, std::move(cycle)};
}

// ---------------------------------------------------------------------------

double a_form(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi) {
    require_strict(t, rho, "a_form");
    require_potential(t, psi, "a_form");
    const EdgeFunction g = gradient(t, psi);
    EdgeFunction weighted = g;
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        weighted.values[i] *= lm::theta(rho[t.arc_source(i)], rho[t.arc(i).to]);
    }
    return inner(t, weighted, g);
}

double a_edge_sum(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi) {
    require_strict(t, rho, "a_edge_sum");
    require_potential(t, psi, "a_edge_sum");
    double acc = 0.0;
    for (const Edge& e : t.edges()) {
        acc += sq(psi[e.v] - psi[e.u]) * lm::theta(rho[e.u], rho[e.v]) * t.arc(e.arc_uv).conductance;
    }
    return acc;
}

double b_form_direct(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi) {
    require_strict(t, rho, "b_form_direct");
    require_potential(t, psi, "b_form_direct");
    const Potential l_rho = generator_apply(t, rho);
    const EdgeFunction grad_psi = gradient(t, psi);
    const EdgeFunction grad_l_psi = gradient(t, generator_apply(t, psi));

    EdgeFunction l_hat_grad = grad_psi;
    EdgeFunction rho_hat_grad = grad_psi;
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        const int x = t.arc_source(i);
        const int y = t.arc(i).to;
        const auto p = lm::theta_partials(rho[x], rho[y]);
        l_hat_grad.values[i] *= p.d1 * l_rho[x] + p.d2 * l_rho[y];
        rho_hat_grad.values[i] *= lm::theta(rho[x], rho[y]);
    }
    return 0.5 * inner(t, l_hat_grad, grad_psi) - inner(t, rho_hat_grad, grad_l_psi);
}

double b_diagonal(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi, int x, int y) {
    const double qxy = t.rate(x, y);
    const double qyx = t.rate(y, x);
    const double c = qxy * t.weight(x);
    const auto p = lm::theta_partials(rho[x], rho[y]);
    const double th = lm::theta(rho[x], rho[y]);
    return 0.5 * sq(psi[x] - psi[y]) *
           (2.0 * th * (qxy + qyx) + p.d1 * (rho[y] - rho[x]) * qxy + p.d2 * (rho[x] - rho[y]) * qyx) * c;
}

double b_off_diagonal(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi, int x,
                      int y, int z) {
    const double c = t.rate(x, y) * t.weight(x);
    const double qxz = t.rate(x, z);
    const auto p = lm::theta_partials(rho[x], rho[y]);
    const double th = lm::theta(rho[x], rho[y]);
    return (0.5 * sq(psi[x] - psi[y]) * p.d1 * (rho[z] - rho[x]) + (psi[y] - psi[x]) * (psi[z] - psi[x]) * th) *
           qxz * c;
}

std::vector<EdgePairTerm> b_edge_terms(const MarkovTriple& t, const Eigen::VectorXd& rho,
                                       const Potential& psi) {
    require_strict(t, rho, "b_edge_terms");
    require_potential(t, psi, "b_edge_terms");
    std::vector<EdgePairTerm> terms;
    for (const Edge& e : t.edges()) {
        const EdgeKey key{e.u, e.v};
        terms.push_back({key, key, -1, b_diagonal(t, rho, psi, e.u, e.v)});
    }
    for (std::size_t xi = 0; xi < t.size(); ++xi) {
        const int x = static_cast<int>(xi);
        for (const Arc& ay : t.out(x)) {
            for (const Arc& az : t.out(x)) {
                if (ay.to == az.to) {
                    continue;
                }
                terms.push_back({make_edge_key(x, ay.to), make_edge_key(x, az.to), x,
                                 b_off_diagonal(t, rho, psi, x, ay.to, az.to)});
            }
        }
    }
    return terms;
}

FormValue b_decomposition(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi) {
    FormValue out;
    out.a = a_form(t, rho, psi);
    out.b_total = b_form_direct(t, rho, psi);
    for (const auto& term : b_edge_terms(t, rho, psi)) {
        (term.diagonal() ? out.b_on : out.b_off) += term.value;
    }
    return out;
}

// ---------------------------------------------------------------------------

double a_on_edges(const MarkovTriple& t, std::span<const EdgeKey> edges, const Eigen::VectorXd& rho,
                  const Potential& psi) {
    require_strict(t, rho, "a_on_edges");
    require_potential(t, psi, "a_on_edges");
    double acc = 0.0;
    for (const EdgeKey& e : edges) {
        const std::size_t arc = t.find_arc(e.u, e.v);
        if (arc == MarkovTriple::npos) {
            throw std::invalid_argument("a_on_edges: edge is not in the support graph");
        }
        acc += sq(psi[e.v] - psi[e.u]) * lm::theta(rho[e.u], rho[e.v]) * t.arc(arc).conductance;
    }
    return acc;
}

double b_on_edges(const MarkovTriple& t, std::span<const EdgeKey> edges, const Eigen::VectorXd& rho,
                  const Potential& psi, FormPart part) {
    require_strict(t, rho, "b_on_edges");
    require_potential(t, psi, "b_on_edges");
    std::set<EdgeKey> unique(edges.begin(), edges.end());
    double acc = 0.0;
    std::map<int, std::vector<int>> incident;  // vertex -> other endpoints within the edge set
    for (const EdgeKey& e : unique) {
        if (!t.adjacent(e.u, e.v)) {
            throw std::invalid_argument("b_on_edges: edge is not in the support graph");
        }
        if (part != FormPart::Off) {
            acc += b_diagonal(t, rho, psi, e.u, e.v);
        }
        incident[e.u].push_back(e.v);
        incident[e.v].push_back(e.u);
    }
    if (part != FormPart::On) {
        for (const auto& [x, ends] : incident) {
            for (int y : ends) {
                for (int z : ends) {
                    if (y != z) {
                        acc += b_off_diagonal(t, rho, psi, x, y, z);
                    }
                }
            }
        }
    }
    return acc;
}

double a_subgraph(const MarkovTriple& t, const SubgraphPattern& g, const Eigen::VectorXd& rho,
                  const Potential& psi) {
    const auto edges = g.edges();
    return a_on_edges(t, edges, rho, psi);
}

double b_subgraph(const MarkovTriple& t, const SubgraphPattern& g, const Eigen::VectorXd& rho,
                  const Potential& psi, FormPart part) {
    // Re-validate: patterns may be assembled by hand.
    (void)make_subgraph(t, g.kind, g.cycle);
    const auto edges = g.edges();
    return b_on_edges(t, edges, rho, psi, part);
}

// ---------------------------------------------------------------------------

RegularStructure regular_structure(const MarkovTriple& t, double tolerance) {
    RegularStructure s;
    s.degree = t.degree(0);
    s.weight = t.weight(0);
    s.rate = t.arc_count() > 0 ? t.arc(0).rate : 0.0;
    s.regular = true;
    s.uniform_weights = true;
    s.uniform_rate = t.arc_count() > 0;
    for (std::size_t x = 0; x < t.size(); ++x) {
        const int xi = static_cast<int>(x);
        s.regular = s.regular && t.degree(xi) == s.degree;
        s.uniform_weights = s.uniform_weights && std::abs(t.weight(xi) - s.weight) <= tolerance * s.weight;
    }
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        s.uniform_rate = s.uniform_rate && std::abs(t.arc(i).rate - s.rate) <= tolerance * s.rate;
    }
    return s;
}

double alternating_sum(const SubgraphPattern& square, const Potential& psi) {
    if (square.kind != SubgraphKind::Square) {
        throw std::invalid_argument("alternating_sum: pattern is not a square");
    }
    const auto& c = square.cycle;
    return std::abs(psi[c[0]] - psi[c[1]] + psi[c[2]] - psi[c[3]]);
}

SquareIdentity square_identity(const MarkovTriple& t, const SubgraphPattern& square,
                               const Eigen::VectorXd& rho, const Potential& psi) {
    if (square.kind != SubgraphKind::Square) {
        throw std::invalid_argument("square_identity: pattern is not a square");
    }
    (void)make_subgraph(t, square.kind, square.cycle);
    require_strict(t, rho, "square_identity");
    require_potential(t, psi, "square_identity");
    const RegularStructure s = regular_structure(t);
    if (!s.simple_random_walk()) {
        throw UnsupportedModel(
            "square_identity: requires a regular chain with uniform weights and a single rate");
    }
    const double coeff = 0.5 * s.weight * s.rate * s.rate;
    const auto& c = square.cycle;
    auto at = [&](int i) { return c[static_cast<std::size_t>((i % 4 + 4) % 4)]; };

    const double as = alternating_sum(square, psi);
    double theta_sum = 0.0;
    double deficit_sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        const int xi = at(i);
        const int xn = at(i + 1);
        theta_sum += lm::theta(rho[xi], rho[xn]);
        deficit_sum += sq(psi[xn] - psi[xi]) * lm::deficit(rho[xi], rho[xn], rho[at(i - 1)], rho[at(i + 2)]);
    }
    SquareIdentity out;
    out.alternating = coeff * as * as * theta_sum;
    out.deficit = coeff * deficit_sum;
    out.total = out.alternating + out.deficit;
    return out;
}

// ---------------------------------------------------------------------------

BochnerMatrices bochner_matrices(const MarkovTriple& t, const Eigen::VectorXd& rho) {
    require_strict(t, rho, "bochner_matrices");
    const auto n = static_cast<Eigen::Index>(t.size());
    BochnerMatrices m{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    const Potential l_rho = generator_apply(t, rho);

    for (const Edge& e : t.edges()) {
        const double w = lm::theta(rho[e.u], rho[e.v]) * t.arc(e.arc_uv).conductance;
        m.a(e.u, e.u) += w;
        m.a(e.v, e.v) += w;
        m.a(e.u, e.v) -= w;
        m.a(e.v, e.u) -= w;
    }

    // B = sum over arcs (x,y) of c(x,y) [ 1/2 g^2 d1theta Lrho(x) + g theta (L psi)(x) ],
    // g = psi(y) - psi(x).
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        const int x = t.arc_source(i);
        const int y = t.arc(i).to;
        const double c = t.arc(i).conductance;
        const auto p = lm::theta_partials(rho[x], rho[y]);
        const double alpha = 0.5 * c * p.d1 * l_rho[x];
        m.b(x, x) += alpha;
        m.b(y, y) += alpha;
        m.b(x, y) -= alpha;
        m.b(y, x) -= alpha;

        // beta * (e_y - e_x) l_x^T, symmetrised; l_x is row x of L.
        const double beta = 0.5 * c * lm::theta(rho[x], rho[y]);
        auto add_sym = [&](Eigen::Index u, Eigen::Index v, double value) {
            m.b(u, v) += value;
            m.b(v, u) += value;
        };
        for (const Arc& az : t.out(x)) {
            add_sym(y, az.to, beta * az.rate);
            add_sym(x, az.to, -beta * az.rate);
        }
        add_sym(y, x, -beta * t.exit_rate(x));
        add_sym(x, x, beta * t.exit_rate(x));
    }
    return m;
}

}  // namespace ricci
