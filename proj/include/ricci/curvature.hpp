#pragma once

#include "ricci/markov.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

// The quadratic forms A(rho, psi) and B(rho, psi) whose ratio bounds the
// entropic Ricci curvature, and their decomposition into edge-pair terms.
//
// rho is any strictly positive vertex function (normalization is irrelevant:
// both forms are homogeneous of degree one in rho); psi is any potential.

namespace ricci {

/// Unordered edge {u, v}, u < v.
struct EdgeKey {
    int u = 0;
    int v = 0;
    friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

EdgeKey make_edge_key(int a, int b);

/// One summand b(e, e') of B. For e != e' the edges share `shared`; for the
/// diagonal term e == e' and `shared` is -1.
struct EdgePairTerm {
    EdgeKey first;
    EdgeKey second;
    int shared = -1;
    double value = 0.0;
    bool diagonal() const noexcept { return first == second; }
};

enum class SubgraphKind { Triangle, Square };

/// A triangle or square: an ordered cycle of 3 or 4 distinct, consecutively
/// adjacent states. Construct through make_subgraph, which validates.
struct SubgraphPattern {
    SubgraphKind kind = SubgraphKind::Triangle;
    std::vector<int> cycle;

    std::vector<EdgeKey> edges() const;
};

/// Throws std::invalid_argument when the cycle is not a subgraph of t.
SubgraphPattern make_subgraph(const MarkovTriple& t, SubgraphKind kind, std::vector<int> cycle);

enum class FormPart { On, Off, All };

struct FormValue {
    double a = 0.0;
    double b_total = 0.0;
    double b_on = 0.0;
    double b_off = 0.0;
};

/// A(rho, psi) = <rho_hat grad psi, grad psi>_pi.
double a_form(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi);

/// A as the edge sum  sum_e a(e) c(e).
double a_edge_sum(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi);

/// B from its operator definition
///   1/2 <L_hat rho . grad psi, grad psi>_pi - <rho_hat . grad psi, grad L psi>_pi.
double b_form_direct(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi);

/// Every edge-pair term b(e, e'): one diagonal term per edge and one term per
/// ordered pair of distinct adjacent edges.
std::vector<EdgePairTerm> b_edge_terms(const MarkovTriple& t, const Eigen::VectorXd& rho,
                                       const Potential& psi);

/// b(e, e) for e = {x, y}.
double b_diagonal(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi, int x, int y);

/// b(e, e') for e = {x, y}, e' = {x, z}, y != z.
double b_off_diagonal(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi, int x,
                      int y, int z);

/// A, B (direct) and the on/off split of the edge sum.
FormValue b_decomposition(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi);

/// A restricted to an edge set.
double a_on_edges(const MarkovTriple& t, std::span<const EdgeKey> edges, const Eigen::VectorXd& rho,
                  const Potential& psi);

/// B restricted to an edge set: the diagonal terms, the ordered pairs of
/// distinct adjacent edges within the set, or both.
double b_on_edges(const MarkovTriple& t, std::span<const EdgeKey> edges, const Eigen::VectorXd& rho,
                  const Potential& psi, FormPart part);

double a_subgraph(const MarkovTriple& t, const SubgraphPattern& g, const Eigen::VectorXd& rho,
                  const Potential& psi);
double b_subgraph(const MarkovTriple& t, const SubgraphPattern& g, const Eigen::VectorXd& rho,
                  const Potential& psi, FormPart part);

struct SquareIdentity {
    double alternating = 0.0;  // mu q^2 / 2 |AS|^2 sum_i rho_hat(x_i, x_{i+1})
    double deficit = 0.0;      // mu q^2 / 2 sum_i (psi(x_{i+1}) - psi(x_i))^2 D(...)
    double total = 0.0;
};

/// Nonnegative split of the off-diagonal part of B on a square. Requires a
/// regular chain with uniform pi and a single rate q (q = 1/d for the simple
/// random walk); throws UnsupportedModel otherwise.
SquareIdentity square_identity(const MarkovTriple& t, const SubgraphPattern& square,
                               const Eigen::VectorXd& rho, const Potential& psi);

/// |psi(x1) - psi(x2) + psi(x3) - psi(x4)|.
double alternating_sum(const SubgraphPattern& square, const Potential& psi);

class UnsupportedModel : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Uniform structure needed by the subgraph bounds.
struct RegularStructure {
    bool regular = false;        // every vertex has the same degree
    bool uniform_weights = false;
    bool uniform_rate = false;   // every arc carries the same rate
    std::size_t degree = 0;
    double rate = 0.0;
    double weight = 0.0;
    bool simple_random_walk() const noexcept {
        return regular && uniform_weights && uniform_rate;
    }
};

RegularStructure regular_structure(const MarkovTriple& t, double tolerance = 1e-12);

/// Matrices MA, MB with A(rho, psi) = psi^T MA psi and B(rho, psi) = psi^T MB psi.
struct BochnerMatrices {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
};

BochnerMatrices bochner_matrices(const MarkovTriple& t, const Eigen::VectorXd& rho);

/// Throws std::domain_error unless every entry is >= 1e-300 and finite.
void require_strict(const MarkovTriple& t, const Eigen::VectorXd& rho, const char* where);

}  // namespace ricci
