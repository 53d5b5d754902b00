#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ricci {

/// Real function on the state space (a potential, a test function, ...).
using Potential = Eigen::VectorXd;

/// One directed transition x -> to with rate Q(x, to) > 0.
struct Arc {
    int to = 0;
    double rate = 0.0;
    double conductance = 0.0;  // c(x, to) = Q(x, to) pi(x), symmetric under reversal
};

/// Unordered edge {u, v} with u < v, plus the indices of both arcs.
struct Edge {
    int u = 0;
    int v = 0;
    std::size_t arc_uv = 0;
    std::size_t arc_vu = 0;
};

/// Input rate entry for build_triple.
struct RateEntry {
    int from = 0;
    int to = 0;
    double rate = 0.0;
};

struct BuildOptions {
    double balance_tolerance = 1e-12;        // relative
    double normalization_tolerance = 1e-12;  // |sum pi - 1|
};

enum class ViolationKind {
    Malformed,          // indices out of range, negative rates, bad sizes
    SelfLoop,
    DuplicateRate,      // two entries for the same ordered pair
    NonPositiveWeight,
    NotNormalized,
    DetailedBalance,
    Reducible,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

/// Thrown by build_triple; carries every violation found, not just the first.
class TripleValidationError : public std::runtime_error {
public:
    explicit TripleValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }
    bool has(ViolationKind kind) const noexcept;

private:
    std::vector<Violation> violations_;
};

/// A finite reversible Markov chain (states, rates Q, stationary weights pi).
/// Immutable once built. Rates are stored in compressed rows sorted by target,
/// so arc indices give a stable layout for edge functions.
class MarkovTriple {
public:
    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    double weight(int x) const { return weights_[x]; }

    std::span<const Arc> out(int x) const {
        return {arcs_.data() + offsets_[x], arcs_.data() + offsets_[x + 1]};
    }
    std::size_t arc_offset(int x) const { return offsets_[x]; }
    std::size_t arc_count() const noexcept { return arcs_.size(); }
    const Arc& arc(std::size_t index) const { return arcs_[index]; }
    /// Source vertex of an arc.
    int arc_source(std::size_t index) const { return sources_[index]; }

    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t degree(int x) const { return offsets_[x + 1] - offsets_[x]; }

    /// Q(x, y); zero when y is not a neighbour (or y == x).
    double rate(int x, int y) const;
    /// Arc index of x -> y, or npos.
    std::size_t find_arc(int x, int y) const;
    bool adjacent(int x, int y) const { return find_arc(x, y) != npos; }
    /// Total jump rate out of x.
    double exit_rate(int x) const { return exit_rates_[x]; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    friend MarkovTriple build_triple(std::vector<std::string>, std::vector<RateEntry>,
                                     std::vector<double>, const BuildOptions&);

    std::vector<std::string> labels_;
    Eigen::VectorXd weights_;
    std::vector<std::size_t> offsets_;
    std::vector<Arc> arcs_;
    std::vector<int> sources_;
    std::vector<Edge> edges_;
    std::vector<double> exit_rates_;
};

/// Validates and assembles a triple. Zero-rate entries are dropped.
/// Throws TripleValidationError listing every violation.
MarkovTriple build_triple(std::vector<std::string> labels, std::vector<RateEntry> rates,
                          std::vector<double> weights, const BuildOptions& options = {});

/// Probability density with respect to pi (pi-weighted mean one).
class Density {
public:
    /// Checks nonnegativity and normalization (tolerance 1e-12 relative).
    Density(const MarkovTriple& t, Eigen::VectorXd values);
    /// Rescales a nonnegative, nonzero vector to unit pi-mean.
    static Density normalized(const MarkovTriple& t, Eigen::VectorXd raw);
    /// The constant density 1.
    static Density uniform(const MarkovTriple& t);

    const Eigen::VectorXd& values() const noexcept { return values_; }
    double operator[](int x) const { return values_[x]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    /// True when every entry is strictly positive.
    bool strict() const noexcept { return strict_; }

private:
    Density(Eigen::VectorXd values, bool strict) : values_(std::move(values)), strict_(strict) {}
    Eigen::VectorXd values_;
    bool strict_ = false;
};

/// Function on arcs, aligned with MarkovTriple arc indices.
struct EdgeFunction {
    Eigen::VectorXd values;
};

// ---------------------------------------------------------------------------
// Discrete calculus

/// (L f)(x) = sum_y Q(x,y) (f(y) - f(x)).
Potential generator_apply(const MarkovTriple& t, const Potential& f);
/// grad f(x, y) = f(y) - f(x) on every arc.
EdgeFunction gradient(const MarkovTriple& t, const Potential& f);
/// (div Psi)(x) = 1/2 sum_y (Psi(x,y) - Psi(y,x)) Q(x,y).
Potential divergence(const MarkovTriple& t, const EdgeFunction& psi);

/// <f, g>_pi = sum_x f g pi.
double inner(const MarkovTriple& t, const Potential& f, const Potential& g);
/// <F, G>_pi = 1/2 sum_{x,y} F G Q(x,y) pi(x).
double inner(const MarkovTriple& t, const EdgeFunction& f, const EdgeFunction& g);

/// Dirichlet form E(f, g) = -<f, L g>_pi.
double dirichlet(const MarkovTriple& t, const Potential& f, const Potential& g);

/// Relative entropy sum_x pi rho log rho (0 log 0 = 0).
double entropy(const MarkovTriple& t, const Density& rho);

/// Dense -L as an N x N matrix (row x: -(Lf)(x) coefficients).
Eigen::MatrixXd generator_matrix(const MarkovTriple& t);

/// Symmetrised operator pi^{1/2} (-L) pi^{-1/2}; symmetric for reversible chains.
Eigen::MatrixXd symmetrized_generator(const MarkovTriple& t);

struct SemigroupOptions {
    std::size_t dense_limit = 1000;  // use the spectral route up to this many states
    double ode_tolerance = 1e-12;    // adaptive integrator tolerance above it
};

/// Evolves densities under e^{tL}. Holds the spectral decomposition so repeated
/// evaluations on one chain are cheap.
class HeatSemigroup {
public:
    explicit HeatSemigroup(const MarkovTriple& t, SemigroupOptions options = {});
    Density apply(const Density& rho0, double time) const;
    bool spectral() const noexcept { return spectral_; }

private:
    const MarkovTriple* triple_;
    SemigroupOptions options_;
    bool spectral_ = false;
    Eigen::VectorXd sqrt_pi_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

/// e^{time L} rho0.
Density heat_semigroup(const MarkovTriple& t, const Density& rho0, double time,
                       const SemigroupOptions& options = {});

/// Smallest nonzero eigenvalue of -L in L^2(pi).
double spectral_gap(const MarkovTriple& t);

/// Full spectrum of -L, ascending.
Eigen::VectorXd generator_spectrum(const MarkovTriple& t);

}  // namespace ricci
