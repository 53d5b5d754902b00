#pragma once

#include "ricci/markov.hpp"
#include "ricci/rational.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Curvature lower bounds (exact, from the triangle/square decomposition of B),
// numerical estimates of kappa = inf B/A, and the functional inequality report.

namespace ricci {

/// A combinatorial fact checked by enumeration while certifying.
/// Facts with required == false are recorded but not used by the bound.
struct CertificateFact {
    std::string name;
    bool holds = false;
    bool required = true;
    std::string detail;
};

struct Certificate {
    std::string model;
    Rational kappa;
    Rational on_diagonal;  // 2q from the diagonal terms
    Rational triangles;    // q tau / 2
    Rational squares;      // squares only ever add a nonnegative amount
    std::int64_t degree = 0;
    Rational rate;         // uniform jump rate q (1/d for simple random walk)
    std::int64_t triangles_per_edge = 0;
    bool enumerated = false;  // facts were checked on the actual graph
    std::vector<CertificateFact> facts;

    bool all_facts_hold() const;
};

/// Counting facts behind a certificate contradict the enumeration, or the
/// chain is outside what the decomposition can handle.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kEnumerateBlUpTo = 6;
inline constexpr int kEnumerateRtUpTo = 4;

/// kappa >= (n+2) / (2k(n-k)) for the Bernoulli-Laplace walk.
Certificate certify_bl(int n, int k);
/// kappa >= 4 / (n(n-1)) for the random transposition walk.
Certificate certify_rt(int n);
/// kappa >= q (2 + tau/2) for a regular chain with uniform pi and uniform rate q,
/// tau the least number of triangles through an edge. Every pair of adjacent
/// edges whose far ends are not joined must lie in a chordless square, and all
/// eight corner pairs of such a square must have the same square multiplicity.
/// Throws CertificationError when this cannot be verified.
Certificate certify_generic(const MarkovTriple& t);

/// Best rational p/q with q <= max_den within rel_tol of x, if any.
std::optional<Rational> rational_from_double(double x, std::int64_t max_den = 1000000, double rel_tol = 1e-12);

// ---------------------------------------------------------------------------

struct EstimateOptions {
    int starts = 32;
    int max_iterations = 200;
    std::size_t max_states = 720;
    std::uint64_t seed = 0;
    double gradient_tolerance = 1e-6;
};

struct KappaEstimate {
    double kappa = 0.0;
    Eigen::VectorXd rho;  // witness density (pi-mean one)
    Potential psi;        // witness potential, pi-mean zero and A = 1
    int best_start = 0;
    int iterations = 0;      // iterations spent on the best start
    double gradient_norm = 0.0;
    bool converged = false;  // every start met the gradient tolerance
    std::vector<double> start_values;
    std::string diagnostics;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// min over psi of B(rho, psi) / A(rho, psi) for a fixed strictly positive rho.
/// Fills psi with a minimiser when requested.
double min_ratio(const MarkovTriple& t, const Eigen::VectorXd& rho, Potential* psi = nullptr);

/// Multi-start minimisation of B/A. Start 0 is rho = 1, so the result never
/// exceeds the spectral gap. Throws std::length_error above max_states.
KappaEstimate estimate_kappa(const MarkovTriple& t, const EstimateOptions& options = {});

// ---------------------------------------------------------------------------

struct ReportOptions {
    int samples = 200;
    std::uint64_t seed = 0;
    std::vector<double> decay_times{0.1, 0.5, 1.0};
    bool estimate = false;
    EstimateOptions estimator;
};

struct InequalityCheck {
    std::string name;
    int samples = 0;
    double worst_slack = 0.0;  // >= 0 when the inequality holds
    bool passed = true;
};

struct CurvatureReport {
    std::optional<Rational> kappa_certified;
    std::optional<KappaEstimate> kappa_estimate;
    double lambda = 0.0;
    std::optional<Rational> alpha_lower;  // 2 kappa_certified
    double alpha_upper = 0.0;             // 2 lambda
    std::vector<InequalityCheck> checks;
    std::map<std::string, std::string> provenance;

    bool passed() const;
};

CurvatureReport inequality_report(const MarkovTriple& t, const std::optional<Certificate>& certificate,
                                  const ReportOptions& options = {});

// ---------------------------------------------------------------------------

struct CounterexampleRow {
    double eps = 0.0;
    double a = 0.0;
    double b_off = 0.0;
    double ratio = 0.0;
};

/// The hexagon with its three long diagonals (the Cayley graph of S3 under
/// transpositions), simple random walk.
MarkovTriple s3_hexagon();
Eigen::VectorXd s3_density(double eps);
Potential s3_potential();

/// B_off / A at (rho_eps, psi) on the hexagon. eps must lie in (0, 1).
CounterexampleRow s3_counterexample(double eps);

}  // namespace ricci
