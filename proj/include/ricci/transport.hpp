#pragma once

#include "ricci/markov.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Upper bounds on the transport distance W by minimising a discretised
// Benamou-Brenier action, and the entropy convexity report along the
// resulting path.
//
// Densities are piecewise linear in time. On interval k the potential is
// recovered from the continuity equation at both ends,
//   pi * (rho_{k+1} - rho_k) / dt = G(rho) psi,
// G(rho) the Laplacian with edge weights theta(rho_x, rho_y) c(x, y), and the
// action integrand is integrated by the trapezoid rule. The integrand is
// convex along each segment, so the discrete action bounds the action of the
// piecewise linear curve, and W^2 from above.

namespace ricci {

struct DiscretePath {
    std::vector<double> times;             // 0 = t_0 < ... < t_K = 1
    std::vector<Eigen::VectorXd> densities;  // K + 1 nodes
    std::vector<Potential> start_potentials;  // K intervals, psi at t_k
    std::vector<Potential> end_potentials;    // K intervals, psi at t_{k+1}

    std::size_t intervals() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

/// Largest continuity-equation residual of the path's own potentials
/// (max norm, divided by max(1, |pi * d rho / dt|)).
double scheme_residual(const MarkovTriple& t, const DiscretePath& path);

/// Residual of the continuity equation at interval midpoints, using the
/// midpoint density and the average of the two end potentials. Shrinks as the
/// grid is refined.
double midpoint_residual(const MarkovTriple& t, const DiscretePath& path);

class PathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kMaxSchemeResidual = 1e-8;
inline constexpr int kMaxSteps = 256;

/// Trapezoid action  sum_k dt/2 [ psi^T G(rho_k) psi + psi'^T G(rho_{k+1}) psi' ].
/// Throws PathError if the scheme residual exceeds kMaxSchemeResidual.
double action(const MarkovTriple& t, const DiscretePath& path);

/// Path through the given densities with potentials solved from the
/// continuity equation. Densities must be strictly positive.
DiscretePath path_through(const MarkovTriple& t, std::vector<double> times, std::vector<Eigen::VectorXd> densities);

/// Straight line (1 - s) rho0 + s rho1 on a uniform grid.
DiscretePath linear_path(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1, int steps);

/// Path with the time order reversed.
DiscretePath reversed(const DiscretePath& path);

struct TransportOptions {
    int steps = 64;        // initial grid
    int max_steps = 256;   // refine by doubling up to this
    int max_iterations = 400;  // optimiser iterations per grid
    double gradient_tolerance = 1e-9;
    std::size_t max_states = 24;
};

struct RefinementLevel {
    int steps = 0;
    double w_upper = 0.0;
    int iterations = 0;
    bool converged = false;
    double midpoint_residual = 0.0;
};

struct TransportResult {
    double w_upper = 0.0;  // sqrt of the minimised action
    DiscretePath path;
    std::vector<RefinementLevel> levels;
    double scheme_residual = 0.0;
};

/// Minimises the discrete action between two strictly positive densities.
/// Throws std::length_error above max_states states or kMaxSteps steps,
/// std::domain_error for invalid endpoints, PathError on optimiser breakdown.
TransportResult distance_upper(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1,
                               const TransportOptions& options = {});

struct ConvexityReport {
    double w_upper = 0.0;
    double h0 = 0.0;
    double h1 = 0.0;
    double kappa = 0.0;
    std::vector<double> slack;  // per grid time
    double worst_slack = 0.0;
    double tolerance = 0.0;     // 0.05 |H(rho0) + H(rho1)|
    bool consistent = false;
};

/// Evaluates (1-s) H(rho0) + s H(rho1) - kappa/2 s(1-s) W^2 - H(rho_s) along
/// the computed path, with W replaced by its upper bound.
ConvexityReport convexity_check(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1,
                                double kappa, const TransportOptions& options = {});

/// Same check on an already computed transport result.
ConvexityReport convexity_check(const MarkovTriple& t, const TransportResult& result, double kappa);

}  // namespace ricci
