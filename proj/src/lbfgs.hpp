#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace ricci::detail {

// Limited-memory BFGS with Armijo backtracking.
//
// The objective returns +inf (or NaN) for infeasible points; the line search
// then backtracks. `project` maps a gradient into the feasible tangent space
// and must be linear; pass an empty function for unconstrained problems.

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
using Projection = std::function<void(Eigen::VectorXd&)>;

struct LbfgsOptions {
    int max_iterations = 200;
    int memory = 8;
    double gradient_tolerance = 1e-6;  // max-norm of the projected gradient
    int max_backtracks = 60;
    int stall_iterations = 5;  // stop after this many steps with no relative progress
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
};

LbfgsResult lbfgs(const Objective& f, const Projection& project, Eigen::VectorXd x0,
                  const LbfgsOptions& options);

}  // namespace ricci::detail
