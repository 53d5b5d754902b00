#include "lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace ricci::detail {

namespace {

struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& history, const Eigen::VectorXd& g) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
        alpha[i] = history[i].rho * history[i].s.dot(q);
        q -= alpha[i] * history[i].y;
    }
    const Pair& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double beta = history[i].rho * history[i].y.dot(q);
        q += (alpha[i] - beta) * history[i].s;
    }
    return -q;
}

}  // namespace

LbfgsResult lbfgs(const Objective& f, const Projection& project, Eigen::VectorXd x0,
                  const LbfgsOptions& options) {
    auto proj = [&](Eigen::VectorXd& v) {
        if (project) {
            project(v);
        }
    };

    LbfgsResult r;
    r.x = std::move(x0);
    Eigen::VectorXd g(r.x.size());
    r.value = f(r.x, &g);
    if (!std::isfinite(r.value)) {
        r.status = "objective not finite at the starting point";
        return r;
    }
    proj(g);

    std::deque<Pair> history;
    int stalled = 0;
    Eigen::VectorXd xn(r.x.size());
    Eigen::VectorXd gn(r.x.size());

    for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
        r.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
        if (r.gradient_norm <= options.gradient_tolerance) {
            r.converged = true;
            r.status = "gradient tolerance met";
            return r;
        }

        bool accepted = false;
        double fn = 0.0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Eigen::VectorXd d;
            if (history.empty()) {
                d = -g / std::max(1.0, r.gradient_norm);
            } else {
                d = two_loop(history, g);
                proj(d);
            }
            double slope = g.dot(d);
            if (!(slope < 0.0)) {
                history.clear();
                d = -g / std::max(1.0, r.gradient_norm);
                slope = g.dot(d);
            }
            double step = 1.0;
            for (int b = 0; b < options.max_backtracks; ++b, step *= 0.5) {
                xn = r.x + step * d;
                fn = f(xn, &gn);
                if (std::isfinite(fn) && fn <= r.value + 1e-4 * step * slope) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (history.empty()) {
                    break;
                }
                history.clear();
            }
        }
        if (!accepted) {
            r.status = "line search failed";
            return r;
        }

        proj(gn);
        Eigen::VectorXd s = xn - r.x;
        Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
            history.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(history.size()) > options.memory) {
                history.pop_front();
            }
        }

        const double progress = r.value - fn;
        stalled = progress <= 1e-15 * std::max(1.0, std::abs(r.value)) ? stalled + 1 : 0;
        r.x.swap(xn);
        g.swap(gn);
        r.value = fn;
        if (stalled >= options.stall_iterations) {
            r.gradient_norm = g.lpNorm<Eigen::Infinity>();
            r.converged = r.gradient_norm <= options.gradient_tolerance;
            r.status = "no further progress";
            return r;
        }
    }
    r.gradient_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
    r.converged = r.gradient_norm <= options.gradient_tolerance;
    r.status = r.converged ? "gradient tolerance met" : "iteration limit";
    return r;
}

}  // namespace ricci::detail
