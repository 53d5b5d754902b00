#include "ricci/transport.hpp"

#include "lbfgs.hpp"
#include "ricci/logmean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ricci {

namespace lm = logmean;

namespace {

struct EdgeData {
    int u;
    int v;
    double c;
};

std::vector<EdgeData> edge_data(const MarkovTriple& t) {
    std::vector<EdgeData> out;
    for (const Edge& e : t.edges()) {
        out.push_back({e.u, e.v, t.arc(e.arc_uv).conductance});
    }
    return out;
}

// Weighted Laplacian G(rho), grounded at the last state.
class Mobility {
public:
    Mobility(const std::vector<EdgeData>& edges, Eigen::Index n) : edges_(edges), n_(n) {}

    // psi with G(rho) psi = delta (psi(last) = 0). False if rho is not strictly
    // positive or the grounded system is singular.
    bool solve(const Eigen::VectorXd& rho, const Eigen::VectorXd& delta, Potential& psi) {
        if (!(rho.minCoeff() > 0.0) || !rho.allFinite()) {
            return false;
        }
        g_.setZero(n_, n_);
        for (const EdgeData& e : edges_) {
            const double w = lm::theta(rho[e.u], rho[e.v]) * e.c;
            g_(e.u, e.u) += w;
            g_(e.v, e.v) += w;
            g_(e.u, e.v) -= w;
            g_(e.v, e.u) -= w;
        }
        llt_.compute(g_.topLeftCorner(n_ - 1, n_ - 1));
        if (llt_.info() != Eigen::Success) {
            return false;
        }
        psi.setZero(n_);
        psi.head(n_ - 1) = llt_.solve(delta.head(n_ - 1));
        return psi.allFinite();
    }

    const Eigen::MatrixXd& matrix() const { return g_; }

private:
    const std::vector<EdgeData>& edges_;
    Eigen::Index n_;
    Eigen::MatrixXd g_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

double quadratic(const std::vector<EdgeData>& edges, const Eigen::VectorXd& rho, const Potential& psi) {
    double total = 0.0;
    for (const EdgeData& e : edges) {
        const double g = psi[e.u] - psi[e.v];
        total += g * g * lm::theta(rho[e.u], rho[e.v]) * e.c;
    }
    return total;
}

Potential apply_mobility(const std::vector<EdgeData>& edges, const Eigen::VectorXd& rho, const Potential& psi) {
    Potential out = Potential::Zero(psi.size());
    for (const EdgeData& e : edges) {
        const double f = lm::theta(rho[e.u], rho[e.v]) * e.c * (psi[e.u] - psi[e.v]);
        out[e.u] += f;
        out[e.v] -= f;
    }
    return out;
}

void centre(const MarkovTriple& t, Potential& psi) { psi.array() -= t.weights().dot(psi); }

void check_shape(const MarkovTriple& t, const DiscretePath& path) {
    const std::size_t k = path.intervals();
    if (path.times.size() < 2 || path.densities.size() != k + 1 || path.start_potentials.size() != k ||
        path.end_potentials.size() != k) {
        throw PathError("path: inconsistent sizes");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!(path.times[i + 1] > path.times[i])) {
            throw PathError("path: times must increase");
        }
    }
    const auto n = static_cast<Eigen::Index>(t.size());
    for (const auto& d : path.densities) {
        if (d.size() != n) {
            throw PathError("path: density size mismatch");
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (path.start_potentials[i].size() != n || path.end_potentials[i].size() != n) {
            throw PathError("path: potential size mismatch");
        }
    }
}

}  // namespace

double scheme_residual(const MarkovTriple& t, const DiscretePath& path) {
    check_shape(t, path);
    const auto edges = edge_data(t);
    const Eigen::ArrayXd pi = t.weights().array();
    double worst = 0.0;
    for (std::size_t k = 0; k < path.intervals(); ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        const Eigen::VectorXd rate = (pi * (path.densities[k + 1] - path.densities[k]).array() / dt).matrix();
        const double scale = std::max(1.0, rate.lpNorm<Eigen::Infinity>());
        const Potential r0 = rate - apply_mobility(edges, path.densities[k], path.start_potentials[k]);
        const Potential r1 = rate - apply_mobility(edges, path.densities[k + 1], path.end_potentials[k]);
        worst = std::max({worst, r0.lpNorm<Eigen::Infinity>() / scale, r1.lpNorm<Eigen::Infinity>() / scale});
    }
    return worst;
}

double midpoint_residual(const MarkovTriple& t, const DiscretePath& path) {
    check_shape(t, path);
    const auto edges = edge_data(t);
    const Eigen::ArrayXd pi = t.weights().array();
    double worst = 0.0;
    for (std::size_t k = 0; k < path.intervals(); ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        const Eigen::VectorXd rate = (pi * (path.densities[k + 1] - path.densities[k]).array() / dt).matrix();
        const Eigen::VectorXd mid = 0.5 * (path.densities[k] + path.densities[k + 1]);
        const Potential psi = 0.5 * (path.start_potentials[k] + path.end_potentials[k]);
        const Potential r = rate - apply_mobility(edges, mid, psi);
        worst = std::max(worst, r.lpNorm<Eigen::Infinity>() / std::max(1.0, rate.lpNorm<Eigen::Infinity>()));
    }
    return worst;
}

double action(const MarkovTriple& t, const DiscretePath& path) {
    const double res = scheme_residual(t, path);
    if (!(res <= kMaxSchemeResidual)) {
        throw PathError("action: continuity residual " + std::to_string(res) + " exceeds tolerance");
    }
    const auto edges = edge_data(t);
    double total = 0.0;
    for (std::size_t k = 0; k < path.intervals(); ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        total += 0.5 * dt *
                 (quadratic(edges, path.densities[k], path.start_potentials[k]) +
                  quadratic(edges, path.densities[k + 1], path.end_potentials[k]));
    }
    return total;
}

DiscretePath path_through(const MarkovTriple& t, std::vector<double> times, std::vector<Eigen::VectorXd> densities) {
    DiscretePath path;
    path.times = std::move(times);
    path.densities = std::move(densities);
    path.start_potentials.assign(path.intervals(), Potential::Zero(static_cast<Eigen::Index>(t.size())));
    path.end_potentials = path.start_potentials;
    check_shape(t, path);

    const auto edges = edge_data(t);
    Mobility g(edges, static_cast<Eigen::Index>(t.size()));
    const Eigen::ArrayXd pi = t.weights().array();
    for (std::size_t k = 0; k < path.intervals(); ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        const Eigen::VectorXd rate = (pi * (path.densities[k + 1] - path.densities[k]).array() / dt).matrix();
        if (!g.solve(path.densities[k], rate, path.start_potentials[k]) ||
            !g.solve(path.densities[k + 1], rate, path.end_potentials[k])) {
            throw std::domain_error("path_through: densities must be strictly positive");
        }
        centre(t, path.start_potentials[k]);
        centre(t, path.end_potentials[k]);
    }
    return path;
}

DiscretePath linear_path(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1, int steps) {
    if (steps < 1) {
        throw std::invalid_argument("linear_path: need at least one step");
    }
    std::vector<double> times;
    std::vector<Eigen::VectorXd> dens;
    for (int k = 0; k <= steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        times.push_back(s);
        dens.push_back((1 - s) * rho0 + s * rho1);
    }
    return path_through(t, std::move(times), std::move(dens));
}

DiscretePath reversed(const DiscretePath& path) {
    DiscretePath r;
    const std::size_t k = path.intervals();
    for (std::size_t i = path.times.size(); i-- > 0;) {
        r.times.push_back(1.0 - path.times[i]);
        r.densities.push_back(path.densities[i]);
    }
    for (std::size_t i = k; i-- > 0;) {
        r.start_potentials.push_back(-path.end_potentials[i]);
        r.end_potentials.push_back(-path.start_potentials[i]);
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

void validate_endpoint(const MarkovTriple& t, const Eigen::VectorXd& rho, const char* name) {
    if (rho.size() != static_cast<Eigen::Index>(t.size())) {
        throw std::domain_error(std::string("distance_upper: ") + name + " has the wrong size");
    }
    if (!rho.allFinite() || !(rho.minCoeff() > 0.0)) {
        throw std::domain_error(std::string("distance_upper: ") + name + " must be strictly positive");
    }
    if (std::abs(t.weights().dot(rho) - 1.0) > 1e-10) {
        throw std::domain_error(std::string("distance_upper: ") + name + " must have pi-mean one");
    }
}

// Discrete action as a function of the interior nodes, uniform grid.
class ActionObjective {
public:
    ActionObjective(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1, int steps)
        : edges_(edge_data(t)), n_(static_cast<Eigen::Index>(t.size())), steps_(steps), rho0_(rho0),
          rho1_(rho1), g_(edges_, n_), pi_(t.weights()) {}

    const Eigen::VectorXd& node(const Eigen::VectorXd& x, int k, Eigen::VectorXd& buf) const {
        if (k == 0) return rho0_;
        if (k == steps_) return rho1_;
        buf = x.segment(static_cast<Eigen::Index>(k - 1) * n_, n_);
        return buf;
    }

    double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        if (grad) {
            grad->setZero(x.size());
        }
        const double dt = 1.0 / steps_;
        double total = 0.0;
        Eigen::VectorXd a_buf;
        Eigen::VectorXd b_buf;
        Potential psi;
        for (int k = 0; k < steps_; ++k) {
            const Eigen::VectorXd& a = node(x, k, a_buf);
            const Eigen::VectorXd& b = node(x, k + 1, b_buf);
            const Eigen::VectorXd delta = pi_.cwiseProduct(b - a);
            for (int end = 0; end < 2; ++end) {
                const Eigen::VectorXd& rho = end == 0 ? a : b;
                if (!g_.solve(rho, delta, psi)) {
                    return std::numeric_limits<double>::infinity();
                }
                const double f = delta.dot(psi);
                total += f / (2 * dt);
                if (!grad) {
                    continue;
                }
                // d/d delta = 2 psi; d/d w_e = -(psi_u - psi_v)^2.
                const Eigen::VectorXd d_delta = pi_.cwiseProduct(psi) / dt;
                if (k + 1 < steps_) {
                    grad->segment(static_cast<Eigen::Index>(k) * n_, n_) += d_delta;
                }
                if (k > 0) {
                    grad->segment(static_cast<Eigen::Index>(k - 1) * n_, n_) -= d_delta;
                }
                const int owner = end == 0 ? k : k + 1;
                if (owner == 0 || owner == steps_) {
                    continue;
                }
                auto gseg = grad->segment(static_cast<Eigen::Index>(owner - 1) * n_, n_);
                for (const EdgeData& e : edges_) {
                    const double d = psi[e.u] - psi[e.v];
                    const auto p = lm::theta_partials(rho[e.u], rho[e.v]);
                    const double coef = -d * d * e.c / (2 * dt);
                    gseg[e.u] += coef * p.d1;
                    gseg[e.v] += coef * p.d2;
                }
            }
        }
        return total;
    }

    // Keep each interior node on the hyperplane pi . rho = 1.
    void project(Eigen::VectorXd& v) const {
        const double pp = pi_.squaredNorm();
        for (int k = 0; k + 1 < steps_; ++k) {
            auto seg = v.segment(static_cast<Eigen::Index>(k) * n_, n_);
            seg -= pi_ * (pi_.dot(seg) / pp);
        }
    }

private:
    std::vector<EdgeData> edges_;
    Eigen::Index n_;
    int steps_;
    Eigen::VectorXd rho0_;
    Eigen::VectorXd rho1_;
    Mobility g_;
    Eigen::VectorXd pi_;
};

}  // namespace

TransportResult distance_upper(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1,
                               const TransportOptions& options) {
    if (t.size() > options.max_states) {
        throw std::length_error("distance_upper: " + std::to_string(t.size()) + " states exceeds the cap of " +
                                std::to_string(options.max_states));
    }
    if (t.size() < 2) {
        throw std::domain_error("distance_upper: need at least two states");
    }
    if (options.steps < 1 || options.max_steps > kMaxSteps || options.steps > options.max_steps) {
        throw std::length_error("distance_upper: need 1 <= steps <= max_steps <= " + std::to_string(kMaxSteps));
    }
    validate_endpoint(t, rho0, "rho0");
    validate_endpoint(t, rho1, "rho1");
    const auto n = static_cast<Eigen::Index>(t.size());

    // Interior nodes of the straight line.
    int steps = options.steps;
    Eigen::VectorXd x(static_cast<Eigen::Index>(steps - 1) * n);
    for (int k = 1; k < steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        x.segment(static_cast<Eigen::Index>(k - 1) * n, n) = (1 - s) * rho0 + s * rho1;
    }

    detail::LbfgsOptions lo;
    lo.max_iterations = options.max_iterations;
    lo.gradient_tolerance = options.gradient_tolerance;
    lo.memory = 12;

    TransportResult result;
    while (true) {
        ActionObjective obj(t, rho0, rho1, steps);
        double value = 0.0;
        int iterations = 0;
        bool converged = true;
        if (steps > 1) {
            detail::LbfgsResult r = detail::lbfgs(
                [&](const Eigen::VectorXd& v, Eigen::VectorXd* g) { return obj(v, g); },
                [&](Eigen::VectorXd& v) { obj.project(v); }, x, lo);
            if (!std::isfinite(r.value)) {
                throw PathError("distance_upper: " + r.status);
            }
            x = r.x;
            value = r.value;
            iterations = r.iterations;
            converged = r.converged;
        } else {
            value = obj(x, nullptr);
        }

        std::vector<double> times;
        std::vector<Eigen::VectorXd> dens;
        for (int k = 0; k <= steps; ++k) {
            times.push_back(static_cast<double>(k) / steps);
            Eigen::VectorXd buf;
            dens.push_back(obj.node(x, k, buf));
        }
        result.path = path_through(t, std::move(times), std::move(dens));
        result.levels.push_back({steps, std::sqrt(std::max(0.0, value)), iterations, converged,
                                 midpoint_residual(t, result.path)});

        if (2 * steps > options.max_steps) {
            break;
        }
        // Refine: the old nodes stay, midpoints are averages, so the curve is unchanged.
        Eigen::VectorXd fine(static_cast<Eigen::Index>(2 * steps - 1) * n);
        for (int k = 1; k < 2 * steps; ++k) {
            Eigen::VectorXd buf;
            Eigen::VectorXd buf2;
            auto seg = fine.segment(static_cast<Eigen::Index>(k - 1) * n, n);
            if (k % 2 == 0) {
                seg = obj.node(x, k / 2, buf);
            } else {
                seg = 0.5 * (obj.node(x, k / 2, buf) + obj.node(x, k / 2 + 1, buf2));
            }
        }
        x = std::move(fine);
        steps *= 2;
    }

    // Keep the best level; the action can only decrease, but guard anyway.
    const double best = std::min_element(result.levels.begin(), result.levels.end(),
                                         [](const auto& a, const auto& b) { return a.w_upper < b.w_upper; })
                            ->w_upper;
    result.w_upper = std::min(best, result.levels.back().w_upper);
    result.scheme_residual = scheme_residual(t, result.path);
    return result;
}

ConvexityReport convexity_check(const MarkovTriple& t, const Eigen::VectorXd& rho0, const Eigen::VectorXd& rho1,
                                double kappa, const TransportOptions& options) {
    return convexity_check(t, distance_upper(t, rho0, rho1, options), kappa);
}

ConvexityReport convexity_check(const MarkovTriple& t, const TransportResult& tr, double kappa) {
    ConvexityReport rep;
    rep.kappa = kappa;
    rep.w_upper = tr.w_upper;
    rep.h0 = entropy(t, Density::normalized(t, tr.path.densities.front()));
    rep.h1 = entropy(t, Density::normalized(t, tr.path.densities.back()));
    const double w2 = tr.levels.back().w_upper * tr.levels.back().w_upper;
    rep.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.path.times.size(); ++k) {
        const double s = tr.path.times[k];
        const double h = entropy(t, Density::normalized(t, tr.path.densities[k]));
        const double slack = (1 - s) * rep.h0 + s * rep.h1 - 0.5 * kappa * s * (1 - s) * w2 - h;
        rep.slack.push_back(slack);
        rep.worst_slack = std::min(rep.worst_slack, slack);
    }
    rep.tolerance = 0.05 * std::abs(rep.h0 + rep.h1);
    rep.consistent = rep.worst_slack >= -rep.tolerance;
    return rep;
}

}  // namespace ricci
