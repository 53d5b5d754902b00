#include "ricci/markov.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

namespace ricci {

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::Malformed: return "malformed";
        case ViolationKind::SelfLoop: return "self-loop";
        case ViolationKind::DuplicateRate: return "duplicate-rate";
        case ViolationKind::NonPositiveWeight: return "non-positive-weight";
        case ViolationKind::NotNormalized: return "not-normalized";
        case ViolationKind::DetailedBalance: return "detailed-balance";
        case ViolationKind::Reducible: return "reducible";
    }
    return "unknown";
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "invalid Markov triple (" << violations.size() << " violation"
       << (violations.size() == 1 ? "" : "s") << ")";
    for (const auto& v : violations) {
        os << "\n  [" << to_string(v.kind) << "] " << v.message;
    }
    return os.str();
}

}  // namespace

TripleValidationError::TripleValidationError(std::vector<Violation> violations)
    : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

bool TripleValidationError::has(ViolationKind kind) const noexcept {
    return std::any_of(violations_.begin(), violations_.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

double MarkovTriple::rate(int x, int y) const {
    const std::size_t a = find_arc(x, y);
    return a == npos ? 0.0 : arcs_[a].rate;
}

std::size_t MarkovTriple::find_arc(int x, int y) const {
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= size()) {
        return npos;
    }
    const auto row = out(x);
    const auto it = std::lower_bound(row.begin(), row.end(), y,
                                     [](const Arc& a, int target) { return a.to < target; });
    if (it == row.end() || it->to != y) {
        return npos;
    }
    return offsets_[x] + static_cast<std::size_t>(it - row.begin());
}

MarkovTriple build_triple(std::vector<std::string> labels, std::vector<RateEntry> rates,
                          std::vector<double> weights, const BuildOptions& options) {
    std::vector<Violation> violations;
    const std::size_t n = weights.size();
    if (n == 0) {
        throw TripleValidationError({{ViolationKind::Malformed, "empty state space"}});
    }
    if (labels.empty()) {
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back(std::to_string(i));
        }
    }
    if (labels.size() != n) {
        violations.push_back({ViolationKind::Malformed, "label count " + std::to_string(labels.size()) +
                                                            " differs from weight count " +
                                                            std::to_string(n)});
    }

    double total = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        if (!(weights[x] > 0.0) || !std::isfinite(weights[x])) {
            violations.push_back({ViolationKind::NonPositiveWeight,
                                  "pi(" + std::to_string(x) + ") = " + std::to_string(weights[x])});
        }
        total += weights[x];
    }
    if (std::abs(total - 1.0) > options.normalization_tolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "sum of weights is " << total;
        violations.push_back({ViolationKind::NotNormalized, os.str()});
    }

    std::map<std::pair<int, int>, double> table;
    for (const auto& e : rates) {
        if (e.from < 0 || e.to < 0 || static_cast<std::size_t>(e.from) >= n ||
            static_cast<std::size_t>(e.to) >= n) {
            violations.push_back({ViolationKind::Malformed, "rate entry (" + std::to_string(e.from) +
                                                                ", " + std::to_string(e.to) +
                                                                ") out of range"});
            continue;
        }
        if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) {
            violations.push_back({ViolationKind::Malformed, "rate (" + std::to_string(e.from) + ", " +
                                                                std::to_string(e.to) +
                                                                ") must be finite and nonnegative"});
            continue;
        }
        if (e.from == e.to) {
            if (e.rate != 0.0) {
                violations.push_back({ViolationKind::SelfLoop,
                                      "self-loop at state " + std::to_string(e.from)});
            }
            continue;
        }
        if (!table.emplace(std::make_pair(e.from, e.to), e.rate).second) {
            violations.push_back({ViolationKind::DuplicateRate, "rate (" + std::to_string(e.from) +
                                                                    ", " + std::to_string(e.to) +
                                                                    ") given more than once"});
        }
    }
    std::erase_if(table, [](const auto& kv) { return kv.second == 0.0; });

    // Detailed balance, including pairs where only one direction is present.
    const bool weights_ok =
        std::none_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.kind == ViolationKind::NonPositiveWeight; });
    if (weights_ok) {
        for (const auto& [key, q] : table) {
            const auto [x, y] = key;
            const auto rev = table.find({y, x});
            const double q_rev = rev == table.end() ? 0.0 : rev->second;
            if (rev != table.end() && x > y) {
                continue;  // already checked from the other side
            }
            const double lhs = weights[x] * q;
            const double rhs = weights[y] * q_rev;
            if (std::abs(lhs - rhs) > options.balance_tolerance * std::max(lhs, rhs)) {
                std::ostringstream os;
                os.precision(17);
                os << "pi(" << x << ")Q(" << x << "," << y << ") = " << lhs << " but pi(" << y
                   << ")Q(" << y << "," << x << ") = " << rhs;
                violations.push_back({ViolationKind::DetailedBalance, os.str()});
            }
        }
    }

    // Connected components of the support graph.
    if (n > 1) {
        std::vector<int> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int v) {
            while (parent[v] != v) {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            return v;
        };
        for (const auto& kv : table) {
            const int a = find(kv.first.first);
            const int b = find(kv.first.second);
            if (a != b) {
                parent[a] = b;
            }
        }
        std::size_t components = 0;
        for (std::size_t v = 0; v < n; ++v) {
            components += (find(static_cast<int>(v)) == static_cast<int>(v)) ? 1 : 0;
        }
        if (components > 1) {
            violations.push_back({ViolationKind::Reducible,
                                  "support graph has " + std::to_string(components) + " components"});
        }
    }

    if (!violations.empty()) {
        throw TripleValidationError(std::move(violations));
    }

    MarkovTriple t;
    t.labels_ = std::move(labels);
    t.weights_ = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(n));
    t.offsets_.assign(n + 1, 0);
    for (const auto& kv : table) {
        ++t.offsets_[kv.first.first + 1];
    }
    std::partial_sum(t.offsets_.begin(), t.offsets_.end(), t.offsets_.begin());
    t.arcs_.reserve(table.size());
    t.sources_.reserve(table.size());
    // std::map iterates in (from, to) order, which is exactly the CSR order.
    for (const auto& [key, q] : table) {
        t.arcs_.push_back({key.second, q, q * weights[key.first]});
        t.sources_.push_back(key.first);
    }
    t.exit_rates_.assign(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        for (const Arc& a : t.out(static_cast<int>(x))) {
            t.exit_rates_[x] += a.rate;
            if (static_cast<std::size_t>(a.to) > x) {
                const std::size_t uv = t.find_arc(static_cast<int>(x), a.to);
                const std::size_t vu = t.find_arc(a.to, static_cast<int>(x));
                t.edges_.push_back({static_cast<int>(x), a.to, uv, vu});
            }
        }
    }
    return t;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kDensityTolerance = 1e-12;
}

Density::Density(const MarkovTriple& t, Eigen::VectorXd values) {
    if (static_cast<std::size_t>(values.size()) != t.size()) {
        throw std::invalid_argument("Density: size does not match state space");
    }
    if (!values.allFinite() || (values.array() < 0.0).any()) {
        throw std::domain_error("Density: entries must be finite and nonnegative");
    }
    const double mass = values.dot(t.weights());
    if (std::abs(mass - 1.0) > kDensityTolerance) {
        throw std::domain_error("Density: pi-weighted mean is " + std::to_string(mass) + ", not 1");
    }
    strict_ = (values.array() > 0.0).all();
    values_ = std::move(values);
}

Density Density::normalized(const MarkovTriple& t, Eigen::VectorXd raw) {
    if (static_cast<std::size_t>(raw.size()) != t.size()) {
        throw std::invalid_argument("Density: size does not match state space");
    }
    if (!raw.allFinite() || (raw.array() < 0.0).any()) {
        throw std::domain_error("Density: entries must be finite and nonnegative");
    }
    const double mass = raw.dot(t.weights());
    if (!(mass > 0.0)) {
        throw std::domain_error("Density: zero mass");
    }
    raw /= mass;
    const bool strict = (raw.array() > 0.0).all();
    return Density(std::move(raw), strict);
}

Density Density::uniform(const MarkovTriple& t) {
    return Density(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(t.size())), true);
}

// ---------------------------------------------------------------------------

namespace {

void require_size(const MarkovTriple& t, const Eigen::VectorXd& f, const char* what) {
    if (static_cast<std::size_t>(f.size()) != t.size()) {
        throw std::invalid_argument(std::string(what) + ": vector size does not match state space");
    }
}

void require_arc_size(const MarkovTriple& t, const EdgeFunction& f, const char* what) {
    if (static_cast<std::size_t>(f.values.size()) != t.arc_count()) {
        throw std::domain_error(std::string(what) + ": edge function is not defined on the support of Q");
    }
}

}  // namespace

Potential generator_apply(const MarkovTriple& t, const Potential& f) {
    require_size(t, f, "generator_apply");
    Potential out = Potential::Zero(f.size());
    for (std::size_t x = 0; x < t.size(); ++x) {
        double acc = 0.0;
        for (const Arc& a : t.out(static_cast<int>(x))) {
            acc += a.rate * (f[a.to] - f[x]);
        }
        out[x] = acc;
    }
    return out;
}

EdgeFunction gradient(const MarkovTriple& t, const Potential& f) {
    require_size(t, f, "gradient");
    EdgeFunction g{Eigen::VectorXd(static_cast<Eigen::Index>(t.arc_count()))};
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        g.values[i] = f[t.arc(i).to] - f[t.arc_source(i)];
    }
    return g;
}

Potential divergence(const MarkovTriple& t, const EdgeFunction& psi) {
    require_arc_size(t, psi, "divergence");
    Potential out = Potential::Zero(static_cast<Eigen::Index>(t.size()));
    for (const Edge& e : t.edges()) {
        const double fwd = psi.values[e.arc_uv];
        const double bwd = psi.values[e.arc_vu];
        out[e.u] += 0.5 * (fwd - bwd) * t.arc(e.arc_uv).rate;
        out[e.v] += 0.5 * (bwd - fwd) * t.arc(e.arc_vu).rate;
    }
    return out;
}

double inner(const MarkovTriple& t, const Potential& f, const Potential& g) {
    require_size(t, f, "inner");
    require_size(t, g, "inner");
    return (f.array() * g.array() * t.weights().array()).sum();
}

double inner(const MarkovTriple& t, const EdgeFunction& f, const EdgeFunction& g) {
    require_arc_size(t, f, "inner");
    require_arc_size(t, g, "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < t.arc_count(); ++i) {
        acc += f.values[i] * g.values[i] * t.arc(i).conductance;
    }
    return 0.5 * acc;
}

double dirichlet(const MarkovTriple& t, const Potential& f, const Potential& g) {
    return -inner(t, f, generator_apply(t, g));
}

double entropy(const MarkovTriple& t, const Density& rho) {
    double acc = 0.0;
    for (std::size_t x = 0; x < t.size(); ++x) {
        const double r = rho[static_cast<int>(x)];
        if (r > 0.0) {
            acc += t.weight(static_cast<int>(x)) * r * std::log(r);
        }
    }
    return acc;
}

Eigen::MatrixXd generator_matrix(const MarkovTriple& t) {
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (const Arc& a : t.out(static_cast<int>(x))) {
            m(x, a.to) -= a.rate;
            m(x, x) += a.rate;
        }
    }
    return m;
}

Eigen::MatrixXd symmetrized_generator(const MarkovTriple& t) {
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        s(x, x) = t.exit_rate(static_cast<int>(x));
    }
    for (const Edge& e : t.edges()) {
        // c(x,y) / sqrt(pi(x) pi(y)), averaged over both arcs to stay exactly symmetric.
        const double c = 0.5 * (t.arc(e.arc_uv).conductance + t.arc(e.arc_vu).conductance);
        const double value = -c / std::sqrt(t.weight(e.u) * t.weight(e.v));
        s(e.u, e.v) = value;
        s(e.v, e.u) = value;
    }
    return s;
}

Eigen::VectorXd generator_spectrum(const MarkovTriple& t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized_generator(t),
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("generator_spectrum: eigen decomposition failed");
    }
    return solver.eigenvalues();
}

double spectral_gap(const MarkovTriple& t) {
    if (t.size() < 2) {
        throw std::domain_error("spectral_gap: state space has a single state");
    }
    const Eigen::VectorXd ev = generator_spectrum(t);
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    // The kernel of -L is spanned by constants exactly when the chain is irreducible.
    if (ev[1] <= 1e-12 * scale) {
        throw std::domain_error("spectral_gap: chain is reducible (repeated zero eigenvalue)");
    }
    return ev[1];
}

// ---------------------------------------------------------------------------

HeatSemigroup::HeatSemigroup(const MarkovTriple& t, SemigroupOptions options)
    : triple_(&t), options_(options) {
    if (t.size() <= options_.dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized_generator(t));
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("HeatSemigroup: eigen decomposition failed");
        }
        spectral_ = true;
        sqrt_pi_ = t.weights().cwiseSqrt();
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    }
}

Density HeatSemigroup::apply(const Density& rho0, double time) const {
    if (!(time >= 0.0) || !std::isfinite(time)) {
        throw std::domain_error("heat_semigroup: time must be finite and nonnegative");
    }
    const MarkovTriple& t = *triple_;
    if (rho0.size() != t.size()) {
        throw std::invalid_argument("heat_semigroup: density size does not match state space");
    }
    if (time == 0.0) {
        return rho0;
    }
    Eigen::VectorXd out;
    if (spectral_) {
        // e^{tL} = pi^{-1/2} V e^{-t Lambda} V^T pi^{1/2}
        Eigen::VectorXd coeff = eigenvectors_.transpose() * (sqrt_pi_.cwiseProduct(rho0.values()));
        coeff.array() *= (-time * eigenvalues_.array()).exp();
        out = (eigenvectors_ * coeff).cwiseQuotient(sqrt_pi_);
    } else {
        using State = std::vector<double>;
        namespace odeint = boost::numeric::odeint;
        State state(rho0.values().data(), rho0.values().data() + rho0.size());
        auto rhs = [&t](const State& f, State& df, double) {
            for (std::size_t x = 0; x < t.size(); ++x) {
                double acc = 0.0;
                for (const Arc& a : t.out(static_cast<int>(x))) {
                    acc += a.rate * (f[a.to] - f[x]);
                }
                df[x] = acc;
            }
        };
        double max_exit = 0.0;
        for (std::size_t x = 0; x < t.size(); ++x) {
            max_exit = std::max(max_exit, t.exit_rate(static_cast<int>(x)));
        }
        auto stepper = odeint::make_controlled(options_.ode_tolerance, options_.ode_tolerance,
                                               odeint::runge_kutta_dopri5<State>());
        odeint::integrate_adaptive(stepper, rhs, state, 0.0, time, std::min(time, 0.1 / max_exit));
        out = Eigen::Map<Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
    }
    // Clamp rounding-level negatives and restore exact normalization.
    out = out.cwiseMax(0.0);
    return Density::normalized(t, std::move(out));
}

Density heat_semigroup(const MarkovTriple& t, const Density& rho0, double time,
                       const SemigroupOptions& options) {
    return HeatSemigroup(t, options).apply(rho0, time);
}

}  // namespace ricci
