#include "ricci/estimator.hpp"

#include "lbfgs.hpp"
#include "ricci/curvature.hpp"
#include "ricci/logmean.hpp"
#include "ricci/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace ricci {

namespace lm = logmean;

bool Certificate::all_facts_hold() const {
    return std::all_of(facts.begin(), facts.end(), [](const CertificateFact& f) { return f.holds; });
}

namespace {

struct SquareCounts {
    int cycles = 0;     // 4-cycles through the pair
    int chordless = 0;  // of which have no chord
};

// 4-cycles x - first - w - second - x for one adjacent pair.
SquareCounts square_counts(const MarkovTriple& t, const AdjacentPair& p) {
    SquareCounts c;
    const bool ends_joined = t.adjacent(p.first, p.second);
    for (const Arc& a : t.out(p.first)) {
        const int w = a.to;
        if (w == p.shared || !t.adjacent(w, p.second)) {
            continue;
        }
        ++c.cycles;
        if (!ends_joined && !t.adjacent(w, p.shared)) {
            ++c.chordless;
        }
    }
    return c;
}

std::map<EdgeKey, int> triangles_per_edge(const MarkovTriple& t) {
    std::map<EdgeKey, int> count;
    for (const Edge& e : t.edges()) {
        count[make_edge_key(e.u, e.v)] = 0;
    }
    for (const SubgraphPattern& tri : enumerate_triangles(t)) {
        for (const EdgeKey& e : tri.edges()) {
            ++count[e];
        }
    }
    return count;
}

CertificateFact fact(std::string name, bool holds, std::string detail, bool required = true) {
    return {std::move(name), holds, required, std::move(detail)};
}

std::string describe(const AdjacentPair& p) {
    std::ostringstream os;
    os << "(" << p.shared << "; " << p.first << ", " << p.second << ")";
    return os.str();
}

void require_facts(const Certificate& c) {
    for (const CertificateFact& f : c.facts) {
        if (f.required && !f.holds) {
            throw CertificationError(c.model + ": " + f.name + " fails: " + f.detail);
        }
    }
}

CertificateFact degree_fact(const MarkovTriple& t, std::int64_t d) {
    for (std::size_t x = 0; x < t.size(); ++x) {
        if (static_cast<std::int64_t>(t.degree(static_cast<int>(x))) != d) {
            return fact("regular", false, "state " + std::to_string(x) + " has degree " +
                                              std::to_string(t.degree(static_cast<int>(x))));
        }
    }
    return fact("regular", true, "every state has " + std::to_string(d) + " neighbours");
}

}  // namespace

Certificate certify_bl(int n, int k) {
    if (n < 2 || k < 1 || k > n - 1) {
        throw std::out_of_range("certify_bl: need n > 1 and 1 <= k <= n-1");
    }
    Certificate c;
    c.model = "bl(" + std::to_string(n) + "," + std::to_string(k) + ")";
    c.degree = static_cast<std::int64_t>(k) * (n - k);
    c.rate = Rational(1, c.degree);
    c.triangles_per_edge = n - 2;
    c.on_diagonal = Rational(2) * c.rate;
    c.triangles = Rational(n - 2, 2) * c.rate;
    c.squares = Rational(0);
    c.kappa = c.on_diagonal + c.triangles + c.squares;

    if (n > kEnumerateBlUpTo) {
        return c;
    }
    c.enumerated = true;
    const BernoulliLaplaceModel m = bernoulli_laplace(n, k);
    const MarkovTriple& t = m.triple;
    c.facts.push_back(degree_fact(t, c.degree));

    {
        const auto counts = triangles_per_edge(t);
        bool ok = true;
        std::string detail = "every edge lies in " + std::to_string(n - 2) + " triangles";
        for (const auto& [e, cnt] : counts) {
            if (cnt != n - 2) {
                ok = false;
                detail = "edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "} lies in " +
                         std::to_string(cnt) + " triangles";
                break;
            }
        }
        c.facts.push_back(fact("edge-in-(n-2)-triangles", ok, detail));
    }

    const PairClassification pc = classify_pairs(m);
    {
        auto bad = std::find_if(pc.p1.begin(), pc.p1.end(),
                                [&](const AdjacentPair& p) { return !t.adjacent(p.first, p.second); });
        c.facts.push_back(fact("P1-pair-in-unique-triangle", bad == pc.p1.end(),
                               bad == pc.p1.end() ? std::to_string(pc.p1.size()) + " pairs, each closes one triangle"
                                                  : "pair " + describe(*bad) + " closes no triangle"));
    }

    // P2 pairs: no triangle, exactly one chordless square, and that square has
    // only P2 corners. The raw number of 4-cycles is recorded separately.
    bool no_triangle = true;
    bool one_chordless = true;
    int min_cycles = std::numeric_limits<int>::max();
    int max_cycles = 0;
    std::string first_bad;
    for (const AdjacentPair& p : pc.p2) {
        if (t.adjacent(p.first, p.second)) {
            no_triangle = false;
            first_bad = describe(p);
        }
        const SquareCounts sc = square_counts(t, p);
        if (sc.chordless != 1 && one_chordless) {
            one_chordless = false;
            first_bad = describe(p) + " lies in " + std::to_string(sc.chordless) + " chordless squares";
        }
        min_cycles = std::min(min_cycles, sc.cycles);
        max_cycles = std::max(max_cycles, sc.cycles);
    }
    const std::string none = "no P2 pairs";
    const bool have_p2 = !pc.p2.empty();
    c.facts.push_back(fact("P2-pair-no-triangle", no_triangle,
                           !have_p2 ? none : no_triangle ? "far ends never adjacent" : first_bad));
    c.facts.push_back(fact("P2-pair-in-one-chordless-square", one_chordless,
                           !have_p2 ? none
                                    : one_chordless ? std::to_string(pc.p2.size()) + " pairs, one chordless square each"
                                                    : first_bad));
    {
        const bool holds = !have_p2 || (min_cycles == 2 && max_cycles == 2);
        std::string detail = !have_p2 ? none
                                      : "every P2 pair lies in " +
                                            (min_cycles == max_cycles ? std::to_string(min_cycles)
                                                                      : std::to_string(min_cycles) + ".." +
                                                                            std::to_string(max_cycles)) +
                                            " four-cycles";
        c.facts.push_back(fact("P2-pair-in-2-squares", holds, detail, false));
    }

    require_facts(c);
    return c;
}

Certificate certify_rt(int n) {
    if (n < 2) {
        throw std::out_of_range("certify_rt: need n > 1");
    }
    Certificate c;
    c.model = "rt(" + std::to_string(n) + ")";
    c.degree = static_cast<std::int64_t>(n) * (n - 1) / 2;
    c.rate = Rational(1, c.degree);
    c.triangles_per_edge = 0;
    c.on_diagonal = Rational(2) * c.rate;
    c.triangles = Rational(0);
    c.squares = Rational(0);
    c.kappa = c.on_diagonal + c.triangles + c.squares;

    if (n > kEnumerateRtUpTo) {
        return c;
    }
    c.enumerated = true;
    const RandomTranspositionModel m = random_transposition(n);
    const MarkovTriple& t = m.triple;
    c.facts.push_back(degree_fact(t, c.degree));

    const auto triangles = enumerate_triangles(t);
    c.facts.push_back(fact("no-triangles", triangles.empty(), std::to_string(triangles.size()) + " triangles"));

    const PairClassification pc = classify_pairs(m);
    auto check_multiplicity = [&](const std::vector<AdjacentPair>& pairs, int want, const char* name) {
        for (const AdjacentPair& p : pairs) {
            const SquareCounts sc = square_counts(t, p);
            if (sc.chordless != want || sc.cycles != want) {
                c.facts.push_back(fact(name, false,
                                       "pair " + describe(p) + " lies in " + std::to_string(sc.cycles) + " squares"));
                return;
            }
        }
        c.facts.push_back(fact(name, true,
                               pairs.empty() ? std::string("no such pairs")
                                             : std::to_string(pairs.size()) + " pairs, " + std::to_string(want) +
                                                   (want == 1 ? " square each" : " squares each")));
    };
    check_multiplicity(pc.p1, 1, "P1-pair-in-unique-square");
    check_multiplicity(pc.p2, 2, "P2-pair-in-2-squares");

    {
        std::map<AdjacentPair, bool> is_p1;
        for (const auto& p : pc.p1) is_p1[p] = true;
        for (const auto& p : pc.p2) is_p1[p] = false;
        bool ok = true;
        const auto squares = enumerate_squares(t);
        for (const SubgraphPattern& sq : squares) {
            const auto corners = cycle_pairs(sq);
            const bool cls = is_p1.at(corners.front());
            ok = ok && std::all_of(corners.begin(), corners.end(),
                                   [&](const AdjacentPair& p) { return is_p1.at(p) == cls; });
        }
        c.facts.push_back(fact("square-corners-single-class", ok,
                               std::to_string(squares.size()) + " squares checked"));
    }

    require_facts(c);
    return c;
}

std::optional<Rational> rational_from_double(double x, std::int64_t max_den, double rel_tol) {
    if (!std::isfinite(x)) {
        return std::nullopt;
    }
    const bool negative = x < 0;
    const long double target = std::fabs(static_cast<long double>(x));
    long double r = target;
    __int128 h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int i = 0; i < 64; ++i) {
        const long double a = std::floor(r);
        if (a > 9e18L) {
            break;
        }
        const auto ai = static_cast<__int128>(a);
        const __int128 h2 = ai * h1 + h0;
        const __int128 k2 = ai * k1 + k0;
        if (k2 > max_den || h2 > INT64_MAX) {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const long double approx = static_cast<long double>(h1) / static_cast<long double>(k1);
        if (std::fabs(approx - target) <= rel_tol * std::max(target, 1e-300L)) {
            const auto p = static_cast<std::int64_t>(h1);
            return Rational(negative ? -p : p, static_cast<std::int64_t>(k1));
        }
        const long double frac = r - a;
        if (frac <= 0) {
            break;
        }
        r = 1 / frac;
    }
    return std::nullopt;
}

Certificate certify_generic(const MarkovTriple& t) {
    Certificate c;
    c.model = "generic";
    c.enumerated = true;
    if (t.size() < 2) {
        throw CertificationError("certify_generic: need at least two states");
    }
    const RegularStructure rs = regular_structure(t);
    if (!rs.simple_random_walk()) {
        throw CertificationError(
            "certify_generic: requires a regular chain with uniform weights and a single jump rate");
    }
    const auto q = rational_from_double(rs.rate);
    if (!q) {
        throw CertificationError("certify_generic: jump rate is not a recognisable rational");
    }
    c.degree = static_cast<std::int64_t>(rs.degree);
    c.rate = *q;
    c.facts.push_back(fact("regular", true, "every state has " + std::to_string(rs.degree) + " neighbours"));
    c.facts.push_back(fact("uniform-rate", true, "q = " + q->str()));

    const auto per_edge = triangles_per_edge(t);
    int tau = std::numeric_limits<int>::max();
    for (const auto& [e, cnt] : per_edge) {
        tau = std::min(tau, cnt);
    }
    c.triangles_per_edge = tau;
    c.facts.push_back(fact("triangles-per-edge", true, "every edge lies in at least " + std::to_string(tau) +
                                                           " triangles"));

    std::map<AdjacentPair, int> multiplicity;
    for (const AdjacentPair& p : adjacent_pairs(t)) {
        if (t.adjacent(p.first, p.second)) {
            continue;
        }
        const int m = square_counts(t, p).chordless;
        if (m == 0) {
            throw CertificationError("certify_generic: pair " + describe(p) +
                                     " lies in no triangle and no chordless square");
        }
        multiplicity[p] = m;
    }
    const auto squares = enumerate_chordless_squares(t);
    for (const SubgraphPattern& sq : squares) {
        const auto corners = cycle_pairs(sq);
        const int m = multiplicity.at(corners.front());
        for (const AdjacentPair& p : corners) {
            if (multiplicity.at(p) != m) {
                throw CertificationError("certify_generic: square corners have unequal multiplicities");
            }
        }
    }
    c.facts.push_back(fact("square-coverage", true,
                           std::to_string(multiplicity.size()) + " pairs covered by " +
                               std::to_string(squares.size()) + " chordless squares"));

    c.on_diagonal = Rational(2) * c.rate;
    c.triangles = Rational(tau, 2) * c.rate;
    c.squares = Rational(0);
    c.kappa = c.on_diagonal + c.triangles + c.squares;
    return c;
}

// ---------------------------------------------------------------------------

double min_ratio(const MarkovTriple& t, const Eigen::VectorXd& rho, Potential* psi) {
    const auto n = static_cast<Eigen::Index>(t.size());
    if (n < 2) {
        throw std::domain_error("min_ratio: need at least two states");
    }
    const BochnerMatrices m = bochner_matrices(t, rho);
    // Both forms vanish on constants; ground the last state. Jacobi scaling
    // keeps the problem usable when rho spans many orders of magnitude.
    const Eigen::VectorXd d = m.a.diagonal().head(n - 1).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd a = d.asDiagonal() * m.a.topLeftCorner(n - 1, n - 1) * d.asDiagonal();
    const Eigen::MatrixXd b = d.asDiagonal() * m.b.topLeftCorner(n - 1, n - 1) * d.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(b, a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success || !d.allFinite()) {
        throw EstimationError("min_ratio: generalised eigenproblem failed");
    }
    const double lambda = solver.eigenvalues()(0);
    const Eigen::VectorXd y = solver.eigenvectors().col(0);
    const double rq = y.dot(b * y) / y.dot(a * y);
    if (!std::isfinite(rq) || std::abs(rq - lambda) > 1e-8 * std::max(1.0, std::abs(lambda))) {
        throw EstimationError("min_ratio: generalised eigenproblem is too ill-conditioned at this density");
    }
    if (psi) {
        psi->setZero(n);
        psi->head(n - 1) = d.cwiseProduct(y);
        const double mean = t.weights().dot(*psi);
        psi->array() -= mean;
    }
    return lambda;
}

namespace {

// Contribution to B(rho, psi) - lambda A(rho, psi) from arcs leaving the
// given sources, with lpsi = L psi precomputed.
double local_lagrangian(const MarkovTriple& t, const Eigen::VectorXd& rho, const Potential& psi,
                        const Potential& lpsi, double lambda, std::span<const int> sources) {
    double total = 0.0;
    for (int x : sources) {
        double l_rho = 0.0;
        for (const Arc& a : t.out(x)) {
            l_rho += a.rate * (rho[a.to] - rho[x]);
        }
        for (const Arc& a : t.out(x)) {
            const double g = psi[a.to] - psi[x];
            const double th = lm::theta(rho[x], rho[a.to]);
            const double d1 = lm::theta_partials(rho[x], rho[a.to]).d1;
            total += a.conductance * (0.5 * g * g * d1 * l_rho + g * th * lpsi[x] - 0.5 * lambda * g * g * th);
        }
    }
    return total;
}

constexpr double kLogFloor = -650.0;

}  // namespace

KappaEstimate estimate_kappa(const MarkovTriple& t, const EstimateOptions& options) {
    if (t.size() > options.max_states) {
        throw std::length_error("estimate_kappa: " + std::to_string(t.size()) + " states exceeds the cap of " +
                                std::to_string(options.max_states));
    }
    if (t.size() < 2) {
        throw std::domain_error("estimate_kappa: need at least two states");
    }
    if (options.starts < 1) {
        throw std::invalid_argument("estimate_kappa: need at least one start");
    }
    const auto n = static_cast<Eigen::Index>(t.size());

    // Neighbourhoods {w} u N(w), the sources whose arcs depend on rho(w).
    std::vector<std::vector<int>> hood(t.size());
    for (int w = 0; w < static_cast<int>(n); ++w) {
        hood[w].push_back(w);
        for (const Arc& a : t.out(w)) {
            hood[w].push_back(a.to);
        }
    }

    // lambda(u) = min_psi B/A at rho = exp(u); gradient by Hellmann-Feynman with
    // the derivative in rho(w) taken by central differences of the local terms.
    detail::Objective objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
        if (!u.allFinite() || u.minCoeff() - u.maxCoeff() < kLogFloor) {
            return std::numeric_limits<double>::infinity();
        }
        // scale invariance: shift so the largest entry is 1
        Eigen::VectorXd rho = (u.array() - u.maxCoeff()).exp();
        Potential psi;
        double lambda = 0.0;
        try {
            lambda = min_ratio(t, rho, grad ? &psi : nullptr);
        } catch (const EstimationError&) {
            return std::numeric_limits<double>::infinity();
        }
        if (grad) {
            const double a = a_edge_sum(t, rho, psi);
            const Potential lpsi = generator_apply(t, psi);
            grad->resize(n);
            for (int w = 0; w < static_cast<int>(n); ++w) {
                const double base = rho[w];
                const double h = 1e-5 * base;
                rho[w] = base + h;
                const double up = local_lagrangian(t, rho, psi, lpsi, lambda, hood[w]);
                rho[w] = base - h;
                const double down = local_lagrangian(t, rho, psi, lpsi, lambda, hood[w]);
                rho[w] = base;
                (*grad)[w] = base * (up - down) / (2 * h) / a;
            }
        }
        return lambda;
    };
    // lambda is invariant under u -> u + const.
    detail::Projection centre = [](Eigen::VectorXd& g) { g.array() -= g.mean(); };

    detail::LbfgsOptions lo;
    lo.max_iterations = options.max_iterations;
    lo.gradient_tolerance = options.gradient_tolerance;

    KappaEstimate best;
    best.kappa = std::numeric_limits<double>::infinity();
    bool all_converged = true;
    std::ostringstream diag;
    for (int s = 0; s < options.starts; ++s) {
        Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
        if (s > 0) {
            std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(s));
            std::normal_distribution<double> normal(0.0, 1.0);
            for (Eigen::Index i = 0; i < n; ++i) {
                u0[i] = normal(rng);
            }
        }
        detail::LbfgsResult r = detail::lbfgs(objective, centre, u0, lo);
        best.start_values.push_back(r.value);
        if (!std::isfinite(r.value)) {
            diag << "start " << s << ": " << r.status << "; ";
            all_converged = false;
            continue;
        }
        if (!r.converged) {
            all_converged = false;
            diag << "start " << s << ": " << r.status << " (gradient " << r.gradient_norm << "); ";
        }
        if (r.value < best.kappa) {
            best.kappa = r.value;
            best.best_start = s;
            best.iterations = r.iterations;
            best.gradient_norm = r.gradient_norm;
            best.rho = (r.x.array() - r.x.maxCoeff()).exp();
        }
    }
    if (!std::isfinite(best.kappa)) {
        throw EstimationError("estimate_kappa: no start produced a finite ratio: " + diag.str());
    }
    best.rho /= t.weights().dot(best.rho);
    best.kappa = min_ratio(t, best.rho, &best.psi);
    best.converged = all_converged;
    best.diagnostics = diag.str();
    return best;
}

// ---------------------------------------------------------------------------

bool CurvatureReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& c) { return c.passed; });
}

namespace {

Eigen::VectorXd random_density(const MarkovTriple& t, std::mt19937_64& rng, double spread) {
    std::normal_distribution<double> normal(0.0, spread);
    Eigen::VectorXd v(static_cast<Eigen::Index>(t.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = std::exp(normal(rng));
    }
    return Density::normalized(t, v).values();
}

}  // namespace

CurvatureReport inequality_report(const MarkovTriple& t, const std::optional<Certificate>& certificate,
                                  const ReportOptions& options) {
    CurvatureReport rep;
    rep.lambda = spectral_gap(t);
    rep.alpha_upper = 2 * rep.lambda;
    rep.provenance["lambda"] = "smallest nonzero eigenvalue of -L (dense)";
    rep.provenance["alpha_upper"] = "2 lambda";

    if (certificate) {
        rep.kappa_certified = certificate->kappa;
        rep.alpha_lower = Rational(2) * certificate->kappa;
        rep.provenance["kappa_certified"] = "exact certificate (" + certificate->model + ")";
        rep.provenance["alpha_lower"] = "2 kappa_certified";
    } else {
        rep.provenance["kappa_certified"] = "unavailable";
    }
    if (options.estimate) {
        EstimateOptions eo = options.estimator;
        eo.seed = options.seed;
        rep.kappa_estimate = estimate_kappa(t, eo);
        rep.provenance["kappa_estimate"] = "numerical minimum of B/A; an upper bound on kappa, not a certificate";
    }

    const double kappa = rep.kappa_certified ? rep.kappa_certified->to_double() : 0.0;
    {
        InequalityCheck c{"kappa-below-gap", 1, rep.lambda + 1e-9 - kappa, true};
        c.passed = c.worst_slack >= 0;
        rep.checks.push_back(c);
    }
    if (rep.kappa_estimate) {
        InequalityCheck c{"kappa-ordering", 1, 0.0, true};
        const double est = rep.kappa_estimate->kappa;
        c.worst_slack = std::min(est + 1e-6 - kappa, rep.lambda + 1e-6 - est);
        c.passed = c.worst_slack >= 0;
        rep.checks.push_back(c);
    }
    if (!(kappa > 0)) {
        return rep;
    }

    std::mt19937_64 rng(options.seed);
    const double spreads[] = {0.5, 1.0, 2.0, 4.0};
    std::vector<Eigen::VectorXd> samples;
    samples.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(t.size())));
    for (int i = 1; i < options.samples; ++i) {
        samples.push_back(random_density(t, rng, spreads[i % 4]));
    }

    // H(rho) <= E(rho, log rho) / (2 kappa), implied by alpha >= 2 kappa.
    InequalityCheck mlsi{"mlsi", static_cast<int>(samples.size()), std::numeric_limits<double>::infinity(), true};
    for (const auto& rho : samples) {
        const Density d(t, rho);
        const double h = entropy(t, d);
        const Eigen::VectorXd logr = rho.array().log();
        const double slack = dirichlet(t, rho, logr) / (2 * kappa) - h;
        mlsi.worst_slack = std::min(mlsi.worst_slack, slack);
        mlsi.passed = mlsi.passed && slack >= -1e-12 * std::max(1.0, h);
    }
    rep.checks.push_back(mlsi);

    // H(e^{tL} rho0) <= e^{-2 kappa t} H(rho0).
    const HeatSemigroup heat(t);
    InequalityCheck decay{"entropy-decay", 0, std::numeric_limits<double>::infinity(), true};
    for (const auto& rho : samples) {
        const Density d(t, rho);
        const double h0 = entropy(t, d);
        for (double time : options.decay_times) {
            const double ht = entropy(t, heat.apply(d, time));
            const double slack = std::exp(-2 * kappa * time) * h0 * (1 + 1e-8) - ht;
            decay.worst_slack = std::min(decay.worst_slack, slack);
            decay.passed = decay.passed && slack >= -1e-15;
            ++decay.samples;
        }
    }
    rep.checks.push_back(decay);
    return rep;
}

// ---------------------------------------------------------------------------

MarkovTriple s3_hexagon() {
    std::vector<RateEntry> rates;
    const double q = 1.0 / 3.0;
    for (int i = 0; i < 6; ++i) {
        for (int j : {(i + 1) % 6, (i + 5) % 6, (i + 3) % 6}) {
            rates.push_back({i, j, q});
        }
    }
    return build_triple({"P1", "P2", "P3", "P4", "P5", "P6"}, std::move(rates), std::vector<double>(6, 1.0 / 6.0));
}

Eigen::VectorXd s3_density(double eps) {
    Eigen::VectorXd rho(6);
    rho << eps, 1.0, eps, eps * eps, eps, eps * eps;
    return rho;
}

Potential s3_potential() {
    Potential psi(6);
    psi << 1, 0, 1, 2, 1, 2;
    return psi;
}

CounterexampleRow s3_counterexample(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::out_of_range("s3_counterexample: eps must lie in (0, 1)");
    }
    static const MarkovTriple hexagon = s3_hexagon();
    const FormValue f = b_decomposition(hexagon, s3_density(eps), s3_potential());
    return {eps, f.a, f.b_off, f.b_off / f.a};
}

}  // namespace ricci
