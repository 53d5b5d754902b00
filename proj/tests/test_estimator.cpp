#include "oracles.hpp"
#include "ricci/curvature.hpp"
#include "ricci/estimator.hpp"
#include "ricci/models.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace ricci;

namespace {

MarkovTriple two_state() { return build_triple({"a", "b"}, {{0, 1, 1.0}, {1, 0, 1.0}}, {0.5, 0.5}); }

MarkovTriple relabel(const MarkovTriple& t, const std::vector<int>& perm) {
    std::vector<RateEntry> rates;
    std::vector<double> w(t.size());
    for (int x = 0; x < static_cast<int>(t.size()); ++x) {
        w[static_cast<std::size_t>(perm[static_cast<std::size_t>(x)])] = t.weight(x);
        for (const Arc& a : t.out(x))
            rates.push_back({perm[static_cast<std::size_t>(x)], perm[static_cast<std::size_t>(a.to)], a.rate});
    }
    return build_triple({}, rates, w);
}

}  // namespace

TEST_CASE("certificates") {
    CHECK(certify_bl(6, 3).kappa == Rational(4, 9));
    CHECK(certify_bl(6, 3).on_diagonal == Rational(2, 9));
    CHECK(certify_bl(6, 3).triangles == Rational(2, 9));
    CHECK(certify_bl(6, 3).squares == Rational(0));
    CHECK(certify_bl(4, 2).kappa == Rational(3, 4));
    CHECK(certify_bl(2, 1).kappa == Rational(2));
    CHECK(certify_bl(10, 3).kappa == Rational(12, 42));
    CHECK(certify_rt(4).kappa == Rational(1, 3));
    CHECK(certify_rt(2).kappa == Rational(2));
    CHECK(certify_rt(5).kappa == Rational(1, 5));
    CHECK(certify_bl(6, 3).enumerated);
    CHECK_FALSE(certify_bl(7, 3).enumerated);
    CHECK(certify_rt(4).enumerated);
    CHECK_FALSE(certify_rt(5).enumerated);
    CHECK(certify_rt(4).all_facts_hold());
    CHECK_THROWS_AS(certify_bl(3, 0), std::out_of_range);
    CHECK_THROWS_AS(certify_rt(1), std::out_of_range);

    // the used facts hold; the informational one does not
    for (const auto& f : certify_bl(5, 2).facts)
        if (f.required) CHECK_MESSAGE(f.holds, f.name);
}

TEST_CASE("generic certificate") {
    CHECK(certify_generic(bernoulli_laplace(5, 2).triple).kappa == Rational(7, 12));
    CHECK(certify_generic(bernoulli_laplace(5, 2).triple).kappa == certify_bl(5, 2).kappa);
    CHECK(certify_generic(random_transposition(4).triple).kappa == certify_rt(4).kappa);
    CHECK(certify_generic(complete_graph(5)).kappa == certify_bl(5, 1).kappa);
    CHECK(certify_generic(product_chain(complete_graph(2), complete_graph(2))).kappa == Rational(2));

    std::vector<RateEntry> cycle;
    for (int i = 0; i < 6; ++i) {
        cycle.push_back({i, (i + 1) % 6, 0.5});
        cycle.push_back({(i + 1) % 6, i, 0.5});
    }
    const MarkovTriple c6 = build_triple({}, cycle, std::vector<double>(6, 1.0 / 6));
    CHECK_THROWS_AS(certify_generic(c6), CertificationError);
    const MarkovTriple skew = build_triple({}, {{0, 1, 1.0}, {1, 0, 0.5}}, {1.0 / 3, 2.0 / 3});
    CHECK_THROWS_AS(certify_generic(skew), CertificationError);
}

TEST_CASE("rational reconstruction") {
    CHECK(rational_from_double(7.0 / 12) == Rational(7, 12));
    CHECK(rational_from_double(-3.0 / 4) == Rational(-3, 4));
    CHECK(rational_from_double(2.0) == Rational(2));
    CHECK(rational_from_double(1.0 / 999983) == Rational(1, 999983));
    CHECK_FALSE(rational_from_double(std::acos(-1.0), 1000).has_value());
    CHECK(rational_from_double(std::acos(-1.0), 1000, 1e-6) == Rational(355, 113));
}

TEST_CASE("certificates bound B/A from below") {
    std::mt19937_64 rng(11);
    const std::vector<std::pair<MarkovTriple, Rational>> cases{
        {bernoulli_laplace(4, 2).triple, certify_bl(4, 2).kappa},
        {bernoulli_laplace(6, 3).triple, certify_bl(6, 3).kappa},
        {random_transposition(4).triple, certify_rt(4).kappa},
        {complete_graph(5), certify_bl(5, 1).kappa}};
    for (const auto& [t, k] : cases) {
        const auto n = static_cast<Eigen::Index>(t.size());
        for (int i = 0; i < 200; ++i) {
            const Eigen::VectorXd rho = oracle::random_positive(rng, n, 2.0);
            const Potential f = oracle::random_vector(rng, n);
            const double a = a_form(t, rho, f);
            REQUIRE(b_form_direct(t, rho, f) >= k.to_double() * a - 1e-10 * std::max(1.0, a));
        }
    }
}

TEST_CASE("min ratio") {
    std::mt19937_64 rng(12);
    const MarkovTriple t = bernoulli_laplace(4, 2).triple;
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd rho = oracle::random_positive(rng, 6);
        Potential psi;
        const double r = min_ratio(t, rho, &psi);
        CHECK(a_form(t, rho, psi) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(b_form_direct(t, rho, psi) == doctest::Approx(r).epsilon(1e-8));
        CHECK(std::abs(t.weights().dot(psi)) <= 1e-10);
        for (int j = 0; j < 20; ++j) {
            const Potential f = oracle::random_vector(rng, 6);
            CHECK(oracle::b_form(t, rho, f) / oracle::a_form(t, rho, f) >= r - 1e-9);
        }
    }
    // rho = 1: B = (L psi, L psi), A = (psi, -L psi), so the ratio is the gap
    CHECK(min_ratio(t, Eigen::VectorXd::Ones(6)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("two-state kappa against a grid") {
    const MarkovTriple t = two_state();
    Eigen::VectorXd psi(2);
    psi << 0, 1;
    double best = 1e300;
    for (int i = 1; i < 20000; ++i) {
        const double r = 2.0 * i / 20000;
        Eigen::VectorXd rho(2);
        rho << r, 2 - r;
        best = std::min(best, oracle::b_form(t, rho, psi) / oracle::a_form(t, rho, psi));
    }
    const KappaEstimate k = estimate_kappa(t, {.starts = 8});
    CHECK(k.kappa == doctest::Approx(best).epsilon(1e-4));
    CHECK(k.kappa <= spectral_gap(t) + 1e-12);
}

TEST_CASE("estimates sit between certificate and gap") {
    const auto bl = bernoulli_laplace(4, 2);
    const KappaEstimate k = estimate_kappa(bl.triple, {.starts = 6, .max_iterations = 150});
    CHECK(k.kappa <= 1.0 + 1e-12);
    CHECK(k.kappa >= certify_bl(4, 2).kappa.to_double() - 1e-9);
    CHECK(k.start_values.size() == 6);
    for (double s : k.start_values) CHECK(s >= k.kappa - 1e-12);
    CHECK(bl.triple.weights().dot(k.rho) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_ratio(bl.triple, k.rho) == doctest::Approx(k.kappa).epsilon(1e-10));

    const MarkovTriple rt = random_transposition(3).triple;
    const KappaEstimate r = estimate_kappa(rt, {.starts = 4, .max_iterations = 100});
    CHECK(r.kappa >= certify_rt(3).kappa.to_double() - 1e-9);
    CHECK(r.kappa <= spectral_gap(rt) + 1e-12);

    CHECK_THROWS_AS(estimate_kappa(bl.triple, {.max_states = 5}), std::length_error);
}

TEST_CASE("estimates do not depend on labelling") {
    const MarkovTriple t = bernoulli_laplace(4, 2).triple;
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[1], perm[4]);
    const MarkovTriple u = relabel(t, perm);
    // rho = 1 is label free; the random starts are not, so compare the best of many
    const double a = estimate_kappa(t, {.starts = 8, .max_iterations = 150}).kappa;
    const double b = estimate_kappa(u, {.starts = 8, .max_iterations = 150}).kappa;
    CHECK(a == doctest::Approx(b).epsilon(1e-3));
    CHECK(spectral_gap(t) == doctest::Approx(spectral_gap(u)).epsilon(1e-12));

    std::mt19937_64 rng(13);
    const Eigen::VectorXd rho = oracle::random_positive(rng, 6);
    Eigen::VectorXd moved(6);
    for (int x = 0; x < 6; ++x) moved[perm[static_cast<std::size_t>(x)]] = rho[x];
    CHECK(min_ratio(t, rho) == doctest::Approx(min_ratio(u, moved)).epsilon(1e-10));
}

TEST_CASE("inequality report") {
    const CurvatureReport bl = inequality_report(bernoulli_laplace(6, 3).triple, certify_bl(6, 3), {.samples = 60});
    REQUIRE(bl.alpha_lower.has_value());
    CHECK(*bl.alpha_lower == Rational(8, 9));
    CHECK(bl.alpha_upper == doctest::Approx(4.0 / 3).epsilon(1e-10));
    CHECK(bl.passed());

    const CurvatureReport rt = inequality_report(random_transposition(4).triple, certify_rt(4), {.samples = 60});
    CHECK(*rt.alpha_lower == Rational(2, 3));
    CHECK(rt.alpha_upper == doctest::Approx(4.0 / 3).epsilon(1e-10));
    CHECK(rt.passed());
    for (const auto& c : rt.checks) CHECK_MESSAGE(c.worst_slack >= -1e-12, c.name);

    const CurvatureReport none = inequality_report(complete_graph(3), std::nullopt, {.samples = 10});
    CHECK_FALSE(none.alpha_lower.has_value());
    CHECK(none.lambda == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("entropy decay at the certified rate") {
    const MarkovTriple t = random_transposition(4).triple;
    const double kappa = certify_rt(4).kappa.to_double();
    const HeatSemigroup heat(t);
    std::mt19937_64 rng(14);
    for (int i = 0; i < 30; ++i) {
        const Density d = Density::normalized(t, oracle::random_positive(rng, 24, 1.5));
        const double h0 = entropy(t, d);
        for (double time : {0.1, 0.5, 1.0, 3.0}) REQUIRE(entropy(t, heat.apply(d, time)) <= std::exp(-2 * kappa * time) * h0 + 1e-15);
    }
}

TEST_CASE("S3 hexagon") {
    const MarkovTriple h = s3_hexagon();
    CHECK(h.size() == 6);
    CHECK(h.edges().size() == 9);
    CHECK(h.labels()[0] == "P1");
    CHECK(enumerate_triangles(h).empty());

    const CounterexampleRow row = s3_counterexample(0.1);
    CHECK(row.eps == 0.1);
    CHECK(row.ratio == doctest::Approx(row.b_off / row.a).epsilon(1e-14));
    CHECK(row.a > 0);
    // independent evaluation of B_off through the edge terms
    const Eigen::VectorXd rho = s3_density(0.1);
    double off = 0;
    for (const auto& term : b_edge_terms(h, rho, s3_potential()))
        if (!term.diagonal()) off += term.value;
    CHECK(row.b_off == doctest::Approx(off).epsilon(1e-12));
    CHECK(row.a == doctest::Approx(oracle::a_form(h, rho, s3_potential())).epsilon(1e-12));
    CHECK(row.ratio == doctest::Approx(0.174986538).epsilon(1e-8));

    double prev = row.ratio;
    for (double eps : {0.01, 0.001, 1e-4}) {
        const double r = s3_counterexample(eps).ratio;
        CHECK(r < prev);
        CHECK(r > 0);
        prev = r;
    }
    CHECK_THROWS_AS(s3_counterexample(0.0), std::out_of_range);
    CHECK_THROWS_AS(s3_counterexample(1.0), std::out_of_range);
}
