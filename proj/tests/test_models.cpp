#include "ricci/markov.hpp"
#include "ricci/models.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace ricci;

namespace {

int common_neighbours(const MarkovTriple& t, int x, int y) {
    int c = 0;
    for (const Arc& a : t.out(x))
        if (a.to != y && t.adjacent(a.to, y)) ++c;
    return c;
}

// Number of 4-cycles through the path first - shared - second, counted by the
// fourth vertex.
std::pair<int, int> squares_through(const MarkovTriple& t, const AdjacentPair& p) {
    int all = 0, chordless = 0;
    for (const Arc& a : t.out(p.first)) {
        const int w = a.to;
        if (w == p.shared || w == p.second || !t.adjacent(w, p.second)) continue;
        ++all;
        if (!t.adjacent(p.first, p.second) && !t.adjacent(p.shared, w)) ++chordless;
    }
    return {all, chordless};
}

std::vector<int> compose(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[static_cast<std::size_t>(b[i])];
    return r;
}

}  // namespace

TEST_CASE("Bernoulli-Laplace sizes") {
    const auto m = bernoulli_laplace(4, 2);
    CHECK(m.triple.size() == 6);
    CHECK(m.triple.edges().size() == 12);
    CHECK(m.degree == 4);
    for (int x = 0; x < 6; ++x) {
        CHECK(m.triple.degree(x) == 4);
        CHECK(m.triple.weight(x) == doctest::Approx(1.0 / 6));
        for (const Arc& a : m.triple.out(x)) CHECK(a.rate == doctest::Approx(0.25));
    }
    CHECK(m.triple.labels()[0] == "{0,1}");
    CHECK(bernoulli_laplace(10, 5).triple.size() == 252);
    CHECK(binomial(30, 15) == 155117520);
    CHECK_THROWS_AS(bernoulli_laplace(4, 0), std::out_of_range);
    CHECK_THROWS_AS(bernoulli_laplace(4, 4), std::out_of_range);
    CHECK_THROWS(bernoulli_laplace(30, 15));
}

TEST_CASE("random transposition sizes") {
    const auto r3 = random_transposition(3);
    CHECK(r3.triple.size() == 6);
    CHECK(r3.triple.edges().size() == 9);
    const auto r4 = random_transposition(4);
    CHECK(r4.triple.size() == 24);
    CHECK(r4.triple.edges().size() == 72);
    CHECK(r4.degree == 6);
    for (const Arc& a : r4.triple.out(0)) CHECK(a.rate == doctest::Approx(1.0 / 6));
    CHECK(r4.triple.labels()[0] == "1234");
    CHECK_THROWS_AS(random_transposition(1), std::out_of_range);
    CHECK_THROWS_AS(random_transposition(kMaxTranspositionN + 1), std::out_of_range);
}

TEST_CASE("arc moves") {
    const auto m = bernoulli_laplace(5, 2);
    for (int x = 0; x < static_cast<int>(m.triple.size()); ++x)
        for (std::size_t i = m.triple.arc_offset(x); i < m.triple.arc_offset(x) + m.triple.degree(x); ++i) {
            const auto& s = m.states[static_cast<std::size_t>(x)];
            const auto& d = m.states[static_cast<std::size_t>(m.triple.arc(i).to)];
            const SiteMove mv = m.arc_moves[i];
            CHECK(std::count(s.begin(), s.end(), mv.from) == 1);
            CHECK(std::count(d.begin(), d.end(), mv.to) == 1);
            CHECK(std::count(d.begin(), d.end(), mv.from) == 0);
        }
    const auto r = random_transposition(4);
    for (int x = 0; x < 24; ++x)
        for (std::size_t i = r.triple.arc_offset(x); i < r.triple.arc_offset(x) + r.triple.degree(x); ++i) {
            auto s = r.states[static_cast<std::size_t>(x)];
            const Transposition tr = r.arc_moves[i];
            CHECK(tr.i < tr.j);
            for (int& v : s)
                if (v == tr.i) v = tr.j;
                else if (v == tr.j) v = tr.i;
            CHECK(s == r.states[static_cast<std::size_t>(r.triple.arc(i).to)]);
        }
}

TEST_CASE("complete graph and products") {
    const MarkovTriple k4 = complete_graph(4);
    const MarkovTriple bl = bernoulli_laplace(4, 1).triple;
    CHECK(k4.size() == bl.size());
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) CHECK(k4.rate(x, y) == doctest::Approx(bl.rate(x, y)));
    CHECK(spectral_gap(k4) == doctest::Approx(spectral_gap(bl)).epsilon(1e-12));

    const MarkovTriple one = build_triple({"*"}, {}, {1.0});
    const MarkovTriple p1 = product_chain(k4, one);
    CHECK(p1.size() == 4);
    CHECK(spectral_gap(p1) == doctest::Approx(spectral_gap(k4)).epsilon(1e-12));

    const MarkovTriple sq = product_chain(complete_graph(2), complete_graph(2));
    CHECK(sq.size() == 4);
    CHECK(sq.labels()[1] == "(0,1)");
    CHECK(spectral_gap(sq) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(enumerate_squares(sq).size() == 1);
    CHECK(enumerate_chordless_squares(sq).size() == 1);
    CHECK(enumerate_triangles(sq).empty());

    // gap of a product is the smaller factor gap
    const MarkovTriple p = product_chain(complete_graph(3), random_transposition(3).triple);
    CHECK(spectral_gap(p) == doctest::Approx(std::min(spectral_gap(complete_graph(3)),
                                                      spectral_gap(random_transposition(3).triple)))
                                 .epsilon(1e-10));
}

TEST_CASE("triangle and square enumeration") {
    CHECK(enumerate_triangles(bernoulli_laplace(4, 2).triple).size() == 8);
    CHECK(enumerate_triangles(complete_graph(5)).size() == 10);
    for (int n = 2; n <= 5; ++n) CHECK(enumerate_triangles(random_transposition(n).triple).empty());
    // K4 has three 4-cycles, all with chords
    CHECK(enumerate_squares(complete_graph(4)).size() == 3);
    CHECK(enumerate_chordless_squares(complete_graph(4)).empty());
    for (const auto& s : enumerate_squares(random_transposition(4).triple)) {
        CHECK(s.kind == SubgraphKind::Square);
        CHECK(std::set<int>(s.cycle.begin(), s.cycle.end()).size() == 4);
    }
}

TEST_CASE("Bernoulli-Laplace local structure") {
    for (int n = 3; n <= 6; ++n)
        for (int k = 1; k < n; ++k) {
            const auto m = bernoulli_laplace(n, k);
            const MarkovTriple& t = m.triple;
            for (const Edge& e : t.edges()) REQUIRE(common_neighbours(t, e.u, e.v) == n - 2);
            const PairClassification pc = classify_pairs(m);
            CHECK(pc.p1.size() + pc.p2.size() == adjacent_pairs(t).size());
            for (const auto& p : pc.p1) REQUIRE(t.adjacent(p.first, p.second));
            for (const auto& p : pc.p2) {
                REQUIRE_FALSE(t.adjacent(p.first, p.second));
                const auto [all, chordless] = squares_through(t, p);
                // three 4-cycles through each such pair, exactly one without chords
                REQUIRE(all == 3);
                REQUIRE(chordless == 1);
            }
        }
}

TEST_CASE("random transposition local structure") {
    for (int n = 3; n <= 5; ++n) {
        const auto m = random_transposition(n);
        const MarkovTriple& t = m.triple;
        const PairClassification pc = classify_pairs(m);
        CHECK(pc.p1.size() + pc.p2.size() == adjacent_pairs(t).size());
        for (const auto& p : adjacent_pairs(t)) {
            // disjoint moves close one square, overlapping ones two
            const auto [all, chordless] = squares_through(t, p);
            const bool disjoint = std::find(pc.p1.begin(), pc.p1.end(), p) != pc.p1.end();
            REQUIRE(all == (disjoint ? 1 : 2));
            REQUIRE(chordless == all);
        }
        // disjoint transpositions commute: tau1 tau2 sigma = tau2 tau1 sigma
        const auto& s = m.states[0];
        std::vector<int> t01(static_cast<std::size_t>(n)), t23(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) t01[static_cast<std::size_t>(i)] = t23[static_cast<std::size_t>(i)] = i;
        std::swap(t01[0], t01[1]);
        if (n >= 4) {
            std::swap(t23[2], t23[3]);
            CHECK(compose(t01, compose(t23, s)) == compose(t23, compose(t01, s)));
        }
    }
    for (int n = 3; n <= 4; ++n) {
        const auto m = random_transposition(n);
        const PairClassification pc = classify_pairs(m);
        const std::set<AdjacentPair> p1(pc.p1.begin(), pc.p1.end());
        for (const auto& sq : enumerate_squares(m.triple)) {
            const auto corners = cycle_pairs(sq);
            const bool first = p1.count(corners.front()) > 0;
            for (const auto& c : corners) REQUIRE((p1.count(c) > 0) == first);
        }
    }
}
