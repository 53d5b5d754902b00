// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "oracles.hpp"
#include "ricci/cli.hpp"
#include "ricci/curvature.hpp"
#include "ricci/estimator.hpp"
#include "ricci/models.hpp"
#include "ricci/transport.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ricci;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

int failures = 0;

void report(int id, const std::function<Verdict()>& body, double budget = 0.0) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.fail(std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    if (budget > 0 && dt >= budget) v.fail(fmt("took %.1f s", dt) + " over the budget");
    if (!v.pass) ++failures;
    std::printf("criterion %d: %s (%.2f s)%s%s\n", id, v.pass ? "PASS" : "FAIL", dt, v.detail.empty() ? "" : " ",
                v.detail.c_str());
    std::fflush(stdout);
}

std::vector<MarkovTriple> bound_models() {
    return {complete_graph(5), bernoulli_laplace(4, 2).triple, bernoulli_laplace(5, 2).triple,
            bernoulli_laplace(6, 3).triple, random_transposition(3).triple, random_transposition(4).triple};
}

Verdict criterion1() {
    Verdict v;
    for (int n = 2; n <= 8; ++n)
        for (int k = 1; k < n; ++k) {
            const Certificate c = certify_bl(n, k);
            const std::string name = "bl(" + std::to_string(n) + "," + std::to_string(k) + ")";
            if (!(c.kappa == Rational(n + 2, 2 * k * (n - k)))) v.fail(name + " gave " + c.kappa.str());
            if (n > kEnumerateBlUpTo) continue;
            if (!c.enumerated) v.fail(name + " was not enumerated");
            for (const char* fact : {"edge-in-(n-2)-triangles", "P2-pair-in-2-squares"}) {
                bool found = false;
                for (const auto& f : c.facts)
                    if (f.name == fact) {
                        found = true;
                        if (!f.holds) v.fail(name + ": " + fact + " is false (" + f.detail + ")");
                    }
                if (!found) v.fail(name + ": " + fact + " not checked");
            }
        }
    return v;
}

Verdict criterion2() {
    Verdict v;
    for (int n = 2; n <= 6; ++n) {
        const Certificate c = certify_rt(n);
        const std::string name = "rt(" + std::to_string(n) + ")";
        if (!(c.kappa == Rational(4, n * (n - 1)))) v.fail(name + " gave " + c.kappa.str());
        if (n <= kEnumerateRtUpTo && (!c.enumerated || !c.all_facts_hold())) v.fail(name + ": facts not verified");
    }
    return v;
}

Verdict criterion3() {
    Verdict v;
    double worst = 0;
    for (int n = 2; n <= 8; ++n)
        for (int k = 1; k < n; ++k) {
            const double err = std::abs(spectral_gap(bernoulli_laplace(n, k).triple) - double(n) / (k * (n - k)));
            worst = std::max(worst, err);
            if (err > 1e-9) v.fail("bl(" + std::to_string(n) + "," + std::to_string(k) + ")" + fmt(" off by %.3g", err));
        }
    for (int n = 2; n <= 5; ++n) {
        const double err = std::abs(spectral_gap(random_transposition(n).triple) - 2.0 / (n - 1));
        worst = std::max(worst, err);
        if (err > 1e-9) v.fail("rt(" + std::to_string(n) + ")" + fmt(" off by %.3g", err));
    }
    if (v.pass) v.detail = fmt("max error %.3g", worst);
    return v;
}

Verdict criterion4() {
    Verdict v;
    std::mt19937_64 rng(4);
    const std::vector<std::pair<MarkovTriple, Rational>> cases{
        {complete_graph(5), certify_bl(5, 1).kappa},          {bernoulli_laplace(4, 2).triple, certify_bl(4, 2).kappa},
        {bernoulli_laplace(5, 2).triple, certify_bl(5, 2).kappa}, {bernoulli_laplace(6, 3).triple, certify_bl(6, 3).kappa},
        {random_transposition(3).triple, certify_rt(3).kappa},    {random_transposition(4).triple, certify_rt(4).kappa}};
    double worst_gap = 1e300, worst_rel = 0;
    for (const auto& [t, kappa] : cases) {
        const auto n = static_cast<Eigen::Index>(t.size());
        const double k = kappa.to_double();
        for (int i = 0; i < 1000; ++i) {
            const Eigen::VectorXd rho = oracle::random_positive(rng, n, 1.5);
            const Potential psi = oracle::random_vector(rng, n);
            const double a = a_form(t, rho, psi), b = b_form_direct(t, rho, psi);
            double sum = 0;
            for (const auto& term : b_edge_terms(t, rho, psi)) sum += term.value;
            const double rel = std::abs(sum - b) / std::max(std::abs(b), 1e-300);
            worst_gap = std::min(worst_gap, b - k * a);
            worst_rel = std::max(worst_rel, rel);
        }
    }
    if (worst_gap < -1e-10) v.fail(fmt("B - kappa A reached %.3g", worst_gap));
    if (worst_rel > 1e-10) v.fail(fmt("edge sum off by %.3g relative", worst_rel));
    if (v.pass) v.detail = fmt("min B - kappa A %.3g", worst_gap) + fmt(", max relative edge-sum error %.3g", worst_rel);
    return v;
}

Verdict criterion5() {
    Verdict v;
    std::mt19937_64 rng(5);
    std::bernoulli_distribution keep(0.3);
    double on = 1e300, tri = 1e300, id = 0, parts = 1e300;
    for (const auto& t : bound_models()) {
        const RegularStructure rs = regular_structure(t);
        const double d = static_cast<double>(rs.degree);
        const auto n = static_cast<Eigen::Index>(t.size());
        const auto tris = enumerate_triangles(t);
        const auto sqs = enumerate_squares(t);
        for (int i = 0; i < 200; ++i) {
            const Eigen::VectorXd rho = oracle::random_positive(rng, n, 2.0);
            const Potential psi = oracle::random_vector(rng, n);
            std::vector<EdgeKey> g;
            for (const Edge& e : t.edges())
                if (keep(rng)) g.push_back({e.u, e.v});
            on = std::min(on, b_on_edges(t, g, rho, psi, FormPart::On) - 2 / d * a_on_edges(t, g, rho, psi));
            if (!tris.empty()) {
                const auto& tr = tris[std::uniform_int_distribution<std::size_t>(0, tris.size() - 1)(rng)];
                tri = std::min(tri, b_subgraph(t, tr, rho, psi, FormPart::Off) - a_subgraph(t, tr, rho, psi) / (2 * d));
            }
            if (!sqs.empty()) {
                const auto& sq = sqs[std::uniform_int_distribution<std::size_t>(0, sqs.size() - 1)(rng)];
                const SquareIdentity s = square_identity(t, sq, rho, psi);
                const double off = b_subgraph(t, sq, rho, psi, FormPart::Off);
                id = std::max(id, std::abs(s.total - off));
                parts = std::min({parts, s.alternating, s.deficit});
            }
        }
    }
    if (on < -1e-12) v.fail(fmt("on-diagonal slack %.3g", on));
    if (tri < -1e-12) v.fail(fmt("triangle slack %.3g", tri));
    if (id > 1e-12) v.fail(fmt("square identity off by %.3g", id));
    if (parts < -1e-12) v.fail(fmt("square summand %.3g", parts));
    if (v.pass) v.detail = fmt("square identity max error %.3g", id);
    return v;
}

Verdict criterion6() {
    Verdict v;
    // rho = 1 with |AS| = 0 on a square of the hexagon
    const MarkovTriple h = s3_hexagon();
    const auto sqs = enumerate_squares(h);
    if (sqs.empty()) {
        v.fail("hexagon has no square");
        return v;
    }
    Potential psi = Potential::Zero(6);
    psi[sqs[0].cycle[0]] = 1.0;
    psi[sqs[0].cycle[1]] = 1.0;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(6);
    const double off = b_subgraph(h, sqs[0], one, psi, FormPart::Off);
    const double a = a_subgraph(h, sqs[0], one, psi);
    if (alternating_sum(sqs[0], psi) != 0.0 || std::abs(off) > 1e-15 || !(a > 0))
        v.fail(fmt("sharp square case gave B_off = %.3g", off));

    std::vector<double> ratios;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const CounterexampleRow r = s3_counterexample(eps);
        ratios.push_back(r.ratio);
        if (r.ratio < -1e-12) v.fail(fmt("negative ratio at eps %.0e", eps));
    }
    if (!(ratios.back() < 0.1 * ratios.front()))
        v.fail(fmt("ratio(1e-4) = %.6g", ratios.back()) + fmt(" is not below 0.1 ratio(1e-1) = %.6g", 0.1 * ratios.front()));
    return v;
}

Verdict criterion7() {
    Verdict v;
    std::vector<std::pair<std::string, MarkovTriple>> models;
    for (int n = 2; n <= 8; ++n) models.emplace_back("complete(" + std::to_string(n) + ")", complete_graph(n));
    for (int n = 2; n <= 10; ++n)
        for (int k = 1; k < n; ++k)
            if (binomial(n, k) <= 120)
                models.emplace_back("bl(" + std::to_string(n) + "," + std::to_string(k) + ")", bernoulli_laplace(n, k).triple);
    for (int n = 2; n <= 5; ++n) models.emplace_back("rt(" + std::to_string(n) + ")", random_transposition(n).triple);
    models.emplace_back("product(complete(2),complete(2))", product_chain(complete_graph(2), complete_graph(2)));
    models.emplace_back("product(complete(3),rt(3))", product_chain(complete_graph(3), random_transposition(3).triple));
    models.emplace_back("product(bl(4,2),complete(2))", product_chain(bernoulli_laplace(4, 2).triple, complete_graph(2)));

    std::mt19937_64 rng(7);
    int certified = 0;
    for (const auto& [name, t] : models) {
        const double lambda = spectral_gap(t);
        const bool small = t.size() <= 30;
        const KappaEstimate est =
            estimate_kappa(t, {.starts = small ? 4 : 2, .max_iterations = small ? 60 : 20, .seed = 7});
        std::optional<Certificate> cert;
        try {
            cert = certify_generic(t);
        } catch (const CertificationError&) {
        }
        if (est.kappa > lambda + 1e-6) v.fail(name + fmt(": estimate %.9g above the gap", est.kappa));
        if (!cert) continue;
        ++certified;
        const double kc = cert->kappa.to_double();
        if (kc > est.kappa + 1e-6) v.fail(name + ": certificate " + cert->kappa.str() + fmt(" above estimate %.9g", est.kappa));
        const HeatSemigroup heat(t);
        const auto n = static_cast<Eigen::Index>(t.size());
        for (int i = 0; i < 5; ++i) {
            const Density d = Density::normalized(t, oracle::random_positive(rng, n, 1.5));
            const double h0 = entropy(t, d);
            for (double time : {0.05, 0.3, 1.0, 2.5})
                if (entropy(t, heat.apply(d, time)) > std::exp(-2 * kc * time) * h0 * (1 + 1e-8))
                    v.fail(name + fmt(": entropy decay fails at t = %.2f", time));
        }
    }
    if (v.pass) v.detail = std::to_string(models.size()) + " models, " + std::to_string(certified) + " certified";
    return v;
}

Verdict criterion8() {
    Verdict v;
    const MarkovTriple k2 = build_triple({}, {{0, 1, 1.0}, {1, 0, 1.0}}, {0.5, 0.5});
    const Eigen::VectorXd a = (Eigen::VectorXd(2) << 0.8, 1.2).finished();
    const Eigen::VectorXd b = (Eigen::VectorXd(2) << 1.2, 0.8).finished();

    // scalar control: W = int dr / sqrt(2 theta(r, 2 - r)), midpoint rule on a fine grid
    const int cells = 200000;
    double exact = 0;
    for (int i = 0; i < cells; ++i) {
        const double r = 0.8 + 0.4 * (i + 0.5) / cells;
        exact += 0.4 / cells / std::sqrt(2 * oracle::theta(r, 2 - r));
    }
    const TransportResult r = distance_upper(k2, a, b);
    if (std::abs(r.w_upper - exact) > 1e-3) v.fail(fmt("K2 W = %.9g", r.w_upper) + fmt(" against %.9g", exact));
    for (std::size_t i = 1; i < r.levels.size(); ++i)
        if (r.levels[i].w_upper > r.levels[i - 1].w_upper + 1e-12) v.fail("refinement increased W");
    if (distance_upper(k2, a, a).w_upper != 0.0) v.fail("W(rho, rho) != 0");

    const MarkovTriple bl = bernoulli_laplace(3, 1).triple;
    std::mt19937_64 rng(8);
    const TransportOptions small{.steps = 32, .max_steps = 64};
    double asym = 0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd x = Density::normalized(bl, oracle::random_positive(rng, 3, 0.5)).values();
        const Eigen::VectorXd y = Density::normalized(bl, oracle::random_positive(rng, 3, 0.5)).values();
        asym = std::max(asym, std::abs(distance_upper(bl, x, y, small).w_upper - distance_upper(bl, y, x, small).w_upper));
    }
    if (asym > 1e-4) v.fail(fmt("asymmetry %.3g", asym));

    const double kappa = certify_bl(3, 1).kappa.to_double();
    double worst = 1e300;
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd x = Density::normalized(bl, oracle::random_positive(rng, 3, 0.7)).values();
        const Eigen::VectorXd y = Density::normalized(bl, oracle::random_positive(rng, 3, 0.7)).values();
        const ConvexityReport c = convexity_check(bl, x, y, kappa);
        worst = std::min(worst, c.worst_slack + c.tolerance);
        if (!c.consistent) v.fail(fmt("convexity slack %.3g", c.worst_slack) + fmt(" below -%.3g", c.tolerance));
    }
    if (v.pass) v.detail = fmt("K2 error %.3g", std::abs(r.w_upper - exact)) + fmt(", min slack margin %.3g", worst);
    return v;
}

Verdict criterion9() {
    Verdict v;
    auto run = [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return std::to_string(code) + "\n" + out.str();
    };
    const std::vector<std::string> est{"--seed", "42", "estimate", "bl(5,2)", "--starts", "4", "--iterations", "50"};
    const std::vector<std::string> tr{"--seed", "42", "transport", "bl(4,2)", "--steps", "16", "--max-steps", "32"};
    for (const auto& args : {est, tr}) {
        const std::string first = run(args), second = run(args);
        if (first != second) v.fail(args[2] + " reports differ");
        if (first.rfind("0\n", 0) != 0) v.fail(args[2] + " failed");
    }
    return v;
}

}  // namespace

int main() {
    report(1, criterion1, 10.0);
    report(2, criterion2, 30.0);
    report(3, criterion3);
    report(4, criterion4, 60.0);
    report(5, criterion5);
    report(6, criterion6);
    report(7, criterion7);
    report(8, criterion8);
    report(9, criterion9);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
