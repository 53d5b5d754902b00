#include "ricci/models.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ricci {

namespace {

constexpr std::size_t kMaxStates = 200000;

std::string join_sites(const std::vector<int>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + std::to_string(v[i]);
    }
    return s + "}";
}

std::string join_word(const std::vector<int>& v) {
    std::string s;
    for (int x : v) {
        s += std::to_string(x + 1);
    }
    return s;
}

// Sorted neighbour lists of the support graph.
std::vector<std::vector<int>> adjacency(const MarkovTriple& t) {
    std::vector<std::vector<int>> adj(t.size());
    for (std::size_t x = 0; x < t.size(); ++x) {
        for (const Arc& a : t.out(static_cast<int>(x))) {
            adj[x].push_back(a.to);
        }
    }
    return adj;
}

}  // namespace

std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > static_cast<unsigned __int128>(SIZE_MAX)) {
            throw std::overflow_error("binomial: overflow");
        }
    }
    return static_cast<std::size_t>(r);
}

BernoulliLaplaceModel bernoulli_laplace(int n, int k) {
    if (n < 2 || k < 1 || k > n - 1) {
        throw std::out_of_range("bernoulli_laplace: need n > 1 and 1 <= k <= n-1 (got n=" +
                                std::to_string(n) + ", k=" + std::to_string(k) + ")");
    }
    if (n > 30 || binomial(n, k) > kMaxStates) {
        throw std::out_of_range("bernoulli_laplace: state space too large");
    }
    BernoulliLaplaceModel m;
    m.n = n;
    m.k = k;
    m.degree = k * (n - k);

    // k-subsets in lexicographic order.
    std::vector<int> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), 0);
    std::map<unsigned, int> index;  // occupation bitmask -> state
    while (true) {
        unsigned mask = 0;
        for (int s : subset) {
            mask |= 1u << s;
        }
        index.emplace(mask, static_cast<int>(m.states.size()));
        m.states.push_back(subset);
        int i = k - 1;
        while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - k + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++subset[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) {
            subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    const double rate = 1.0 / static_cast<double>(m.degree);
    std::vector<RateEntry> rates;
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < m.states.size(); ++x) {
        unsigned mask = 0;
        for (int s : m.states[x]) {
            mask |= 1u << s;
        }
        labels.push_back(join_sites(m.states[x]));
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1u << i))) {
                continue;
            }
            for (int j = 0; j < n; ++j) {
                if (mask & (1u << j)) {
                    continue;
                }
                const unsigned moved = (mask & ~(1u << i)) | (1u << j);
                rates.push_back({static_cast<int>(x), index.at(moved), rate});
            }
        }
    }
    const double w = 1.0 / static_cast<double>(m.states.size());
    m.triple = build_triple(std::move(labels), std::move(rates),
                            std::vector<double>(m.states.size(), w));

    m.arc_moves.resize(m.triple.arc_count());
    for (std::size_t a = 0; a < m.triple.arc_count(); ++a) {
        const auto& from = m.states[static_cast<std::size_t>(m.triple.arc_source(a))];
        const auto& to = m.states[static_cast<std::size_t>(m.triple.arc(a).to)];
        std::vector<int> vacated;
        std::vector<int> filled;
        std::set_difference(from.begin(), from.end(), to.begin(), to.end(), std::back_inserter(vacated));
        std::set_difference(to.begin(), to.end(), from.begin(), from.end(), std::back_inserter(filled));
        m.arc_moves[a] = {vacated.at(0), filled.at(0)};
    }
    return m;
}

RandomTranspositionModel random_transposition(int n) {
    if (n < 2 || n > kMaxTranspositionN) {
        throw std::out_of_range("random_transposition: need 1 < n <= " +
                                std::to_string(kMaxTranspositionN) + " (got " + std::to_string(n) + ")");
    }
    RandomTranspositionModel m;
    m.n = n;
    m.degree = n * (n - 1) / 2;

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::map<std::vector<int>, int> index;
    do {
        index.emplace(perm, static_cast<int>(m.states.size()));
        m.states.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    const double rate = 2.0 / static_cast<double>(n * (n - 1));
    std::vector<RateEntry> rates;
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < m.states.size(); ++x) {
        labels.push_back(join_word(m.states[x]));
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                // tau_ij o sigma swaps the values i and j in one-line notation.
                std::vector<int> next = m.states[x];
                for (int& v : next) {
                    v = v == i ? j : (v == j ? i : v);
                }
                rates.push_back({static_cast<int>(x), index.at(next), rate});
            }
        }
    }
    const double w = 1.0 / static_cast<double>(m.states.size());
    m.triple = build_triple(std::move(labels), std::move(rates),
                            std::vector<double>(m.states.size(), w));

    m.arc_moves.resize(m.triple.arc_count());
    for (std::size_t a = 0; a < m.triple.arc_count(); ++a) {
        const auto& from = m.states[static_cast<std::size_t>(m.triple.arc_source(a))];
        const auto& to = m.states[static_cast<std::size_t>(m.triple.arc(a).to)];
        for (std::size_t p = 0; p < from.size(); ++p) {
            if (from[p] != to[p]) {
                m.arc_moves[a] = {std::min(from[p], to[p]), std::max(from[p], to[p])};
                break;
            }
        }
    }
    return m;
}

MarkovTriple complete_graph(int n) {
    if (n < 2) {
        throw std::out_of_range("complete_graph: need n >= 2 (got " + std::to_string(n) + ")");
    }
    if (static_cast<std::size_t>(n) > kMaxStates) {
        throw std::out_of_range("complete_graph: state space too large");
    }
    const double rate = 1.0 / static_cast<double>(n - 1);
    std::vector<RateEntry> rates;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x != y) {
                rates.push_back({x, y, rate});
            }
        }
    }
    return build_triple({}, std::move(rates), std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
}

MarkovTriple product_chain(const MarkovTriple& first, const MarkovTriple& second) {
    const std::size_t n1 = first.size();
    const std::size_t n2 = second.size();
    if (n1 * n2 > kMaxStates) {
        throw std::out_of_range("product_chain: state space too large");
    }
    auto id = [n2](std::size_t a, std::size_t b) { return static_cast<int>(a * n2 + b); };
    std::vector<std::string> labels;
    std::vector<double> weights;
    std::vector<RateEntry> rates;
    for (std::size_t a = 0; a < n1; ++a) {
        for (std::size_t b = 0; b < n2; ++b) {
            labels.push_back("(" + first.labels()[a] + "," + second.labels()[b] + ")");
            weights.push_back(first.weight(static_cast<int>(a)) * second.weight(static_cast<int>(b)));
            for (const Arc& arc : first.out(static_cast<int>(a))) {
                rates.push_back({id(a, b), id(static_cast<std::size_t>(arc.to), b), arc.rate});
            }
            for (const Arc& arc : second.out(static_cast<int>(b))) {
                rates.push_back({id(a, b), id(a, static_cast<std::size_t>(arc.to)), arc.rate});
            }
        }
    }
    return build_triple(std::move(labels), std::move(rates), std::move(weights));
}

// ---------------------------------------------------------------------------

std::vector<SubgraphPattern> enumerate_triangles(const MarkovTriple& t) {
    const auto adj = adjacency(t);
    std::vector<SubgraphPattern> out;
    for (std::size_t u = 0; u < t.size(); ++u) {
        for (int v : adj[u]) {
            if (v <= static_cast<int>(u)) {
                continue;
            }
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (w > v && std::binary_search(adj[u].begin(), adj[u].end(), w)) {
                    out.push_back({SubgraphKind::Triangle, {static_cast<int>(u), v, w}});
                }
            }
        }
    }
    return out;
}

namespace {

std::vector<SubgraphPattern> squares_impl(const MarkovTriple& t, bool chordless_only) {
    const auto adj = adjacency(t);
    std::vector<SubgraphPattern> out;
    // Canonical form: a is the smallest vertex, b < d are its cycle neighbours.
    for (std::size_t ai = 0; ai < t.size(); ++ai) {
        const int a = static_cast<int>(ai);
        const auto& na = adj[ai];
        for (std::size_t p = 0; p < na.size(); ++p) {
            const int b = na[p];
            if (b <= a) {
                continue;
            }
            for (std::size_t q = p + 1; q < na.size(); ++q) {
                const int d = na[q];
                const auto& nb = adj[static_cast<std::size_t>(b)];
                const auto& nd = adj[static_cast<std::size_t>(d)];
                std::vector<int> common;
                std::set_intersection(nb.begin(), nb.end(), nd.begin(), nd.end(), std::back_inserter(common));
                for (int c : common) {
                    if (c <= a) {
                        continue;
                    }
                    if (chordless_only && (t.adjacent(a, c) || t.adjacent(b, d))) {
                        continue;
                    }
                    out.push_back({SubgraphKind::Square, {a, b, c, d}});
                }
            }
        }
    }
    return out;
}

}  // namespace

std::vector<SubgraphPattern> enumerate_squares(const MarkovTriple& t) { return squares_impl(t, false); }

std::vector<SubgraphPattern> enumerate_chordless_squares(const MarkovTriple& t) {
    return squares_impl(t, true);
}

std::vector<AdjacentPair> adjacent_pairs(const MarkovTriple& t) {
    std::vector<AdjacentPair> out;
    for (std::size_t x = 0; x < t.size(); ++x) {
        const auto row = t.out(static_cast<int>(x));
        for (const Arc& a : row) {
            for (const Arc& b : row) {
                if (a.to != b.to) {
                    out.push_back({static_cast<int>(x), a.to, b.to});
                }
            }
        }
    }
    return out;
}

std::vector<AdjacentPair> cycle_pairs(const SubgraphPattern& g) {
    std::vector<AdjacentPair> out;
    const std::size_t len = g.cycle.size();
    for (std::size_t i = 0; i < len; ++i) {
        const int x = g.cycle[i];
        const int next = g.cycle[(i + 1) % len];
        const int prev = g.cycle[(i + len - 1) % len];
        out.push_back({x, next, prev});
        out.push_back({x, prev, next});
    }
    return out;
}

PairClassification classify_pairs(const BernoulliLaplaceModel& m) {
    PairClassification out;
    for (const AdjacentPair& p : adjacent_pairs(m.triple)) {
        const SiteMove& a = m.arc_moves[m.triple.find_arc(p.shared, p.first)];
        const SiteMove& b = m.arc_moves[m.triple.find_arc(p.shared, p.second)];
        (a.from == b.from || a.to == b.to ? out.p1 : out.p2).push_back(p);
    }
    return out;
}

PairClassification classify_pairs(const RandomTranspositionModel& m) {
    PairClassification out;
    for (const AdjacentPair& p : adjacent_pairs(m.triple)) {
        const Transposition& a = m.arc_moves[m.triple.find_arc(p.shared, p.first)];
        const Transposition& b = m.arc_moves[m.triple.find_arc(p.shared, p.second)];
        const bool disjoint = a.i != b.i && a.i != b.j && a.j != b.i && a.j != b.j;
        (disjoint ? out.p1 : out.p2).push_back(p);
    }
    return out;
}

}  // namespace ricci
