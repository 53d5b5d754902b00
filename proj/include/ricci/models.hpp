#pragma once

#include "ricci/curvature.hpp"
#include "ricci/markov.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace ricci {

/// Site move i -> j: the particle at site i jumps to the empty site j.
struct SiteMove {
    int from = 0;
    int to = 0;
};

/// Bernoulli-Laplace model: k particles on n sites, simple random walk on the
/// slice {x in {0,1}^n : |x| = k}. States are sorted k-subsets of {0..n-1}.
struct BernoulliLaplaceModel {
    int n = 0;
    int k = 0;
    int degree = 0;                       // k (n - k)
    std::vector<std::vector<int>> states;  // occupied sites per state
    MarkovTriple triple;
    std::vector<SiteMove> arc_moves;       // generator s_ij behind each arc
};

/// Transposition tau_ij, i < j.
struct Transposition {
    int i = 0;
    int j = 0;
};

/// Random transposition walk on S_n: sigma ~ tau o sigma. States are
/// permutations in one-line notation (sigma[i] is the image of i).
struct RandomTranspositionModel {
    int n = 0;
    int degree = 0;  // n (n - 1) / 2
    std::vector<std::vector<int>> states;
    MarkovTriple triple;
    std::vector<Transposition> arc_moves;
};

inline constexpr int kMaxTranspositionN = 8;

BernoulliLaplaceModel bernoulli_laplace(int n, int k);
RandomTranspositionModel random_transposition(int n);
/// Simple random walk on K_n: uniform pi, rates 1/(n-1).
MarkovTriple complete_graph(int n);
/// Product chain on X1 x X2: moves change one coordinate with that factor's
/// rate; pi = pi1 (x) pi2. State (a, b) has index a * |X2| + b.
MarkovTriple product_chain(const MarkovTriple& first, const MarkovTriple& second);

/// All triangles, each once (cycle starts at its smallest vertex, second < third).
std::vector<SubgraphPattern> enumerate_triangles(const MarkovTriple& t);
/// All 4-cycles, each once under rotation and reflection (canonical key).
std::vector<SubgraphPattern> enumerate_squares(const MarkovTriple& t);
/// 4-cycles without chords.
std::vector<SubgraphPattern> enumerate_chordless_squares(const MarkovTriple& t);

/// Ordered pair of distinct adjacent edges {x, first}, {x, second}.
struct AdjacentPair {
    int shared = 0;
    int first = 0;
    int second = 0;
    friend bool operator==(const AdjacentPair&, const AdjacentPair&) = default;
    friend auto operator<=>(const AdjacentPair&, const AdjacentPair&) = default;
};

/// Every ordered pair of distinct adjacent edges.
std::vector<AdjacentPair> adjacent_pairs(const MarkovTriple& t);

/// Partition of the adjacent pairs into the two classes of the curvature
/// proofs. BL: p1 = overlapping moves (same source or same target site).
/// RT: p1 = disjoint transpositions.
struct PairClassification {
    std::vector<AdjacentPair> p1;
    std::vector<AdjacentPair> p2;
};

PairClassification classify_pairs(const BernoulliLaplaceModel& m);
PairClassification classify_pairs(const RandomTranspositionModel& m);

/// The four ordered adjacent pairs at the corners of a cycle, in both orders.
std::vector<AdjacentPair> cycle_pairs(const SubgraphPattern& g);

std::size_t binomial(int n, int k);

}  // namespace ricci
