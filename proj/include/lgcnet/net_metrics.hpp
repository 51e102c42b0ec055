#pragma once

#include "lgcnet/graph_filter.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgcnet {

enum class CentralityKind { strength, eigenvector };

std::string_view to_string(CentralityKind k);

struct CentralityVector {
    CentralityKind kind = CentralityKind::strength;
    std::vector<std::string> tickers;
    std::vector<double> values;
    /// Node indices by descending value; ties broken by ticker name.
    std::vector<std::size_t> ranking;
    /// Leading eigenvalue of the filtered weight matrix (eigenvector kind only).
    double eigenvalue = 0.0;

    std::vector<std::string> ranked_tickers() const;
};

/// Row-stochastic random-walk matrix p_ij = w_ij / s_i (dense, row-major).
struct TransitionMatrix {
    std::size_t n = 0;
    std::vector<double> probs;

    double at(std::size_t i, std::size_t j) const { return probs[i * n + j]; }
    std::span<const double> row(std::size_t i) const { return {probs.data() + i * n, n}; }
};

/// Filtered weights as a dense symmetric matrix with zeros off the edge set.
std::vector<double> dense_weights(const FilteredNetwork& net);

CentralityVector strength(const FilteredNetwork& net);

struct EigenOptions {
    long max_iter = 2'000'000;
    double tol = 1e-10;  // on ||W v - lambda v||_inf
};

/// Leading eigenvector (unit L2 norm, nonnegative) by power iteration on
/// W + c I with c the maximum strength, which keeps bipartite graphs (trees)
/// from oscillating. Throws Error on negative weights or non-convergence.
CentralityVector eigenvector_centrality(const FilteredNetwork& net, const EigenOptions& opt = {});

/// Per-edge sqrt(2 (1 - w)), in edge order.
std::vector<double> distance_weights(const FilteredNetwork& net);

/// Shortest-path distances from `source` over edge distances.
std::vector<double> shortest_path_lengths(const FilteredNetwork& net, std::size_t source);

/// Predecessor of every node on a shortest-path tree rooted at `source`
/// (the source maps to itself). Equal-length alternatives resolve to the
/// lowest predecessor index.
std::vector<std::size_t> shortest_path_tree(const FilteredNetwork& net, std::size_t source);

/// Mean shortest-path length over ordered node pairs. Throws Error when the
/// network is disconnected.
double avg_shortest_path(const FilteredNetwork& net, unsigned workers = 1);

/// Throws Error on a node with zero strength or a negative edge weight.
TransitionMatrix transition_matrix(const FilteredNetwork& net);

enum class TsallisForm {
    standard,  // (1 - sum p^beta) / (beta - 1)
    literal,   // log(1 - sum p^beta) / (beta - 1), NaN where the argument is <= 0
};

struct NodeEntropies {
    std::vector<double> shannon;
    std::vector<double> renyi;
    std::vector<double> tsallis;
};

/// Throws Error unless 0 < beta < 1.
NodeEntropies node_entropies(const TransitionMatrix& p, double beta, TsallisForm form = TsallisForm::standard);

/// pi_i = s_i / sum s, checked against pi = pi P (residual <= 1e-10).
std::vector<double> stationary_distribution(const TransitionMatrix& p, const FilteredNetwork& net);

double network_entropy(std::span<const double> node_values, std::span<const double> pi);

struct EntropyReport {
    double beta = 0.1;
    NodeEntropies node;
    double network_shannon = 0.0;
    double network_renyi = 0.0;
    double network_tsallis = 0.0;
    std::vector<double> stationary;
};

EntropyReport entropy_report(const FilteredNetwork& net, double beta, TsallisForm form = TsallisForm::standard);

/// Size of the intersection of the two top-k ticker sets. Throws Error if
/// k exceeds either vector's size or the ticker universes differ.
std::size_t top_k_overlap(const CentralityVector& a, const CentralityVector& b, std::size_t k = 10);

}  // namespace lgcnet
