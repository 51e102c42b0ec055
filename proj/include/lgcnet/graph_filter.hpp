#pragma once

#include "lgcnet/dependence.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lgcnet {

enum class FilterKind { mst, pmfg, tmfg };

std::string_view to_string(FilterKind f);
FilterKind parse_filter_kind(std::string_view s);

struct Edge {
    std::size_t i = 0;  // i < j, indices into FilteredNetwork::tickers
    std::size_t j = 0;
    double weight = 0.0;
    double distance = 0.0;  // sqrt(2 (1 - weight))
};

struct FilteredNetwork {
    FilterKind filter = FilterKind::mst;
    WeightKind kind = WeightKind::pearson;
    std::vector<std::string> tickers;   // retained nodes
    std::vector<Edge> edges;            // sorted by (i, j)
    std::vector<std::string> excluded;  // nodes without a single valid entry

    std::size_t n_nodes() const { return tickers.size(); }
};

/// sqrt(2 (1 - w)); throws Error when w > 1 or w is NaN.
double edge_distance(double w);

/// Maximum-weight spanning tree (Kruskal, lowest (i, j) first among ties).
FilteredNetwork mst(const WeightMatrix& w);

/// Greedy descending-weight insertion subject to planarity, 3 (N - 2) edges.
FilteredNetwork pmfg(const WeightMatrix& w);

/// Triangulated maximally filtered graph grown from a seed tetrahedron.
FilteredNetwork tmfg(const WeightMatrix& w);

FilteredNetwork apply_filter(FilterKind f, const WeightMatrix& w);

/// Planarity of a simple undirected graph on nodes 0..n-1.
bool is_planar(const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t n);

}  // namespace lgcnet
