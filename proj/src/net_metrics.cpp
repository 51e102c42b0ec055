#include "lgcnet/net_metrics.hpp"

#include "lgcnet/error.hpp"
#include "lgcnet/parallel.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace lgcnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Neighbor {
    std::size_t node;
    double weight;
    double distance;
};

std::vector<std::vector<Neighbor>> adjacency(const FilteredNetwork& net) {
    std::vector<std::vector<Neighbor>> adj(net.n_nodes());
    for (const auto& e : net.edges) {
        adj[e.i].push_back({e.j, e.weight, e.distance});
        adj[e.j].push_back({e.i, e.weight, e.distance});
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }
    return adj;
}

std::vector<std::size_t> rank_desc(const std::vector<double>& values, const std::vector<std::string>& tickers) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return tickers[a] < tickers[b];
    });
    return idx;
}

void dijkstra(const std::vector<std::vector<Neighbor>>& adj, std::size_t source, std::vector<double>& dist,
              std::vector<std::size_t>* pred) {
    const std::size_t n = adj.size();
    dist.assign(n, kInf);
    if (pred) pred->assign(n, n);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    if (pred) (*pred)[source] = source;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (const auto& nb : adj[u]) {
            const double nd = d + nb.distance;
            if (nd < dist[nb.node]) {
                dist[nb.node] = nd;
                if (pred) (*pred)[nb.node] = u;
                heap.emplace(nd, nb.node);
            } else if (pred && nd == dist[nb.node] && u < (*pred)[nb.node]) {
                (*pred)[nb.node] = u;
            }
        }
    }
}

}  // namespace

std::string_view to_string(CentralityKind k) { return k == CentralityKind::strength ? "strength" : "eigenvector"; }

std::vector<std::string> CentralityVector::ranked_tickers() const {
    std::vector<std::string> out;
    out.reserve(ranking.size());
    for (std::size_t i : ranking) out.push_back(tickers[i]);
    return out;
}

std::vector<double> dense_weights(const FilteredNetwork& net) {
    const std::size_t n = net.n_nodes();
    std::vector<double> w(n * n, 0.0);
    for (const auto& e : net.edges) w[e.i * n + e.j] = w[e.j * n + e.i] = e.weight;
    return w;
}

CentralityVector strength(const FilteredNetwork& net) {
    CentralityVector c;
    c.kind = CentralityKind::strength;
    c.tickers = net.tickers;
    c.values.assign(net.n_nodes(), 0.0);
    for (const auto& e : net.edges) {
        c.values[e.i] += e.weight;
        c.values[e.j] += e.weight;
    }
    c.ranking = rank_desc(c.values, c.tickers);
    c.eigenvalue = std::numeric_limits<double>::quiet_NaN();
    return c;
}

CentralityVector eigenvector_centrality(const FilteredNetwork& net, const EigenOptions& opt) {
    const std::size_t n = net.n_nodes();
    if (n == 0) throw Error("eigenvector_centrality: empty network");
    for (const auto& e : net.edges) {
        if (e.weight < 0.0) throw Error("eigenvector_centrality: negative edge weight");
    }
    const auto adj = adjacency(net);
    double shift = 0.0;
    for (const auto& list : adj) {
        double s = 0.0;
        for (const auto& nb : list) s += nb.weight;
        shift = std::max(shift, s);
    }

    auto multiply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (const auto& nb : adj[i]) s += nb.weight * v[nb.node];
            out[i] = s;
        }
    };

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), wv(n), next(n);
    for (long it = 0; it < opt.max_iter; ++it) {
        multiply(v, wv);
        const double lambda = std::inner_product(v.begin(), v.end(), wv.begin(), 0.0);
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(wv[i] - lambda * v[i]));
        if (resid <= opt.tol) {
            CentralityVector c;
            c.kind = CentralityKind::eigenvector;
            c.tickers = net.tickers;
            c.values = v;
            c.eigenvalue = lambda;
            c.ranking = rank_desc(c.values, c.tickers);
            return c;
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = wv[i] + shift * v[i];
            norm += next[i] * next[i];
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) throw Error("eigenvector_centrality: zero iterate");
        for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / norm;
    }
    throw Error("eigenvector_centrality: no convergence after " + std::to_string(opt.max_iter) + " iterations");
}

std::vector<double> distance_weights(const FilteredNetwork& net) {
    std::vector<double> d;
    d.reserve(net.edges.size());
    for (const auto& e : net.edges) d.push_back(edge_distance(e.weight));
    return d;
}

std::vector<double> shortest_path_lengths(const FilteredNetwork& net, std::size_t source) {
    std::vector<double> dist;
    dijkstra(adjacency(net), source, dist, nullptr);
    return dist;
}

std::vector<std::size_t> shortest_path_tree(const FilteredNetwork& net, std::size_t source) {
    std::vector<double> dist;
    std::vector<std::size_t> pred;
    dijkstra(adjacency(net), source, dist, &pred);
    return pred;
}

double avg_shortest_path(const FilteredNetwork& net, unsigned workers) {
    const std::size_t n = net.n_nodes();
    if (n < 2) throw Error("avg_shortest_path: need at least 2 nodes");
    const auto adj = adjacency(net);
    std::vector<double> row_sum(n, 0.0);
    std::vector<std::uint8_t> reached_all(n, 1);
    parallel_for(n, workers, [&](std::size_t s) {
        std::vector<double> dist;
        dijkstra(adj, s, dist, nullptr);
        double sum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == s) continue;
            if (dist[t] == kInf) {
                reached_all[s] = 0;
                return;
            }
            sum += dist[t];
        }
        row_sum[s] = sum;
    });
    if (std::find(reached_all.begin(), reached_all.end(), 0) != reached_all.end()) {
        throw Error("avg_shortest_path: network is disconnected");
    }
    double total = 0.0;
    for (double r : row_sum) total += r;
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

TransitionMatrix transition_matrix(const FilteredNetwork& net) {
    const std::size_t n = net.n_nodes();
    TransitionMatrix p;
    p.n = n;
    p.probs = dense_weights(net);
    for (const auto& e : net.edges) {
        if (e.weight < 0.0) {
            throw Error("transition_matrix: negative edge weight between " + net.tickers[e.i] + " and " +
                        net.tickers[e.j]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += p.probs[i * n + j];
        if (!(s > 0.0)) throw Error("transition_matrix: zero-strength node " + net.tickers[i]);
        for (std::size_t j = 0; j < n; ++j) p.probs[i * n + j] /= s;
    }
    return p;
}

NodeEntropies node_entropies(const TransitionMatrix& p, double beta, TsallisForm form) {
    if (!(beta > 0.0 && beta < 1.0)) throw Error("node_entropies: beta must lie in (0, 1)");
    NodeEntropies h;
    h.shannon.resize(p.n);
    h.renyi.resize(p.n);
    h.tsallis.resize(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        double hs = 0.0, pow_sum = 0.0;
        for (double q : p.row(i)) {
            if (q <= 0.0) continue;
            hs -= q * std::log(q);
            pow_sum += std::pow(q, beta);
        }
        h.shannon[i] = hs;
        h.renyi[i] = std::log(pow_sum) / (1.0 - beta);
        if (form == TsallisForm::standard) {
            h.tsallis[i] = (1.0 - pow_sum) / (beta - 1.0);
        } else {
            const double arg = 1.0 - pow_sum;
            h.tsallis[i] = arg > 0.0 ? std::log(arg) / (beta - 1.0) : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return h;
}

std::vector<double> stationary_distribution(const TransitionMatrix& p, const FilteredNetwork& net) {
    const CentralityVector s = strength(net);
    const double total = std::accumulate(s.values.begin(), s.values.end(), 0.0);
    if (!(total > 0.0)) throw Error("stationary_distribution: zero total strength");
    std::vector<double> pi(s.values.size());
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = s.values[i] / total;

    double resid = 0.0;
    for (std::size_t j = 0; j < p.n; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < p.n; ++i) v += pi[i] * p.at(i, j);
        resid = std::max(resid, std::abs(v - pi[j]));
    }
    if (resid > 1e-10) {
        throw Error("stationary_distribution: residual " + std::to_string(resid) + " exceeds 1e-10");
    }
    return pi;
}

double network_entropy(std::span<const double> node_values, std::span<const double> pi) {
    if (node_values.size() != pi.size()) throw Error("network_entropy: length mismatch");
    double h = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) h += pi[i] * node_values[i];
    return h;
}

EntropyReport entropy_report(const FilteredNetwork& net, double beta, TsallisForm form) {
    const TransitionMatrix p = transition_matrix(net);
    EntropyReport r;
    r.beta = beta;
    r.node = node_entropies(p, beta, form);
    r.stationary = stationary_distribution(p, net);
    r.network_shannon = network_entropy(r.node.shannon, r.stationary);
    r.network_renyi = network_entropy(r.node.renyi, r.stationary);
    r.network_tsallis = network_entropy(r.node.tsallis, r.stationary);
    return r;
}

std::size_t top_k_overlap(const CentralityVector& a, const CentralityVector& b, std::size_t k) {
    if (k > a.values.size() || k > b.values.size()) throw Error("top_k_overlap: k exceeds network size");
    const std::set<std::string> ua(a.tickers.begin(), a.tickers.end());
    const std::set<std::string> ub(b.tickers.begin(), b.tickers.end());
    if (ua != ub) throw Error("top_k_overlap: different ticker universes");
    std::set<std::string> top_a;
    for (std::size_t r = 0; r < k; ++r) top_a.insert(a.tickers[a.ranking[r]]);
    std::size_t common = 0;
    for (std::size_t r = 0; r < k; ++r) common += top_a.count(b.tickers[b.ranking[r]]);
    return common;
}

}  // namespace lgcnet
