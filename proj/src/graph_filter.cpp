#include "lgcnet/graph_filter.hpp"

#include "lgcnet/error.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace lgcnet {
namespace {

using PlanarGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// The valid-entry subgraph restricted to nodes with at least one valid link.
struct ActiveMatrix {
    std::vector<std::size_t> nodes;  // positions in the source matrix
    std::vector<std::string> tickers;
    std::vector<std::string> excluded;
    std::vector<double> w;  // -inf where invalid
    std::size_t n = 0;

    double at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

ActiveMatrix restrict_active(const WeightMatrix& m) {
    ActiveMatrix a;
    for (std::size_t i = 0; i < m.size(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < m.size() && !any; ++j) any = j != i && m.is_valid(i, j);
        if (any) {
            a.nodes.push_back(i);
            a.tickers.push_back(m.tickers[i]);
        } else {
            a.excluded.push_back(m.tickers[i]);
        }
    }
    a.n = a.nodes.size();
    a.w.assign(a.n * a.n, kNegInf);
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = 0; j < a.n; ++j) {
            if (i != j && m.is_valid(a.nodes[i], a.nodes[j])) {
                const double v = m.at(a.nodes[i], a.nodes[j]);
                if (v > 1.0) throw Error("weight above 1 between " + a.tickers[i] + " and " + a.tickers[j]);
                a.w[i * a.n + j] = v;
            }
        }
    }
    return a;
}

struct Candidate {
    double w;
    std::size_t i, j;
};

// Valid candidate edges, heaviest first, then lowest (i, j).
std::vector<Candidate> sorted_candidates(const ActiveMatrix& a) {
    std::vector<Candidate> c;
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = i + 1; j < a.n; ++j) {
            if (a.at(i, j) != kNegInf) c.push_back({a.at(i, j), i, j});
        }
    }
    std::sort(c.begin(), c.end(), [](const Candidate& x, const Candidate& y) {
        if (x.w != y.w) return x.w > y.w;
        return std::tie(x.i, x.j) < std::tie(y.i, y.j);
    });
    return c;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

void require_connected(const ActiveMatrix& a, const char* what) {
    DisjointSets ds(a.n);
    std::size_t components = a.n;
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = i + 1; j < a.n; ++j) {
            if (a.at(i, j) != kNegInf && ds.unite(i, j)) --components;
        }
    }
    if (components > 1) {
        throw Error(std::string(what) + ": valid entries form a disconnected graph (" + std::to_string(components) +
                    " components)");
    }
}

FilteredNetwork finish(FilterKind f, const WeightMatrix& m, ActiveMatrix&& a,
                       std::vector<std::pair<std::size_t, std::size_t>> chosen) {
    FilteredNetwork net;
    net.filter = f;
    net.kind = m.kind;
    net.tickers = std::move(a.tickers);
    net.excluded = std::move(a.excluded);
    for (auto& [i, j] : chosen) {
        if (i > j) std::swap(i, j);
    }
    std::sort(chosen.begin(), chosen.end());
    for (const auto& [i, j] : chosen) {
        const double w = a.at(i, j);
        net.edges.push_back({i, j, w, edge_distance(w)});
    }
    return net;
}

}  // namespace

std::string_view to_string(FilterKind f) {
    switch (f) {
        case FilterKind::mst: return "mst";
        case FilterKind::pmfg: return "pmfg";
        case FilterKind::tmfg: return "tmfg";
    }
    return "unknown";
}

FilterKind parse_filter_kind(std::string_view s) {
    if (s == "mst") return FilterKind::mst;
    if (s == "pmfg") return FilterKind::pmfg;
    if (s == "tmfg") return FilterKind::tmfg;
    throw Error("unknown filter '" + std::string(s) + "'");
}

double edge_distance(double w) {
    if (!(w <= 1.0)) throw Error("edge weight must be <= 1 (got " + std::to_string(w) + ")");
    return std::sqrt(2.0 * (1.0 - w));
}

bool is_planar(const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t n) {
    if (n >= 3 && edges.size() > 3 * n - 6) return false;
    PlanarGraph g(n);
    for (const auto& [i, j] : edges) boost::add_edge(i, j, g);
    return boost::boyer_myrvold_planarity_test(g);
}

FilteredNetwork mst(const WeightMatrix& m) {
    ActiveMatrix a = restrict_active(m);
    if (a.n < 2) throw Error("mst: need at least 2 nodes with valid entries");
    DisjointSets ds(a.n);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    for (const auto& c : sorted_candidates(a)) {
        if (ds.unite(c.i, c.j)) {
            chosen.emplace_back(c.i, c.j);
            if (chosen.size() == a.n - 1) break;
        }
    }
    if (chosen.size() != a.n - 1) throw Error("mst: valid entries form a disconnected graph");
    return finish(FilterKind::mst, m, std::move(a), std::move(chosen));
}

FilteredNetwork pmfg(const WeightMatrix& m) {
    ActiveMatrix a = restrict_active(m);
    if (a.n < 3) throw Error("pmfg: need at least 3 nodes with valid entries");
    require_connected(a, "pmfg");
    const std::size_t target = 3 * (a.n - 2);
    PlanarGraph g(a.n);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    for (const auto& c : sorted_candidates(a)) {
        if (chosen.size() == target) break;
        auto [e, added] = boost::add_edge(c.i, c.j, g);
        if (boost::boyer_myrvold_planarity_test(g)) {
            chosen.emplace_back(c.i, c.j);
        } else {
            boost::remove_edge(e, g);
        }
    }
    return finish(FilterKind::pmfg, m, std::move(a), std::move(chosen));
}

FilteredNetwork tmfg(const WeightMatrix& m) {
    ActiveMatrix a = restrict_active(m);
    const std::size_t n = a.n;
    if (n < 4) throw Error("tmfg: need at least 4 nodes with valid entries");
    require_connected(a, "tmfg");

    // Seed: best-connected 4-subset among the 12 heaviest rows.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> row_sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && a.at(i, j) != kNegInf) row_sum[i] += a.at(i, j);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return row_sum[x] > row_sum[y]; });
    std::vector<std::size_t> pool(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(12, n)));
    std::sort(pool.begin(), pool.end());

    double best_total = kNegInf;
    std::array<std::size_t, 4> seed{};
    bool have_seed = false;
    const std::size_t p = pool.size();
    for (std::size_t q0 = 0; q0 < p; ++q0)
        for (std::size_t q1 = q0 + 1; q1 < p; ++q1)
            for (std::size_t q2 = q1 + 1; q2 < p; ++q2)
                for (std::size_t q3 = q2 + 1; q3 < p; ++q3) {
                    const std::array<std::size_t, 4> s{pool[q0], pool[q1], pool[q2], pool[q3]};
                    double total = 0.0;
                    for (int x = 0; x < 4; ++x)
                        for (int y = x + 1; y < 4; ++y) total += a.at(s[x], s[y]);
                    if (total > best_total) {
                        best_total = total;
                        seed = s;
                        have_seed = true;
                    }
                }
    if (!have_seed) throw Error("tmfg: no seed tetrahedron with all links valid");

    struct Face {
        std::size_t v[3];
        bool alive = true;
        double gain = kNegInf;
        std::size_t best = 0;  // meaningful only when gain > -inf
    };
    std::vector<Face> faces;
    faces.reserve(3 * n);
    std::vector<std::uint8_t> inserted(n, 0);
    for (std::size_t s : seed) inserted[s] = 1;
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    for (int x = 0; x < 4; ++x)
        for (int y = x + 1; y < 4; ++y) chosen.emplace_back(seed[x], seed[y]);

    auto gain_of = [&](std::size_t v, const Face& f) {
        return a.at(v, f.v[0]) + a.at(v, f.v[1]) + a.at(v, f.v[2]);
    };
    auto refresh = [&](Face& f) {
        f.gain = kNegInf;
        for (std::size_t v = 0; v < n; ++v) {
            if (inserted[v]) continue;
            const double g = gain_of(v, f);
            if (g > f.gain) {
                f.gain = g;
                f.best = v;
            }
        }
    };
    auto add_face = [&](std::size_t x, std::size_t y, std::size_t z) {
        Face f;
        f.v[0] = x;
        f.v[1] = y;
        f.v[2] = z;
        refresh(f);
        faces.push_back(f);
    };
    add_face(seed[0], seed[1], seed[2]);
    add_face(seed[0], seed[1], seed[3]);
    add_face(seed[0], seed[2], seed[3]);
    add_face(seed[1], seed[2], seed[3]);

    for (std::size_t remaining = n - 4; remaining > 0; --remaining) {
        std::size_t pick = faces.size();
        for (std::size_t k = 0; k < faces.size(); ++k) {
            const Face& f = faces[k];
            if (!f.alive || f.gain == kNegInf) continue;
            if (pick == faces.size() || f.gain > faces[pick].gain ||
                (f.gain == faces[pick].gain && f.best < faces[pick].best)) {
                pick = k;
            }
        }
        if (pick == faces.size()) throw Error("tmfg: cannot insert remaining vertices without invalid links");

        const std::size_t v = faces[pick].best;
        const std::size_t x = faces[pick].v[0], y = faces[pick].v[1], z = faces[pick].v[2];
        faces[pick].alive = false;
        inserted[v] = 1;
        chosen.emplace_back(v, x);
        chosen.emplace_back(v, y);
        chosen.emplace_back(v, z);
        for (Face& f : faces) {
            if (f.alive && f.gain != kNegInf && f.best == v) refresh(f);
        }
        add_face(v, x, y);
        add_face(v, y, z);
        add_face(v, x, z);
    }
    return finish(FilterKind::tmfg, m, std::move(a), std::move(chosen));
}

FilteredNetwork apply_filter(FilterKind f, const WeightMatrix& w) {
    switch (f) {
        case FilterKind::mst: return mst(w);
        case FilterKind::pmfg: return pmfg(w);
        case FilterKind::tmfg: return tmfg(w);
    }
    throw Error("unknown filter");
}

}  // namespace lgcnet
