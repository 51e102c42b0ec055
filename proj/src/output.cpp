#include "lgcnet/output.hpp"

#include "lgcnet/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace lgcnet {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);  // no "-0"
    return buf;
}

nlohmann::json json_num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(fmt_num(v).c_str(), nullptr);
}

void write_weights_csv(const WeightMatrix& w, std::ostream& out) {
    const std::size_t n = w.size();
    out << "ticker";
    for (const auto& t : w.tickers) out << ',' << t;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << w.tickers[i];
        for (std::size_t j = 0; j < n; ++j) out << ',' << (w.is_valid(i, j) ? fmt_num(w.at(i, j)) : "NaN");
        out << '\n';
    }
}

nlohmann::json weights_json(const WeightMatrix& w, const std::optional<TailSpec>& tail,
                            std::optional<double> bandwidth_multiplier) {
    const std::size_t n = w.size();
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json mask = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        nlohmann::json wr = nlohmann::json::array();
        nlohmann::json mr = nlohmann::json::array();
        for (std::size_t j = 0; j < n; ++j) {
            wr.push_back(w.is_valid(i, j) ? json_num(w.at(i, j)) : nlohmann::json(nullptr));
            mr.push_back(w.is_valid(i, j) ? 1 : 0);
        }
        weights.push_back(std::move(wr));
        mask.push_back(std::move(mr));
    }
    nlohmann::json doc{{"kind", std::string(to_string(w.kind))}, {"tickers", w.tickers}};
    if (tail) {
        nlohmann::json grid = nlohmann::json::array();
        for (double p : tail->grid()) grid.push_back(json_num(p));
        doc["tail"] = {{"side", std::string(to_string(tail->side))},
                       {"lo", json_num(tail->quantile_lo)},
                       {"hi", json_num(tail->quantile_hi)},
                       {"step", json_num(tail->step)}};
        doc["grid"] = grid;
    } else {
        doc["tail"] = nullptr;
        doc["grid"] = nullptr;
    }
    if (bandwidth_multiplier) {
        doc["bandwidth"] = {{"rule", "1.75 * n^(-1/6) on normal scores"},
                            {"multiplier", json_num(*bandwidth_multiplier)}};
    } else {
        doc["bandwidth"] = nullptr;
    }
    doc["weights"] = weights;
    doc["valid"] = mask;
    doc["invalid_pairs"] = w.invalid_pairs();
    doc["total_pairs"] = w.total_pairs();
    return doc;
}

void write_edges_csv(const FilteredNetwork& net, std::ostream& out) {
    out << "source,target,weight,distance\n";
    for (const auto& e : net.edges) {
        out << net.tickers[e.i] << ',' << net.tickers[e.j] << ',' << fmt_num(e.weight) << ','
            << fmt_num(e.distance) << '\n';
    }
}

void write_rankings_csv(const CentralityVector& c, std::ostream& out) {
    out << "rank,ticker,value\n";
    for (std::size_t r = 0; r < c.ranking.size(); ++r) {
        const std::size_t i = c.ranking[r];
        out << r + 1 << ',' << c.tickers[i] << ',' << fmt_num(c.values[i]) << '\n';
    }
}

void write_gpd_csv(std::span<const GpdRow> rows, std::ostream& out) {
    out << "network,filter,centrality,threshold,n_exceed,xi,ci_lo,ci_hi\n";
    const double nan = std::nan("");
    for (const auto& r : rows) {
        out << to_string(r.network) << ',' << to_string(r.filter) << ',' << to_string(r.centrality) << ',';
        if (r.fit) {
            out << fmt_num(r.fit->threshold) << ',' << r.fit->n_exceed << ',' << fmt_num(r.fit->xi) << ','
                << fmt_num(r.fit->ci_lo) << ',' << fmt_num(r.fit->ci_hi) << '\n';
        } else {
            out << fmt_num(nan) << ",0," << fmt_num(nan) << ',' << fmt_num(nan) << ',' << fmt_num(nan) << '\n';
        }
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace lgcnet
