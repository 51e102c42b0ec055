#pragma once

// File formats shared by the pipeline and the CLI. Every number goes
// through fmt_num so reruns are byte-identical.

#include "lgcnet/dependence.hpp"
#include "lgcnet/graph_filter.hpp"
#include "lgcnet/net_metrics.hpp"
#include "lgcnet/tail_fit.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace lgcnet {

/// 9 significant digits ("%.9g"); NaN prints as "NaN", infinities as inf/-inf.
std::string fmt_num(double v);

/// JSON value rounded to the same 9 digits; non-finite values become null.
nlohmann::json json_num(double v);

/// Square CSV: header row and first column hold tickers, invalid entries NaN.
void write_weights_csv(const WeightMatrix& w, std::ostream& out);

/// Kind, tail grid, bandwidth rule and validity mask alongside the weights.
nlohmann::json weights_json(const WeightMatrix& w, const std::optional<TailSpec>& tail,
                            std::optional<double> bandwidth_multiplier);

/// `source,target,weight,distance` with ticker names.
void write_edges_csv(const FilteredNetwork& net, std::ostream& out);

/// `rank,ticker,value`, rank starting at 1.
void write_rankings_csv(const CentralityVector& c, std::ostream& out);

struct GpdRow {
    WeightKind network;
    FilterKind filter;
    CentralityKind centrality;
    std::optional<GpdFit> fit;  // empty when the fit raised
    std::string error;
};

/// `network,filter,centrality,threshold,n_exceed,xi,ci_lo,ci_hi`; failed fits
/// keep their row with NaN fields.
void write_gpd_csv(std::span<const GpdRow> rows, std::ostream& out);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lgcnet
