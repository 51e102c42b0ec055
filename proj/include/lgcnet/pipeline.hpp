#pragma once

#include "lgcnet/config.hpp"
#include "lgcnet/output.hpp"

#include "json.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgcnet {

struct WeightSummary {
    std::size_t count = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

/// Five-number summary plus mean of the valid upper-triangle entries.
/// Throws Error with fewer than 5 valid entries.
WeightSummary weight_distribution_summary(const WeightMatrix& w);

struct EntropyBlock {
    double beta = 0.0;
    double shannon = 0.0;
    double renyi = 0.0;
    double tsallis = 0.0;
};

/// Metrics for one (period, kind, filter) cell.
struct CellReport {
    std::string period;
    WeightKind kind = WeightKind::pearson;
    FilterKind filter = FilterKind::mst;
    bool ok = false;
    std::string error;

    std::size_t n_nodes = 0;
    std::size_t n_edges = 0;
    std::vector<std::string> excluded;
    double avg_shortest_path = 0.0;
    double eigenvalue = 0.0;
    std::vector<EntropyBlock> entropies;  // one per beta, ascending
    std::optional<CentralityVector> strength;
    std::optional<CentralityVector> eigenvector;
    std::vector<GpdRow> gpd;

    const EntropyBlock* entropy_at(double beta) const;
};

struct KindReport {
    WeightKind kind = WeightKind::pearson;
    bool ok = false;
    std::string error;
    std::size_t valid_pairs = 0;
    std::size_t invalid_pairs = 0;
    std::size_t total_pairs = 0;
    std::optional<WeightSummary> summary;
};

/// Weights at one bandwidth multiplier compared with the base multiplier.
struct BandwidthSweepRow {
    WeightKind kind = WeightKind::lgc_negative;
    double multiplier = 1.0;
    bool ok = false;
    std::string error;
    std::size_t compared_pairs = 0;
    double max_abs_change = 0.0;
    double mean_abs_change = 0.0;
    std::optional<WeightSummary> summary;
};

struct PeriodResult {
    PeriodSpec spec;
    bool ok = false;
    std::string error;
    std::size_t trading_days = 0;
    std::size_t stocks_total = 0;
    std::size_t stocks_eligible = 0;
    std::vector<KindReport> kinds;
    std::vector<CellReport> cells;
    std::vector<BandwidthSweepRow> bandwidth;
};

/// Everything computed for one period, before serialization.
struct PeriodArtifacts {
    PeriodResult result;
    std::vector<WeightMatrix> matrices;                       // one per successful kind
    std::vector<FilteredNetwork> networks;                    // one per successful cell
    std::vector<std::pair<double, WeightMatrix>> swept;       // bandwidth sweep matrices
    std::vector<EntropyReport> main_entropy;                  // at cfg.beta, parallel to networks
};

/// Returns panel the run operates on: the input CSV converted to log
/// returns, or the generated scenario.
ReturnsPanel load_run_returns(const RunConfig& cfg);

/// The configured periods, or the scenario regimes, or one period spanning
/// the whole panel.
std::vector<PeriodSpec> resolve_periods(const RunConfig& cfg, const ReturnsPanel& panel);

/// Runs every selected (kind, filter) cell on one period. Cell-level errors
/// are captured in the result; nothing is written.
PeriodArtifacts analyze_period(const RunConfig& cfg, const PeriodSpec& spec, const ReturnsPanel& period_panel);

/// Long-format summary tables keyed by file name (CSV text).
std::map<std::string, std::string> cross_period_report(std::span<const PeriodResult> periods,
                                                       std::size_t top_k = 10);

struct RunManifest {
    nlohmann::json document;
    std::size_t cells_total = 0;
    std::size_t cells_failed = 0;
    std::vector<std::string> files;  // relative to the output directory

    /// Nonzero when more than 10% of cells failed.
    int exit_code() const { return cells_failed * 10 > cells_total ? 2 : 0; }
};

/// Full run: analysis, per-period files, summary tables, manifest.json and
/// timings.json under cfg.output_dir.
RunManifest run_pipeline(const RunConfig& cfg);

}  // namespace lgcnet
