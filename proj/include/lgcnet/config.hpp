#pragma once

#include "lgcnet/dependence.hpp"
#include "lgcnet/graph_filter.hpp"
#include "lgcnet/market_data.hpp"
#include "lgcnet/net_metrics.hpp"
#include "lgcnet/synth_market.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lgcnet {

/// Everything a pipeline run needs. Paths are resolved against the config
/// file's directory when loaded from disk.
struct RunConfig {
    std::optional<std::filesystem::path> input;  // price CSV
    std::optional<ScenarioSpec> scenario;        // used when no input is given
    /// Empty means: the scenario's regimes, or one period over the full panel.
    std::vector<PeriodSpec> periods;

    TailSpec negative_tail = TailSpec::negative_default();
    TailSpec positive_tail = TailSpec::positive_default();
    double bandwidth_multiplier = 1.0;
    double beta = 0.1;
    std::vector<double> beta_sweep;
    std::vector<double> bandwidth_sweep;

    std::vector<FilterKind> filters{FilterKind::mst, FilterKind::pmfg, FilterKind::tmfg};
    std::vector<WeightKind> kinds{WeightKind::lgc_negative, WeightKind::lgc_positive, WeightKind::pearson};

    std::size_t max_missing = 30;
    std::size_t min_overlap = 100;
    double min_effective_n = 5.0;
    double min_valid_fraction = 0.5;
    double max_invalid_pair_fraction = 0.2;
    double gpd_threshold_quantile = 0.90;
    std::size_t top_k = 10;
    TsallisForm tsallis_form = TsallisForm::standard;

    std::filesystem::path output_dir = "lgcnet-out";
    unsigned workers = 0;  // 0: LGCNET_WORKERS, else all cores

    /// Throws Error describing the first out-of-range value.
    void validate() const;
    /// beta plus the sweep, sorted and deduplicated.
    std::vector<double> entropy_betas() const;
    unsigned effective_workers() const;
    LgcConfig lgc_config(WeightKind kind, double multiplier) const;
};

/// Strict parse: unknown keys are errors. `base_dir` anchors relative paths.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

ScenarioSpec parse_scenario(const nlohmann::json& doc);
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// Canonical JSON form of the settings that determine results (no output
/// directory, no worker count).
nlohmann::json config_echo(const RunConfig& cfg);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

}  // namespace lgcnet
