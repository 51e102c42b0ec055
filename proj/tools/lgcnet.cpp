#include "lgcnet/config.hpp"
#include "lgcnet/error.hpp"
#include "lgcnet/pipeline.hpp"
#include "lgcnet/synth_market.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace lgcnet;

namespace {

// "kinds=pearson,lgc_negative,filters=mst": a token with a key= prefix
// switches the active key; bare tokens extend the active key's list.
void apply_only(RunConfig& cfg, const std::string& spec) {
    std::vector<std::string> kinds, filters;
    std::vector<std::string>* active = nullptr;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        std::string tok = spec.substr(pos, comma - pos);
        pos = comma + 1;
        if (tok.empty()) continue;
        if (auto eq = tok.find('='); eq != std::string::npos) {
            const std::string key = tok.substr(0, eq);
            if (key == "kinds") active = &kinds;
            else if (key == "filters") active = &filters;
            else throw Error("--only: unknown key '" + key + "' (expected kinds= or filters=)");
            tok = tok.substr(eq + 1);
            if (tok.empty()) continue;
        }
        if (!active) throw Error("--only: value '" + tok + "' before any kinds= or filters=");
        active->push_back(tok);
    }
    if (!kinds.empty()) {
        cfg.kinds.clear();
        for (const auto& k : kinds) cfg.kinds.push_back(parse_weight_kind(k));
    }
    if (!filters.empty()) {
        cfg.filters.clear();
        for (const auto& f : filters) cfg.filters.push_back(parse_filter_kind(f));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail-dependence networks from daily price panels"};
    app.require_subcommand(1);

    std::string config_path, only, out_dir, scenario_path, prices_out;
    unsigned workers = 0;

    auto* run = app.add_subcommand("run", "Run the full analysis described by a config file");
    run->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
    run->add_option("--workers", workers, "Worker threads (default: $LGCNET_WORKERS or all cores)");
    run->add_option("--only", only, "Subset, e.g. kinds=pearson,lgc_negative,filters=mst");
    run->add_option("--out", out_dir, "Output directory (overrides the config)");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic price panel");
    synth->add_option("--scenario", scenario_path, "JSON scenario")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", prices_out, "Output CSV (date,ticker,close)")->required();

    auto* validate = app.add_subcommand("validate", "Check a config file without running it");
    validate->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            RunConfig cfg = load_run_config(config_path);
            if (!only.empty()) apply_only(cfg, only);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (workers) cfg.workers = workers;
            cfg.validate();
            RunManifest m = run_pipeline(cfg);
            std::printf("%zu of %zu cells completed; manifest at %s\n", m.cells_total - m.cells_failed,
                        m.cells_total, (cfg.output_dir / "manifest.json").string().c_str());
            for (const auto& c : m.document["cells"]) {
                if (c["status"] != "ok") {
                    std::fprintf(stderr, "failed %s/%s/%s: %s\n", c["period"].get<std::string>().c_str(),
                                 c["kind"].get<std::string>().c_str(), c["filter"].get<std::string>().c_str(),
                                 c["error"].get<std::string>().c_str());
                }
            }
            return m.exit_code();
        }
        if (*synth) {
            ScenarioSpec spec = load_scenario(scenario_path);
            PricePanel prices = returns_to_prices(generate_returns(spec));
            std::ofstream out(prices_out, std::ios::binary);
            if (!out) throw Error("cannot write '" + prices_out + "'");
            write_prices(prices, out);
            std::printf("wrote %zu tickers x %zu days to %s\n", prices.n_tickers(), prices.n_days(), prices_out.c_str());
            return 0;
        }
        if (*validate) {
            RunConfig cfg = load_run_config(config_path);
            std::printf("config ok: %zu period(s), %zu kind(s), %zu filter(s), source %s\n", cfg.periods.size(),
                        cfg.kinds.size(), cfg.filters.size(),
                        cfg.input ? cfg.input->string().c_str() : "scenario");
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lgcnet: %s\n", e.what());
        return 1;
    }
    return 0;
}
