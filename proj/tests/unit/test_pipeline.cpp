#include "doctest.h"

#include "lgcnet/config.hpp"
#include "lgcnet/error.hpp"
#include "lgcnet/output.hpp"
#include "lgcnet/pipeline.hpp"
#include "lgcnet/synth_market.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace lgcnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("lgcnet_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    return out;
}

RunConfig two_regime_config(std::size_t n, std::uint64_t seed, const fs::path& out) {
    json doc = {
        {"scenario", {{"n_stocks", n}, {"generator", "factor"}, {"seed", seed},
                      {"regimes", {{{"label", "calm"}, {"days", 250}}, {{"label", "crash"}, {"days", 250}, {"crash", true}}}}}},
        {"output_dir", out.string()},
        {"workers", 1},
    };
    return parse_run_config(doc);
}

WeightMatrix filled(std::size_t n, double v) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("S" + std::to_string(i));
    WeightMatrix w(WeightKind::pearson, names);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) w.set(i, j, v);
    return w;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(fmt_num(0.1) == "0.1");
    CHECK(fmt_num(1.0 / 3.0) == "0.333333333");
    CHECK(fmt_num(-0.0) == "0");
    CHECK(fmt_num(std::nan("")) == "NaN");
    CHECK(fmt_num(1e-12) == "1e-12");
    CHECK(json_num(std::nan("")).is_null());
    CHECK(json_num(2.0 / 3.0).get<double>() == 0.666666667);
}

TEST_CASE("weight distribution summary") {
    auto s = weight_distribution_summary(filled(5, 0.5));
    CHECK(s.count == 10);
    for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean}) CHECK(v == doctest::Approx(0.5));

    auto w = filled(5, 0.0);
    double v = 0.1;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) {
            if (i == 3 && j == 4) {
                w.set_invalid(i, j);
                continue;
            }
            w.set(i, j, v);
            v += 0.1;
        }
    auto g = weight_distribution_summary(w);
    CHECK(g.count == 9);
    CHECK(g.median == doctest::Approx(0.5));
    CHECK(g.min == doctest::Approx(0.1));
    CHECK(g.max == doctest::Approx(0.9));

    auto tiny = filled(3, 0.2);
    CHECK_THROWS_AS(weight_distribution_summary(tiny), Error);

    SUBCASE("Clayton panel: negative-tail median exceeds positive-tail median") {
        auto panel = gen_clayton_panel(8, 1000, 2.0, 3);
        LgcConfig neg, pos;
        pos.tail = TailSpec::positive_default();
        CHECK(weight_distribution_summary(lgc_weight_matrix(panel, neg)).median >
              weight_distribution_summary(lgc_weight_matrix(panel, pos)).median);
    }
}

TEST_CASE("config parsing") {
    SUBCASE("defaults") {
        auto cfg = parse_run_config(json{{"scenario", {{"n_stocks", 5}}}});
        CHECK(cfg.beta == 0.1);
        CHECK(cfg.bandwidth_multiplier == 1.0);
        CHECK(cfg.max_missing == 30);
        CHECK(cfg.negative_tail.quantile_lo == 0.05);
        CHECK(cfg.positive_tail.quantile_hi == 0.95);
        CHECK(cfg.filters.size() == 3);
        CHECK(cfg.kinds.size() == 3);
        CHECK(cfg.scenario->n_stocks == 5);
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("sections and sweeps") {
        auto cfg = parse_run_config(json{
            {"input", "prices.csv"},
            {"tails", {{"negative", {{"lo", 0.02}, {"hi", 0.1}, {"step", 0.02}}}}},
            {"beta", 0.5},
            {"beta_sweep", {0.9, 0.1, 0.5}},
            {"filters", {"tmfg", "mst"}},
            {"kinds", {"pearson"}},
            {"periods", {{{"label", "p1"}, {"start", "2004-04-07"}, {"end", "2005-06-06"}}}},
        }, "/data/run");
        CHECK(*cfg.input == fs::path("/data/run/prices.csv"));
        CHECK(cfg.negative_tail.grid().size() == 5);
        CHECK(cfg.entropy_betas() == std::vector<double>{0.1, 0.5, 0.9});
        CHECK(cfg.filters == std::vector<FilterKind>{FilterKind::tmfg, FilterKind::mst});
        CHECK(cfg.periods.at(0).start == 20040407);
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(parse_run_config(json{{"scenario", json::object()}, {"betta", 0.1}}), Error);
        CHECK_THROWS_AS(parse_run_config(json{{"scenario", json::object()}, {"beta", 1.0}}).validate(), Error);
        CHECK_THROWS_AS(parse_run_config(json{{"scenario", json::object()}, {"filters", {"knn"}}}), Error);
        CHECK_THROWS_AS(parse_run_config(json{{"scenario", json::object()}, {"filters", json::array()}}).validate(), Error);
        CHECK_THROWS_AS(parse_run_config(json{{"scenario", json::object()}, {"bandwidth_sweep", {-1.0}}}).validate(), Error);
        CHECK_THROWS_AS(parse_run_config(json::object()).validate(), Error);
        CHECK_THROWS_AS(parse_scenario(json{{"generator", "garch"}}), Error);
    }
    SUBCASE("scenario round trip") {
        ScenarioSpec s;
        s.generator = GeneratorKind::factor;
        s.regimes = {{"a", 120, false}, {"b", 130, true}};
        s.seed = 42;
        auto back = parse_scenario(scenario_to_json(s));
        CHECK(scenario_to_json(back) == scenario_to_json(s));
        CHECK(gen_factor_market(back) == gen_factor_market(s));
    }
    SUBCASE("config echo leaves out run-local settings") {
        auto cfg = parse_run_config(json{{"scenario", json::object()}, {"output_dir", "/x"}, {"workers", 3}});
        auto echo = config_echo(cfg);
        CHECK_FALSE(echo.contains("output_dir"));
        CHECK_FALSE(echo.contains("workers"));
        auto other = cfg;
        other.workers = 8;
        other.output_dir = "/y";
        CHECK(config_echo(other) == echo);
    }
}

TEST_CASE("period resolution") {
    auto cfg = parse_run_config(json{{"scenario", {{"n_stocks", 4}, {"n_days", 300}, {"generator", "gaussian"}}}});
    auto panel = load_run_returns(cfg);
    auto p = resolve_periods(cfg, panel);
    REQUIRE(p.size() == 1);
    CHECK(p[0].start == panel.dates.front());
    auto cfg2 = two_regime_config(4, 1, "/unused");
    auto panel2 = load_run_returns(cfg2);
    auto p2 = resolve_periods(cfg2, panel2);
    REQUIRE(p2.size() == 2);
    CHECK(p2[0].label == "calm");
    CHECK(p2[1].label == "crash");
}

TEST_CASE("full run: counting contract, file index, sweeps") {
    auto out = scratch("full");
    auto cfg = two_regime_config(20, 7, out);
    cfg.beta_sweep = {0.1, 0.5, 0.9};
    cfg.bandwidth_sweep = {0.8, 1.2};
    auto m = run_pipeline(cfg);
    CHECK(m.cells_total == 18);
    CHECK(m.cells_failed == 0);
    CHECK(m.exit_code() == 0);
    CHECK(m.document["cells"].size() == 18);

    auto files = tree(out);
    std::set<std::string> listed(m.files.begin(), m.files.end());
    CHECK(listed.size() == m.files.size());
    std::set<std::string> on_disk;
    for (const auto& [k, v] : files)
        if (k != "manifest.json") on_disk.insert(k);
    CHECK(listed == on_disk);

    auto metrics = json::parse(files.at("summary/metrics.json"));
    std::size_t reports = 0;
    for (auto& [period, kinds] : metrics.items())
        for (auto& [kind, filters] : kinds.items())
            for (auto& [filter, rep] : filters.items()) {
                ++reports;
                REQUIRE(rep["entropy"].size() == 3);
                for (const auto& e : rep["entropy"]) {
                    CHECK(e["shannon"].is_number());
                    CHECK(e["renyi"].is_number());
                    CHECK(e["tsallis"].is_number());
                }
            }
    CHECK(reports == 18);

    auto manifest = json::parse(files.at("manifest.json"));
    CHECK(manifest["periods"][0]["trading_days"] == 250);
    CHECK(manifest["periods"][0]["stocks_eligible"] == 20);
    CHECK(manifest["periods"][0]["pairs"]["pearson"]["total_pairs"] == 190);

    // Long-format tables: two rows per (kind, filter).
    std::istringstream asp(files.at("summary/avg_shortest_path.csv"));
    std::string line;
    std::getline(asp, line);
    std::map<std::string, int> rows;
    while (std::getline(asp, line)) {
        auto first = line.find(','), second = line.find(',', first + 1), third = line.find(',', second + 1);
        rows[line.substr(first + 1, third - first - 1)]++;
    }
    CHECK(rows.size() == 9);
    for (const auto& [key, count] : rows) CHECK(count == 2);

    CHECK(files.count("periods/crash/bandwidth/weights_lgc_negative_x0.8.csv") == 1);
    CHECK(files.count("summary/bandwidth_sweep.csv") == 1);
    fs::remove_all(out);
}

TEST_CASE("subset selection emits exactly that subset") {
    auto out = scratch("subset");
    auto cfg = two_regime_config(10, 2, out);
    cfg.kinds = {WeightKind::pearson};
    cfg.filters = {FilterKind::mst};
    auto m = run_pipeline(cfg);
    CHECK(m.cells_total == 2);
    for (const auto& f : m.files) {
        CHECK(f.find("lgc_") == std::string::npos);
        CHECK(f.find("pmfg") == std::string::npos);
        CHECK(f.find("tmfg") == std::string::npos);
    }
    CHECK(fs::exists(out / "periods/calm/pearson_mst/edges.csv"));
    CHECK_FALSE(fs::exists(out / "periods/calm/weights_lgc_negative.csv"));
    fs::remove_all(out);
}

TEST_CASE("reruns and worker counts are byte-identical") {
    auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    auto cfg = two_regime_config(12, 5, a);
    cfg.beta_sweep = {0.3};
    run_pipeline(cfg);
    cfg.output_dir = b;
    run_pipeline(cfg);
    cfg.output_dir = c;
    cfg.workers = 6;
    run_pipeline(cfg);
    auto ta = tree(a), tb = tree(b), tc = tree(c);
    ta.erase("timings.json");
    tb.erase("timings.json");
    tc.erase("timings.json");
    CHECK(ta.size() > 50);
    CHECK(ta == tb);
    CHECK(ta == tc);
    for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("cross-period report") {
    auto cfg = two_regime_config(12, 4, "/unused");
    auto panel = load_run_returns(cfg);
    auto specs = resolve_periods(cfg, panel);
    auto parts = segment_periods(panel, specs);
    std::vector<PeriodResult> results;
    for (std::size_t k = 0; k < parts.size(); ++k) results.push_back(analyze_period(cfg, specs[k], parts[k]).result);

    SUBCASE("identical periods give identical rows") {
        PeriodResult twin = results[0];
        twin.spec.label = "twin";
        std::vector<PeriodResult> pair{results[0], twin};
        auto tables = cross_period_report(pair);
        std::istringstream in(tables.at("avg_shortest_path.csv"));
        std::string header, line;
        std::getline(in, header);
        std::map<std::string, std::set<std::string>> by_period;
        while (std::getline(in, line)) {
            auto comma = line.find(',');
            by_period[line.substr(0, comma)].insert(line.substr(comma + 1));
        }
        REQUIRE(by_period.size() == 2);
        CHECK(by_period.begin()->second == std::next(by_period.begin())->second);
    }
    SUBCASE("crash shortens negative-tail paths") {
        for (auto f : {FilterKind::mst, FilterKind::pmfg, FilterKind::tmfg}) {
            auto find = [&](const PeriodResult& r) {
                for (const auto& c : r.cells)
                    if (c.kind == WeightKind::lgc_negative && c.filter == f) return c;
                return CellReport{};
            };
            auto calm = find(results[0]), crash = find(results[1]);
            REQUIRE(calm.ok);
            REQUIRE(crash.ok);
            CHECK(crash.avg_shortest_path < calm.avg_shortest_path);
        }
    }
}

TEST_CASE("failing cells are isolated and counted") {
    // Three stocks: every TMFG cell fails (it needs four nodes), MST and PMFG
    // cells still complete.
    auto out = scratch("fail");
    auto cfg = parse_run_config(json{{"scenario", {{"n_stocks", 3}, {"n_days", 200}, {"generator", "gaussian"}}},
                                     {"output_dir", out.string()}, {"workers", 1}});
    auto m = run_pipeline(cfg);
    CHECK(m.cells_total == 9);
    CHECK(m.cells_failed == 3);
    CHECK(m.exit_code() == 2);
    std::size_t failed = 0;
    for (const auto& c : m.document["cells"]) failed += c["status"] != "ok";
    CHECK(failed == 3);
    fs::remove_all(out);
}
