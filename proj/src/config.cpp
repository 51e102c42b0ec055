#include "lgcnet/config.hpp"

#include "lgcnet/error.hpp"
#include "lgcnet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace lgcnet {

using nlohmann::json;

namespace {

nlohmann::json read_json(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error(std::string("cannot open ") + what + " '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(std::string(what) + " '" + path.string() + "': " + e.what());
    }
}

// Rejects keys outside `allowed` so typos surface at validate time.
void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw Error(std::string(where) + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) throw Error(std::string(where) + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& obj, const char* key, T fallback, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw Error(std::string(where) + ": bad value for '" + key + "'");
    }
}

Date get_date(const json& v) {
    return parse_date(v.is_string() ? v.get<std::string>() : std::to_string(v.get<long long>()));
}

GeneratorKind parse_generator(const std::string& s) {
    if (s == "gaussian") return GeneratorKind::gaussian;
    if (s == "clayton") return GeneratorKind::clayton;
    if (s == "parabola") return GeneratorKind::parabola;
    if (s == "factor") return GeneratorKind::factor;
    throw Error("scenario: unknown generator '" + s + "'");
}

const char* generator_name(GeneratorKind g) {
    switch (g) {
        case GeneratorKind::gaussian: return "gaussian";
        case GeneratorKind::clayton: return "clayton";
        case GeneratorKind::parabola: return "parabola";
        case GeneratorKind::factor: return "factor";
    }
    return "?";
}

TailSpec parse_tail(const json& obj, TailSpec base, double default_step, const char* where) {
    check_keys(obj, where, {"lo", "hi", "step"});
    base.quantile_lo = get(obj, "lo", base.quantile_lo, where);
    base.quantile_hi = get(obj, "hi", base.quantile_hi, where);
    base.step = get(obj, "step", default_step, where);
    return base;
}

std::vector<PeriodSpec> parse_period_list(const json& list) {
    if (!list.is_array()) throw Error("config: 'periods' must be an array");
    std::vector<PeriodSpec> out;
    for (const auto& item : list) {
        check_keys(item, "config: period", {"label", "start", "end"});
        out.push_back({item.at("label").get<std::string>(), get_date(item.at("start")), get_date(item.at("end"))});
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (!input && !scenario) throw Error("config: need 'input' or 'scenario'");
    if (input && scenario) throw Error("config: 'input' and 'scenario' are mutually exclusive");
    if (scenario) scenario->validate();
    validate_periods(periods);
    std::set<std::string> labels;
    for (const auto& p : periods) {
        if (p.label.empty()) throw Error("config: period label must not be empty");
        if (p.label.find_first_of("/\\") != std::string::npos) throw Error("config: period label '" + p.label + "' contains a path separator");
        if (!labels.insert(p.label).second) throw Error("config: duplicate period label '" + p.label + "'");
    }
    negative_tail.validate();
    positive_tail.validate();
    if (negative_tail.side != TailSide::negative || positive_tail.side != TailSide::positive) {
        throw Error("config: tail sides mixed up");
    }
    if (!(bandwidth_multiplier > 0.0 && std::isfinite(bandwidth_multiplier))) throw Error("config: bandwidth_multiplier must be positive");
    for (double m : bandwidth_sweep) {
        if (!(m > 0.0 && std::isfinite(m))) throw Error("config: bandwidth_sweep entries must be positive");
    }
    for (double b : entropy_betas()) {
        if (!(b > 0.0 && b < 1.0)) throw Error("config: beta values must lie in (0, 1)");
    }
    if (filters.empty()) throw Error("config: select at least one filter");
    if (kinds.empty()) throw Error("config: select at least one network kind");
    if (min_overlap < 2) throw Error("config: min_overlap must be at least 2");
    if (!(min_effective_n >= 0.0)) throw Error("config: min_effective_n must be non-negative");
    if (!(min_valid_fraction > 0.0 && min_valid_fraction <= 1.0)) throw Error("config: min_valid_fraction outside (0, 1]");
    if (!(max_invalid_pair_fraction >= 0.0 && max_invalid_pair_fraction <= 1.0)) throw Error("config: max_invalid_pair_fraction outside [0, 1]");
    if (!(gpd_threshold_quantile > 0.0 && gpd_threshold_quantile < 1.0)) throw Error("config: gpd_threshold_quantile outside (0, 1)");
    if (top_k == 0) throw Error("config: top_k must be positive");
}

std::vector<double> RunConfig::entropy_betas() const {
    std::vector<double> b = beta_sweep;
    b.push_back(beta);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

unsigned RunConfig::effective_workers() const { return workers ? workers : default_workers(); }

LgcConfig RunConfig::lgc_config(WeightKind kind, double multiplier) const {
    LgcConfig c;
    c.tail = kind == WeightKind::lgc_positive ? positive_tail : negative_tail;
    c.diagonal.min_overlap = min_overlap;
    c.diagonal.bandwidth_multiplier = multiplier;
    c.diagonal.fit.min_effective_n = min_effective_n;
    c.min_valid_fraction = min_valid_fraction;
    c.max_invalid_pair_fraction = max_invalid_pair_fraction;
    c.workers = effective_workers();
    return c;
}

ScenarioSpec parse_scenario(const json& doc) {
    const char* where = "scenario";
    check_keys(doc, where, {"n_stocks", "n_days", "generator", "rho", "theta", "noise_sd", "factor",
                            "regimes", "seed", "start_date"});
    ScenarioSpec s;
    s.n_stocks = get<std::size_t>(doc, "n_stocks", s.n_stocks, where);
    s.n_days = get<std::size_t>(doc, "n_days", s.n_days, where);
    if (doc.contains("generator")) s.generator = parse_generator(doc.at("generator").get<std::string>());
    s.rho = get(doc, "rho", s.rho, where);
    s.theta = get(doc, "theta", s.theta, where);
    s.noise_sd = get(doc, "noise_sd", s.noise_sd, where);
    s.seed = get<std::uint64_t>(doc, "seed", s.seed, where);
    if (doc.contains("start_date")) s.start_date = get_date(doc.at("start_date"));
    if (auto it = doc.find("factor"); it != doc.end()) {
        const char* fw = "scenario.factor";
        check_keys(*it, fw, {"beta_lo", "beta_hi", "factor_df", "idio_sd", "return_scale",
                             "crash_vol_multiplier", "crash_clayton_theta", "crash_mix"});
        auto& f = s.factor;
        f.beta_lo = get(*it, "beta_lo", f.beta_lo, fw);
        f.beta_hi = get(*it, "beta_hi", f.beta_hi, fw);
        f.factor_df = get(*it, "factor_df", f.factor_df, fw);
        f.idio_sd = get(*it, "idio_sd", f.idio_sd, fw);
        f.return_scale = get(*it, "return_scale", f.return_scale, fw);
        f.crash_vol_multiplier = get(*it, "crash_vol_multiplier", f.crash_vol_multiplier, fw);
        f.crash_clayton_theta = get(*it, "crash_clayton_theta", f.crash_clayton_theta, fw);
        f.crash_mix = get(*it, "crash_mix", f.crash_mix, fw);
    }
    if (auto it = doc.find("regimes"); it != doc.end()) {
        if (!it->is_array()) throw Error("scenario: 'regimes' must be an array");
        for (const auto& r : *it) {
            check_keys(r, "scenario.regimes", {"label", "days", "crash"});
            s.regimes.push_back({r.at("label").get<std::string>(), r.at("days").get<std::size_t>(),
                                 get(r, "crash", false, "scenario.regimes")});
        }
    }
    s.validate();
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_json(path, "scenario file"));
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    const char* where = "config";
    check_keys(doc, where, {"input", "scenario", "periods", "periods_file", "tails", "grid_step",
                            "bandwidth_multiplier", "beta", "beta_sweep", "bandwidth_sweep", "filters",
                            "kinds", "max_missing", "min_overlap", "min_effective_n", "min_valid_fraction",
                            "max_invalid_pair_fraction", "gpd_threshold_quantile", "top_k", "tsallis_form",
                            "output_dir", "workers"});
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };

    RunConfig c;
    if (doc.contains("input")) c.input = resolve(doc.at("input").get<std::string>());
    if (auto it = doc.find("scenario"); it != doc.end()) {
        c.scenario = it->is_string() ? load_scenario(resolve(it->get<std::string>())) : parse_scenario(*it);
    }
    if (doc.contains("periods") && doc.contains("periods_file")) {
        throw Error("config: give either 'periods' or 'periods_file'");
    }
    if (doc.contains("periods")) c.periods = parse_period_list(doc.at("periods"));
    if (doc.contains("periods_file")) c.periods = load_periods(resolve(doc.at("periods_file").get<std::string>()));

    const double step = get(doc, "grid_step", 0.01, where);
    c.negative_tail.step = step;
    c.positive_tail.step = step;
    if (auto it = doc.find("tails"); it != doc.end()) {
        check_keys(*it, "config.tails", {"negative", "positive"});
        if (it->contains("negative")) c.negative_tail = parse_tail(it->at("negative"), c.negative_tail, step, "config.tails.negative");
        if (it->contains("positive")) c.positive_tail = parse_tail(it->at("positive"), c.positive_tail, step, "config.tails.positive");
    }

    c.bandwidth_multiplier = get(doc, "bandwidth_multiplier", c.bandwidth_multiplier, where);
    c.beta = get(doc, "beta", c.beta, where);
    c.beta_sweep = get(doc, "beta_sweep", c.beta_sweep, where);
    c.bandwidth_sweep = get(doc, "bandwidth_sweep", c.bandwidth_sweep, where);
    if (auto it = doc.find("filters"); it != doc.end()) {
        c.filters.clear();
        for (const auto& f : *it) c.filters.push_back(parse_filter_kind(f.get<std::string>()));
    }
    if (auto it = doc.find("kinds"); it != doc.end()) {
        c.kinds.clear();
        for (const auto& k : *it) c.kinds.push_back(parse_weight_kind(k.get<std::string>()));
    }
    c.max_missing = get(doc, "max_missing", c.max_missing, where);
    c.min_overlap = get(doc, "min_overlap", c.min_overlap, where);
    c.min_effective_n = get(doc, "min_effective_n", c.min_effective_n, where);
    c.min_valid_fraction = get(doc, "min_valid_fraction", c.min_valid_fraction, where);
    c.max_invalid_pair_fraction = get(doc, "max_invalid_pair_fraction", c.max_invalid_pair_fraction, where);
    c.gpd_threshold_quantile = get(doc, "gpd_threshold_quantile", c.gpd_threshold_quantile, where);
    c.top_k = get(doc, "top_k", c.top_k, where);
    if (auto it = doc.find("tsallis_form"); it != doc.end()) {
        const auto s = it->get<std::string>();
        if (s == "standard") c.tsallis_form = TsallisForm::standard;
        else if (s == "literal") c.tsallis_form = TsallisForm::literal;
        else throw Error("config: tsallis_form must be 'standard' or 'literal'");
    }
    if (doc.contains("output_dir")) c.output_dir = resolve(doc.at("output_dir").get<std::string>());
    c.workers = get(doc, "workers", c.workers, where);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json(path, "config file"), path.parent_path());
}

json scenario_to_json(const ScenarioSpec& s) {
    json regimes = json::array();
    for (const auto& r : s.regimes) regimes.push_back({{"label", r.label}, {"days", r.days}, {"crash", r.crash}});
    const auto& f = s.factor;
    return {
        {"n_stocks", s.n_stocks},
        {"n_days", s.n_days},
        {"generator", generator_name(s.generator)},
        {"rho", s.rho},
        {"theta", s.theta},
        {"noise_sd", s.noise_sd},
        {"seed", s.seed},
        {"start_date", format_date(s.start_date)},
        {"factor", {{"beta_lo", f.beta_lo}, {"beta_hi", f.beta_hi}, {"factor_df", f.factor_df},
                    {"idio_sd", f.idio_sd}, {"return_scale", f.return_scale},
                    {"crash_vol_multiplier", f.crash_vol_multiplier},
                    {"crash_clayton_theta", f.crash_clayton_theta}, {"crash_mix", f.crash_mix}}},
        {"regimes", regimes},
    };
}

json config_echo(const RunConfig& c) {
    auto tail = [](const TailSpec& t) { return json{{"lo", t.quantile_lo}, {"hi", t.quantile_hi}, {"step", t.step}}; };
    json periods = json::array();
    for (const auto& p : c.periods) periods.push_back({{"label", p.label}, {"start", format_date(p.start)}, {"end", format_date(p.end)}});
    json filters = json::array();
    for (auto f : c.filters) filters.push_back(std::string(to_string(f)));
    json kinds = json::array();
    for (auto k : c.kinds) kinds.push_back(std::string(to_string(k)));

    json doc{
        {"periods", periods},
        {"tails", {{"negative", tail(c.negative_tail)}, {"positive", tail(c.positive_tail)}}},
        {"bandwidth_multiplier", c.bandwidth_multiplier},
        {"beta", c.beta},
        {"beta_sweep", c.beta_sweep},
        {"bandwidth_sweep", c.bandwidth_sweep},
        {"filters", filters},
        {"kinds", kinds},
        {"max_missing", c.max_missing},
        {"min_overlap", c.min_overlap},
        {"min_effective_n", c.min_effective_n},
        {"min_valid_fraction", c.min_valid_fraction},
        {"max_invalid_pair_fraction", c.max_invalid_pair_fraction},
        {"gpd_threshold_quantile", c.gpd_threshold_quantile},
        {"top_k", c.top_k},
        {"tsallis_form", c.tsallis_form == TsallisForm::standard ? "standard" : "literal"},
    };
    if (c.input) doc["input"] = c.input->filename().string();
    if (c.scenario) doc["scenario"] = scenario_to_json(*c.scenario);
    return doc;
}

}  // namespace lgcnet
