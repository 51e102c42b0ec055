#include "lgcnet/pipeline.hpp"

#include "lgcnet/error.hpp"
#include "lgcnet/kernels.hpp"
#include "lgcnet/tail_fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace lgcnet {

using nlohmann::json;

namespace {

constexpr WeightKind kAllKinds[] = {WeightKind::lgc_negative, WeightKind::lgc_positive, WeightKind::pearson};
constexpr FilterKind kAllFilters[] = {FilterKind::mst, FilterKind::pmfg, FilterKind::tmfg};

template <class T>
bool contains(const std::vector<T>& v, T x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

// Selected kinds/filters in canonical order, so output order never depends
// on how the config lists them.
std::vector<WeightKind> selected_kinds(const RunConfig& cfg) {
    std::vector<WeightKind> out;
    for (auto k : kAllKinds) if (contains(cfg.kinds, k)) out.push_back(k);
    return out;
}
std::vector<FilterKind> selected_filters(const RunConfig& cfg) {
    std::vector<FilterKind> out;
    for (auto f : kAllFilters) if (contains(cfg.filters, f)) out.push_back(f);
    return out;
}

bool is_lgc(WeightKind k) { return k != WeightKind::pearson; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WeightMatrix build_matrix(const RunConfig& cfg, WeightKind kind, const ReturnsPanel& panel, double multiplier) {
    if (kind == WeightKind::pearson) return pearson_matrix(panel, cfg.min_overlap, cfg.effective_workers());
    auto m = lgc_weight_matrix(panel, cfg.lgc_config(kind, multiplier));
    m.kind = kind;
    return m;
}

CellReport run_cell(const RunConfig& cfg, const std::string& period, const WeightMatrix& w, FilterKind filter,
                    std::optional<FilteredNetwork>& net_out, std::optional<EntropyReport>& main_entropy) {
    CellReport r;
    r.period = period;
    r.kind = w.kind;
    r.filter = filter;
    try {
        FilteredNetwork net = apply_filter(filter, w);
        r.n_nodes = net.n_nodes();
        r.n_edges = net.edges.size();
        r.excluded = net.excluded;
        r.avg_shortest_path = avg_shortest_path(net, cfg.effective_workers());
        r.strength = strength(net);
        r.eigenvector = eigenvector_centrality(net);
        r.eigenvalue = r.eigenvector->eigenvalue;
        for (double b : cfg.entropy_betas()) {
            EntropyReport e = entropy_report(net, b, cfg.tsallis_form);
            r.entropies.push_back({b, e.network_shannon, e.network_renyi, e.network_tsallis});
            if (b == cfg.beta) main_entropy = std::move(e);
        }
        for (const CentralityVector* c : {&*r.strength, &*r.eigenvector}) {
            GpdRow row{w.kind, filter, c->kind, std::nullopt, {}};
            try {
                row.fit = gpd_fit(c->values, cfg.gpd_threshold_quantile);
            } catch (const Error& e) {
                row.error = e.what();
            }
            r.gpd.push_back(std::move(row));
        }
        net_out = std::move(net);
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
        r.strength.reset();
        r.eigenvector.reset();
        r.entropies.clear();
        r.gpd.clear();
        net_out.reset();
        main_entropy.reset();
    }
    return r;
}

std::string csv_text(const std::function<void(std::ostream&)>& body) {
    std::ostringstream out;
    body(out);
    return out.str();
}

json entropy_json(const std::vector<EntropyBlock>& blocks) {
    json arr = json::array();
    for (const auto& b : blocks) {
        arr.push_back({{"beta", json_num(b.beta)}, {"shannon", json_num(b.shannon)},
                       {"renyi", json_num(b.renyi)}, {"tsallis", json_num(b.tsallis)}});
    }
    return arr;
}

json gpd_json(const std::vector<GpdRow>& rows) {
    json arr = json::array();
    for (const auto& g : rows) {
        json item{{"centrality", std::string(to_string(g.centrality))}};
        if (g.fit) {
            item["status"] = g.fit->converged ? "ok" : "not_converged";
            item["threshold"] = json_num(g.fit->threshold);
            item["n_exceed"] = g.fit->n_exceed;
            item["xi"] = json_num(g.fit->xi);
            item["scale"] = json_num(g.fit->scale);
            item["ci_lo"] = json_num(g.fit->ci_lo);
            item["ci_hi"] = json_num(g.fit->ci_hi);
            item["converged"] = g.fit->converged;
        } else {
            item["status"] = "error";
            item["error"] = g.error;
        }
        arr.push_back(std::move(item));
    }
    return arr;
}

json summary_json(const std::optional<WeightSummary>& s) {
    if (!s) return nullptr;
    return {{"count", s->count}, {"min", json_num(s->min)}, {"q1", json_num(s->q1)},
            {"median", json_num(s->median)}, {"q3", json_num(s->q3)}, {"max", json_num(s->max)},
            {"mean", json_num(s->mean)}};
}

std::string fmt_multiplier(double m) { return "x" + fmt_num(m); }

// Collects output files and remembers their relative names.
class OutputWriter {
public:
    explicit OutputWriter(std::filesystem::path root) : root_(std::move(root)) {}

    void put(const std::string& rel, const std::string& text) {
        write_text_file(root_ / rel, text);
        files_.push_back(rel);
    }
    void put_json(const std::string& rel, const json& doc) { put(rel, doc.dump(2) + "\n"); }

    std::vector<std::string> files() const {
        auto f = files_;
        std::sort(f.begin(), f.end());
        return f;
    }

private:
    std::filesystem::path root_;
    std::vector<std::string> files_;
};

void write_period(OutputWriter& out, const RunConfig& cfg, const PeriodArtifacts& a) {
    const std::string dir = "periods/" + a.result.spec.label + "/";
    for (const auto& w : a.matrices) {
        const std::string kind(to_string(w.kind));
        out.put(dir + "weights_" + kind + ".csv", csv_text([&](std::ostream& o) { write_weights_csv(w, o); }));
        std::optional<TailSpec> tail;
        std::optional<double> mult;
        if (is_lgc(w.kind)) {
            tail = w.kind == WeightKind::lgc_negative ? cfg.negative_tail : cfg.positive_tail;
            mult = cfg.bandwidth_multiplier;
        }
        out.put_json(dir + "weights_" + kind + ".json", weights_json(w, tail, mult));
    }
    for (const auto& [m, w] : a.swept) {
        out.put(dir + "bandwidth/weights_" + std::string(to_string(w.kind)) + "_" + fmt_multiplier(m) + ".csv",
                csv_text([&](std::ostream& o) { write_weights_csv(w, o); }));
    }

    std::size_t net_idx = 0;
    std::vector<GpdRow> gpd_rows;
    for (const auto& cell : a.result.cells) {
        if (!cell.ok) continue;
        const FilteredNetwork& net = a.networks[net_idx];
        const EntropyReport& ent = a.main_entropy[net_idx];
        ++net_idx;
        const std::string cdir = dir + std::string(to_string(cell.kind)) + "_" + std::string(to_string(cell.filter)) + "/";
        out.put(cdir + "edges.csv", csv_text([&](std::ostream& o) { write_edges_csv(net, o); }));
        out.put(cdir + "strength.csv", csv_text([&](std::ostream& o) { write_rankings_csv(*cell.strength, o); }));
        out.put(cdir + "eigenvector.csv", csv_text([&](std::ostream& o) { write_rankings_csv(*cell.eigenvector, o); }));
        out.put(cdir + "nodes.csv", csv_text([&](std::ostream& o) {
            o << "ticker,strength,eigenvector,stationary,shannon,renyi,tsallis\n";
            for (std::size_t i = 0; i < net.n_nodes(); ++i) {
                o << net.tickers[i] << ',' << fmt_num(cell.strength->values[i]) << ','
                  << fmt_num(cell.eigenvector->values[i]) << ',' << fmt_num(ent.stationary[i]) << ','
                  << fmt_num(ent.node.shannon[i]) << ',' << fmt_num(ent.node.renyi[i]) << ','
                  << fmt_num(ent.node.tsallis[i]) << '\n';
            }
        }));
        gpd_rows.insert(gpd_rows.end(), cell.gpd.begin(), cell.gpd.end());
    }
    if (!gpd_rows.empty()) out.put(dir + "gpd.csv", csv_text([&](std::ostream& o) { write_gpd_csv(gpd_rows, o); }));
}

json metrics_document(std::span<const PeriodResult> periods) {
    json doc = json::object();
    for (const auto& p : periods) {
        json& pj = doc[p.spec.label];
        pj = json::object();
        for (const auto& c : p.cells) {
            if (!c.ok) continue;
            pj[std::string(to_string(c.kind))][std::string(to_string(c.filter))] = {
                {"n_nodes", c.n_nodes},
                {"n_edges", c.n_edges},
                {"excluded", c.excluded},
                {"avg_shortest_path", json_num(c.avg_shortest_path)},
                {"eigenvalue", json_num(c.eigenvalue)},
                {"entropy", entropy_json(c.entropies)},
                {"gpd", gpd_json(c.gpd)},
            };
        }
    }
    return doc;
}

}  // namespace

const EntropyBlock* CellReport::entropy_at(double beta) const {
    for (const auto& e : entropies) {
        if (e.beta == beta) return &e;
    }
    return nullptr;
}

WeightSummary weight_distribution_summary(const WeightMatrix& w) {
    std::vector<double> v;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            if (w.is_valid(i, j)) v.push_back(w.at(i, j));
        }
    }
    if (v.size() < 5) throw Error("weight summary: need at least 5 valid entries, have " + std::to_string(v.size()));
    std::sort(v.begin(), v.end());
    WeightSummary s;
    s.count = v.size();
    s.min = v.front();
    s.max = v.back();
    s.q1 = empirical_quantile(v, 0.25);
    s.median = empirical_quantile(v, 0.5);
    s.q3 = empirical_quantile(v, 0.75);
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    return s;
}

ReturnsPanel load_run_returns(const RunConfig& cfg) {
    if (cfg.input) return log_returns(load_prices(*cfg.input));
    if (cfg.scenario) return generate_returns(*cfg.scenario);
    throw Error("config: need 'input' or 'scenario'");
}

std::vector<PeriodSpec> resolve_periods(const RunConfig& cfg, const ReturnsPanel& panel) {
    if (!cfg.periods.empty()) return cfg.periods;
    if (cfg.scenario) return regime_periods(*cfg.scenario, panel);
    if (panel.n_days() == 0) throw Error("input has no return days");
    return {{"all", panel.dates.front(), panel.dates.back()}};
}

PeriodArtifacts analyze_period(const RunConfig& cfg, const PeriodSpec& spec, const ReturnsPanel& period_panel) {
    PeriodArtifacts a;
    PeriodResult& res = a.result;
    res.spec = spec;
    res.trading_days = period_panel.n_days();
    res.stocks_total = period_panel.n_tickers();

    const auto kinds = selected_kinds(cfg);
    const auto filters = selected_filters(cfg);
    auto fail_all = [&](const std::string& msg) {
        res.ok = false;
        res.error = msg;
        for (auto k : kinds) {
            KindReport kr;
            kr.kind = k;
            kr.error = msg;
            res.kinds.push_back(kr);
            for (auto f : filters) {
                CellReport c;
                c.period = spec.label;
                c.kind = k;
                c.filter = f;
                c.error = msg;
                res.cells.push_back(std::move(c));
            }
        }
    };

    ReturnsPanel eligible;
    try {
        eligible = eligibility_filter(period_panel, cfg.max_missing);
    } catch (const Error& e) {
        fail_all(e.what());
        return a;
    }
    res.ok = true;
    res.stocks_eligible = eligible.n_tickers();

    for (auto kind : kinds) {
        KindReport kr;
        kr.kind = kind;
        std::optional<WeightMatrix> w;
        try {
            w = build_matrix(cfg, kind, eligible, cfg.bandwidth_multiplier);
            kr.ok = true;
            kr.total_pairs = w->total_pairs();
            kr.invalid_pairs = w->invalid_pairs();
            kr.valid_pairs = kr.total_pairs - kr.invalid_pairs;
            try {
                kr.summary = weight_distribution_summary(*w);
            } catch (const Error&) {
            }
        } catch (const std::exception& e) {
            kr.ok = false;
            kr.error = e.what();
        }
        res.kinds.push_back(kr);

        for (auto filter : filters) {
            if (!w) {
                CellReport c;
                c.period = spec.label;
                c.kind = kind;
                c.filter = filter;
                c.error = kr.error;
                res.cells.push_back(std::move(c));
                continue;
            }
            std::optional<FilteredNetwork> net;
            std::optional<EntropyReport> ent;
            res.cells.push_back(run_cell(cfg, spec.label, *w, filter, net, ent));
            if (net) {
                a.networks.push_back(std::move(*net));
                a.main_entropy.push_back(std::move(*ent));
            }
        }

        if (w && is_lgc(kind)) {
            for (double m : cfg.bandwidth_sweep) {
                BandwidthSweepRow row;
                row.kind = kind;
                row.multiplier = m;
                try {
                    WeightMatrix s = m == cfg.bandwidth_multiplier ? *w : build_matrix(cfg, kind, eligible, m);
                    double max_d = 0.0, sum_d = 0.0;
                    std::size_t cnt = 0;
                    for (std::size_t i = 0; i < s.size(); ++i) {
                        for (std::size_t j = i + 1; j < s.size(); ++j) {
                            if (!s.is_valid(i, j) || !w->is_valid(i, j)) continue;
                            const double d = std::abs(s.at(i, j) - w->at(i, j));
                            max_d = std::max(max_d, d);
                            sum_d += d;
                            ++cnt;
                        }
                    }
                    row.compared_pairs = cnt;
                    row.max_abs_change = max_d;
                    row.mean_abs_change = cnt ? sum_d / static_cast<double>(cnt) : 0.0;
                    try {
                        row.summary = weight_distribution_summary(s);
                    } catch (const Error&) {
                    }
                    row.ok = true;
                    a.swept.emplace_back(m, std::move(s));
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                res.bandwidth.push_back(std::move(row));
            }
        }
        if (w) a.matrices.push_back(std::move(*w));
    }
    return a;
}

std::map<std::string, std::string> cross_period_report(std::span<const PeriodResult> periods, std::size_t top_k) {
    std::ostringstream counts, aspl, ent, gpd, overlap, wsum, bw;
    counts << "period,start,end,trading_days,stocks_total,stocks_eligible\n";
    aspl << "period,kind,filter,n_nodes,n_edges,avg_shortest_path\n";
    ent << "period,kind,filter,beta,shannon,renyi,tsallis\n";
    gpd << "period,network,filter,centrality,threshold,n_exceed,xi,ci_lo,ci_hi,status\n";
    overlap << "period,centrality,kind_a,filter_a,kind_b,filter_b,k,overlap\n";
    wsum << "period,kind,count,min,q1,median,q3,max,mean\n";
    bw << "period,kind,multiplier,compared_pairs,max_abs_change,mean_abs_change,median\n";

    for (const auto& p : periods) {
        const std::string& label = p.spec.label;
        counts << label << ',' << format_date(p.spec.start) << ',' << format_date(p.spec.end) << ','
               << p.trading_days << ',' << p.stocks_total << ',' << p.stocks_eligible << '\n';
        for (const auto& k : p.kinds) {
            if (!k.summary) continue;
            const auto& s = *k.summary;
            wsum << label << ',' << to_string(k.kind) << ',' << s.count << ',' << fmt_num(s.min) << ','
                 << fmt_num(s.q1) << ',' << fmt_num(s.median) << ',' << fmt_num(s.q3) << ',' << fmt_num(s.max)
                 << ',' << fmt_num(s.mean) << '\n';
        }
        std::vector<const CellReport*> ok_cells;
        for (const auto& c : p.cells) {
            if (!c.ok) continue;
            ok_cells.push_back(&c);
            const std::string head = label + "," + std::string(to_string(c.kind)) + "," + std::string(to_string(c.filter));
            aspl << head << ',' << c.n_nodes << ',' << c.n_edges << ',' << fmt_num(c.avg_shortest_path) << '\n';
            for (const auto& e : c.entropies) {
                ent << head << ',' << fmt_num(e.beta) << ',' << fmt_num(e.shannon) << ',' << fmt_num(e.renyi)
                    << ',' << fmt_num(e.tsallis) << '\n';
            }
            for (const auto& g : c.gpd) {
                gpd << head << ',' << to_string(g.centrality) << ',';
                if (g.fit) {
                    gpd << fmt_num(g.fit->threshold) << ',' << g.fit->n_exceed << ',' << fmt_num(g.fit->xi) << ','
                        << fmt_num(g.fit->ci_lo) << ',' << fmt_num(g.fit->ci_hi) << ','
                        << (g.fit->converged ? "ok" : "not_converged") << '\n';
                } else {
                    gpd << "NaN,0,NaN,NaN,NaN,error\n";
                }
            }
        }
        for (CentralityKind ck : {CentralityKind::strength, CentralityKind::eigenvector}) {
            for (std::size_t x = 0; x < ok_cells.size(); ++x) {
                for (std::size_t y = x + 1; y < ok_cells.size(); ++y) {
                    const CellReport& a = *ok_cells[x];
                    const CellReport& b = *ok_cells[y];
                    const CentralityVector& ca = ck == CentralityKind::strength ? *a.strength : *a.eigenvector;
                    const CentralityVector& cb = ck == CentralityKind::strength ? *b.strength : *b.eigenvector;
                    const std::size_t k = std::min({top_k, ca.values.size(), cb.values.size()});
                    overlap << label << ',' << to_string(ck) << ',' << to_string(a.kind) << ','
                            << to_string(a.filter) << ',' << to_string(b.kind) << ',' << to_string(b.filter) << ','
                            << k << ',';
                    try {
                        overlap << top_k_overlap(ca, cb, k) << '\n';
                    } catch (const Error&) {
                        overlap << "NaN\n";  // node sets differ after exclusions
                    }
                }
            }
        }
        for (const auto& r : p.bandwidth) {
            if (!r.ok) continue;
            bw << label << ',' << to_string(r.kind) << ',' << fmt_num(r.multiplier) << ',' << r.compared_pairs
               << ',' << fmt_num(r.max_abs_change) << ',' << fmt_num(r.mean_abs_change) << ','
               << fmt_num(r.summary ? r.summary->median : std::nan("")) << '\n';
        }
    }
    return {
        {"periods.csv", counts.str()},
        {"avg_shortest_path.csv", aspl.str()},
        {"entropy.csv", ent.str()},
        {"gpd.csv", gpd.str()},
        {"top_k_overlap.csv", overlap.str()},
        {"weight_summary.csv", wsum.str()},
        {"bandwidth_sweep.csv", bw.str()},
    };
}

RunManifest run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const auto t_run = std::chrono::steady_clock::now();
    OutputWriter out(cfg.output_dir);
    std::filesystem::create_directories(cfg.output_dir);

    const ReturnsPanel returns = load_run_returns(cfg);
    const std::vector<PeriodSpec> periods = resolve_periods(cfg, returns);
    validate_periods(periods);

    std::vector<PeriodResult> results;
    json timing_periods = json::array();
    for (const auto& spec : periods) {
        const auto t0 = std::chrono::steady_clock::now();
        PeriodArtifacts a;
        std::optional<ReturnsPanel> sub;
        try {
            sub = segment_periods(returns, std::span<const PeriodSpec>(&spec, 1)).front();
        } catch (const Error& e) {
            ReturnsPanel empty;
            a = analyze_period(cfg, spec, empty);  // fills failed cells
            a.result.ok = false;
            a.result.error = e.what();
            for (auto& c : a.result.cells) c.error = e.what();
            for (auto& k : a.result.kinds) k.error = e.what();
        }
        if (sub) a = analyze_period(cfg, spec, *sub);
        write_period(out, cfg, a);
        timing_periods.push_back({{"label", spec.label}, {"seconds", seconds_since(t0)}});
        results.push_back(std::move(a.result));
    }

    for (const auto& [name, text] : cross_period_report(results, cfg.top_k)) out.put("summary/" + name, text);
    out.put_json("summary/metrics.json", metrics_document(results));

    RunManifest m;
    json period_docs = json::array();
    json cell_docs = json::array();
    for (const auto& p : results) {
        json kinds = json::object();
        for (const auto& k : p.kinds) {
            json kj{{"status", k.ok ? "ok" : "error"}, {"valid_pairs", k.valid_pairs},
                    {"invalid_pairs", k.invalid_pairs}, {"total_pairs", k.total_pairs},
                    {"summary", summary_json(k.summary)}};
            if (!k.ok) kj["error"] = k.error;
            kinds[std::string(to_string(k.kind))] = kj;
        }
        json pj{{"label", p.spec.label}, {"start", format_date(p.spec.start)}, {"end", format_date(p.spec.end)},
                {"status", p.ok ? "ok" : "error"}, {"trading_days", p.trading_days},
                {"stocks_total", p.stocks_total}, {"stocks_eligible", p.stocks_eligible}, {"pairs", kinds}};
        if (!p.ok) pj["error"] = p.error;
        period_docs.push_back(std::move(pj));
        for (const auto& c : p.cells) {
            ++m.cells_total;
            if (!c.ok) ++m.cells_failed;
            json cj{{"period", c.period}, {"kind", std::string(to_string(c.kind))},
                    {"filter", std::string(to_string(c.filter))}, {"status", c.ok ? "ok" : "error"}};
            if (!c.ok) cj["error"] = c.error;
            cell_docs.push_back(std::move(cj));
        }
    }

    json timings{{"total_seconds", seconds_since(t_run)},
                 {"workers", cfg.effective_workers()},
                 {"kernel_isa", std::string(kernels::isa_name(kernels::active_isa()))},
                 {"periods", timing_periods}};
    out.put_json("timings.json", timings);

    m.files = out.files();
    m.document = {
        {"config", config_echo(cfg)},
        {"periods", period_docs},
        {"cells", cell_docs},
        {"cells_total", m.cells_total},
        {"cells_ok", m.cells_total - m.cells_failed},
        {"cells_failed", m.cells_failed},
        {"exit_code", m.exit_code()},
        {"files", m.files},
    };
    write_text_file(cfg.output_dir / "manifest.json", m.document.dump(2) + "\n");
    return m;
}

}  // namespace lgcnet
