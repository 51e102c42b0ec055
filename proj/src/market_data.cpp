#include "lgcnet/market_data.hpp"

#include "lgcnet/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace lgcnet {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return (m == 2 && leap(y)) ? 29 : days[m - 1];
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

}  // namespace

Date parse_date(std::string_view text) {
    text = trim(text);
    int y, m, d;
    if (text.size() == 8 && all_digits(text)) {
        y = to_int(text.substr(0, 4));
        m = to_int(text.substr(4, 2));
        d = to_int(text.substr(6, 2));
    } else if (text.size() == 10 && text[4] == '-' && text[7] == '-' && all_digits(text.substr(0, 4)) &&
               all_digits(text.substr(5, 2)) && all_digits(text.substr(8, 2))) {
        y = to_int(text.substr(0, 4));
        m = to_int(text.substr(5, 2));
        d = to_int(text.substr(8, 2));
    } else {
        throw Error("invalid date '" + std::string(text) + "' (expected YYYYMMDD or YYYY-MM-DD)");
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
        throw Error("invalid calendar date '" + std::string(text) + "'");
    }
    return y * 10000 + m * 100 + d;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08d", d);
    return buf;
}

bool PricePanel::present(std::size_t i, std::size_t t) const { return !std::isnan(at(i, t)); }

void PricePanel::validate() const {
    if (prices.size() != tickers.size() * dates.size()) throw Error("price panel: dimension mismatch");
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (dates[t] <= dates[t - 1]) throw Error("price panel: dates not strictly increasing");
    }
    for (double p : prices) {
        if (!std::isnan(p) && !(p > 0.0 && std::isfinite(p))) throw Error("price panel: non-positive price");
    }
}

std::size_t ReturnsPanel::missing_count(std::size_t i) const {
    const auto r = row(i);
    return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double v) { return std::isnan(v); }));
}

void ReturnsPanel::validate() const {
    if (returns.size() != tickers.size() * dates.size()) throw Error("returns panel: dimension mismatch");
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (dates[t] <= dates[t - 1]) throw Error("returns panel: dates not strictly increasing");
    }
    for (double r : returns) {
        if (std::isinf(r)) throw Error("returns panel: non-finite return");
    }
}

bool operator==(const ReturnsPanel& a, const ReturnsPanel& b) {
    if (a.tickers != b.tickers || a.dates != b.dates || a.returns.size() != b.returns.size()) return false;
    for (std::size_t k = 0; k < a.returns.size(); ++k) {
        const double x = a.returns[k], y = b.returns[k];
        if (std::isnan(x) != std::isnan(y)) return false;
        if (!std::isnan(x) && x != y) return false;
    }
    return true;
}

void validate_periods(std::span<const PeriodSpec> specs) {
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& s = specs[k];
        if (s.label.empty()) throw Error("period " + std::to_string(k + 1) + ": empty label");
        if (s.start > s.end) throw Error("period '" + s.label + "': start after end");
        if (k > 0 && s.start <= specs[k - 1].end) {
            throw Error("period '" + s.label + "' overlaps or precedes '" + specs[k - 1].label + "'");
        }
    }
}

std::vector<PeriodSpec> load_periods(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open period file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("period file '" + path.string() + "': " + e.what());
    }
    const nlohmann::json& list = doc.is_object() ? doc.at("periods") : doc;
    if (!list.is_array()) throw Error("period file '" + path.string() + "': expected an array of periods");
    std::vector<PeriodSpec> specs;
    for (const auto& item : list) {
        auto date_of = [&](const char* key) {
            const auto& v = item.at(key);
            return parse_date(v.is_string() ? v.get<std::string>() : std::to_string(v.get<long long>()));
        };
        specs.push_back({item.at("label").get<std::string>(), date_of("start"), date_of("end")});
    }
    validate_periods(specs);
    return specs;
}

PricePanel load_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open price file '" + path.string() + "'");
    return parse_prices(in, path.string());
}

PricePanel parse_prices(std::istream& in, std::string_view source) {
    const std::string src(source);
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> Error {
        return Error(src + ":" + std::to_string(line_no) + ": " + msg);
    };

    bool header_seen = false;
    std::map<std::pair<std::string, Date>, double> cells;
    std::set<Date> dates;
    std::set<std::string> tickers;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        for (;;) {
            const std::size_t comma = view.find(',', pos);
            fields.push_back(trim(view.substr(pos, comma == std::string_view::npos ? view.npos : comma - pos)));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "date" || fields[1] != "ticker" || fields[2] != "close") {
                throw fail("expected header 'date,ticker,close'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) throw fail("malformed row (expected 3 fields)");
        Date date;
        try {
            date = parse_date(fields[0]);
        } catch (const Error& e) {
            throw fail(e.what());
        }
        if (fields[1].empty()) throw fail("malformed row (empty ticker)");
        double close = 0.0;
        const auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), close);
        if (ec != std::errc() || ptr != fields[2].data() + fields[2].size() || !std::isfinite(close)) {
            throw fail("malformed row (bad close '" + std::string(fields[2]) + "')");
        }
        if (!(close > 0.0)) throw fail("non-positive price");
        std::string ticker(fields[1]);
        if (!cells.emplace(std::pair{ticker, date}, close).second) {
            throw fail("duplicate (date, ticker) pair " + format_date(date) + "," + ticker);
        }
        dates.insert(date);
        tickers.insert(std::move(ticker));
    }
    if (!header_seen) throw Error(src + ": empty file");

    PricePanel panel;
    panel.tickers.assign(tickers.begin(), tickers.end());
    panel.dates.assign(dates.begin(), dates.end());
    panel.prices.assign(panel.tickers.size() * panel.dates.size(), kMissing);
    std::map<std::string, std::size_t> ticker_index;
    for (std::size_t i = 0; i < panel.tickers.size(); ++i) ticker_index[panel.tickers[i]] = i;
    for (const auto& [key, close] : cells) {
        const std::size_t i = ticker_index[key.first];
        const auto t = static_cast<std::size_t>(
            std::lower_bound(panel.dates.begin(), panel.dates.end(), key.second) - panel.dates.begin());
        panel.prices[i * panel.n_days() + t] = close;
    }
    return panel;
}

void write_prices(const PricePanel& panel, std::ostream& out) {
    out << "date,ticker,close\n";
    char buf[64];
    for (std::size_t t = 0; t < panel.n_days(); ++t) {
        for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
            if (!panel.present(i, t)) continue;
            std::snprintf(buf, sizeof buf, "%.17g", panel.at(i, t));
            out << format_date(panel.dates[t]) << ',' << panel.tickers[i] << ',' << buf << '\n';
        }
    }
}

ReturnsPanel log_returns(const PricePanel& panel) {
    panel.validate();
    ReturnsPanel out;
    out.tickers = panel.tickers;
    const std::size_t days = panel.n_days();
    if (days < 2) {
        out.returns.clear();
        return out;
    }
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.returns.assign(panel.n_tickers() * (days - 1), kMissing);
    for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
        for (std::size_t t = 1; t < days; ++t) {
            if (panel.present(i, t) && panel.present(i, t - 1)) {
                out.returns[i * (days - 1) + (t - 1)] = std::log(panel.at(i, t) / panel.at(i, t - 1));
            }
        }
    }
    return out;
}

std::vector<ReturnsPanel> segment_periods(const ReturnsPanel& panel, std::span<const PeriodSpec> specs) {
    validate_periods(specs);
    std::vector<ReturnsPanel> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        const auto first = std::lower_bound(panel.dates.begin(), panel.dates.end(), spec.start);
        const auto last = std::upper_bound(panel.dates.begin(), panel.dates.end(), spec.end);
        if (first >= last) throw Error("empty period '" + spec.label + "': no trading days in range");
        const auto t0 = static_cast<std::size_t>(first - panel.dates.begin());
        const auto t1 = static_cast<std::size_t>(last - panel.dates.begin());
        ReturnsPanel sub;
        sub.tickers = panel.tickers;
        sub.dates.assign(first, last);
        sub.returns.reserve(panel.n_tickers() * (t1 - t0));
        for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
            const auto r = panel.row(i);
            sub.returns.insert(sub.returns.end(), r.begin() + static_cast<std::ptrdiff_t>(t0),
                               r.begin() + static_cast<std::ptrdiff_t>(t1));
        }
        out.push_back(std::move(sub));
    }
    return out;
}

ReturnsPanel eligibility_filter(const ReturnsPanel& panel, std::size_t max_missing) {
    ReturnsPanel out;
    out.dates = panel.dates;
    for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
        if (panel.missing_count(i) > max_missing) continue;
        out.tickers.push_back(panel.tickers[i]);
        const auto r = panel.row(i);
        out.returns.insert(out.returns.end(), r.begin(), r.end());
    }
    if (out.tickers.empty()) throw Error("no eligible stocks");
    return out;
}

}  // namespace lgcnet
