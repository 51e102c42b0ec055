#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgcnet {

/// Calendar date packed as YYYYMMDD.
using Date = int;

/// Parses `YYYYMMDD` or `YYYY-MM-DD`; throws Error on anything else or an
/// impossible calendar date.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Closing prices, ticker-major. Missing observations are NaN.
struct PricePanel {
    std::vector<std::string> tickers;
    std::vector<Date> dates;
    std::vector<double> prices;  // prices[i * n_days() + t]

    std::size_t n_tickers() const { return tickers.size(); }
    std::size_t n_days() const { return dates.size(); }
    double at(std::size_t i, std::size_t t) const { return prices[i * n_days() + t]; }
    bool present(std::size_t i, std::size_t t) const;
    std::span<const double> row(std::size_t i) const {
        return {prices.data() + i * n_days(), n_days()};
    }
    void validate() const;
};

/// Log returns, ticker-major; the return on dates[t] uses that day's close
/// and the previous trading day's close. Missing returns are NaN.
struct ReturnsPanel {
    std::vector<std::string> tickers;
    std::vector<Date> dates;
    std::vector<double> returns;  // returns[i * n_days() + t]

    std::size_t n_tickers() const { return tickers.size(); }
    std::size_t n_days() const { return dates.size(); }
    double at(std::size_t i, std::size_t t) const { return returns[i * n_days() + t]; }
    std::span<const double> row(std::size_t i) const {
        return {returns.data() + i * n_days(), n_days()};
    }
    std::size_t missing_count(std::size_t i) const;
    void validate() const;

    friend bool operator==(const ReturnsPanel&, const ReturnsPanel&);
};

struct PeriodSpec {
    std::string label;
    Date start = 0;
    Date end = 0;
};

/// Throws unless every spec has start <= end and specs are ordered and
/// non-overlapping.
void validate_periods(std::span<const PeriodSpec> specs);

/// Reads a period list from a JSON document: either a bare array of
/// {label, start, end} objects or an object with a "periods" array.
std::vector<PeriodSpec> load_periods(const std::filesystem::path& path);

/// CSV with header `date,ticker,close`. Tickers are sorted; the date axis is
/// the union of dates present in the file.
PricePanel load_prices(const std::filesystem::path& path);
PricePanel parse_prices(std::istream& in, std::string_view source = "<stream>");

/// Writes the panel in the same schema load_prices reads, skipping missing
/// cells.
void write_prices(const PricePanel& panel, std::ostream& out);

ReturnsPanel log_returns(const PricePanel& panel);

std::vector<ReturnsPanel> segment_periods(const ReturnsPanel& panel,
                                          std::span<const PeriodSpec> specs);

/// Keeps tickers with at most `max_missing` missing returns, in order.
ReturnsPanel eligibility_filter(const ReturnsPanel& panel, std::size_t max_missing = 30);

}  // namespace lgcnet
