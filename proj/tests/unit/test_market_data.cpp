#include "doctest.h"

#include "lgcnet/error.hpp"
#include "lgcnet/market_data.hpp"
#include "lgcnet/synth_market.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace lgcnet;

namespace {

PricePanel parse(const std::string& text) {
    std::istringstream in(text);
    return parse_prices(in, "test.csv");
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("dates parse in both notations and reject impossible days") {
    CHECK(parse_date("20040407") == 20040407);
    CHECK(parse_date("2004-04-07") == 20040407);
    CHECK(format_date(20191231) == "20191231");
    CHECK(parse_date("2020-02-29") == 20200229);
    CHECK_THROWS_AS(parse_date("2019-02-29"), Error);
    CHECK_THROWS_AS(parse_date("20041301"), Error);
    CHECK_THROWS_AS(parse_date("2004/04/07"), Error);
    CHECK_THROWS_AS(parse_date(""), Error);
}

TEST_CASE("two tickers by three days, all present") {
    auto p = parse("date,ticker,close\n20200102,A,10\n20200102,B,20\n20200103,A,11\n"
                   "20200103,B,21\n20200106,A,12\n20200106,B,22\n");
    REQUIRE(p.n_tickers() == 2);
    REQUIRE(p.n_days() == 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t t = 0; t < 3; ++t) CHECK(p.present(i, t));
    CHECK(p.at(1, 2) == 22.0);
}

TEST_CASE("a ticker missing a day gets a missing marker, dates are the union") {
    auto p = parse("date,ticker,close\n2020-01-02,A,10\n2020-01-02,B,20\n2020-01-03,B,21\n2020-01-06,A,12\n");
    REQUIRE(p.n_days() == 3);
    CHECK(p.tickers == std::vector<std::string>{"A", "B"});
    CHECK_FALSE(p.present(0, 1));
    CHECK_FALSE(p.present(1, 2));
    CHECK(p.present(0, 2));
}

TEST_CASE("ingestion errors carry the line number") {
    CHECK(error_of([] { parse("date,ticker,close\n20200102,A,-1\n"); }).find("non-positive price") != std::string::npos);
    CHECK(error_of([] { parse("date,ticker,close\n20200102,A,1\n20200102,A,2\n"); }).find("duplicate") != std::string::npos);
    const auto msg = error_of([] { parse("date,ticker,close\n20200102,A,1\n20200103,A\n"); });
    CHECK(msg.find("test.csv:3") != std::string::npos);
    CHECK_FALSE(error_of([] { parse("date,ticker,close\nxx,A,1\n"); }).empty());
    CHECK_FALSE(error_of([] { parse("day,ticker,close\n20200102,A,1\n"); }).empty());
    CHECK_FALSE(error_of([] { parse("date,ticker,close\n20200102,A,abc\n"); }).empty());
}

TEST_CASE("log returns") {
    const double e = std::exp(1.0);
    PricePanel p;
    p.tickers = {"A", "B", "C"};
    p.dates = {20200102, 20200103, 20200106};
    const double nan = std::nan("");
    p.prices = {1.0, e, e, 100.0, 110.0, nan, 100.0, nan, 120.0};
    auto r = log_returns(p);
    REQUIRE(r.n_days() == 2);
    CHECK(r.dates == std::vector<Date>{20200103, 20200106});
    CHECK(r.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.at(0, 1) == doctest::Approx(0.0));
    CHECK(r.at(1, 0) == doctest::Approx(0.0953102).epsilon(1e-6));
    CHECK(std::isnan(r.at(1, 1)));
    CHECK(std::isnan(r.at(2, 0)));
    CHECK(std::isnan(r.at(2, 1)));
}

TEST_CASE("cumulative log returns reconstruct the price ratio") {
    auto panel = gen_gaussian_panel(3, 400, 0.3, 11);
    auto prices = returns_to_prices(panel, 50.0);
    auto back = log_returns(prices);
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (std::size_t t = 0; t < back.n_days(); ++t) sum += back.at(i, t);
        const double ratio = prices.at(i, prices.n_days() - 1) / prices.at(i, 0);
        CHECK(std::abs(std::exp(sum) / ratio - 1.0) < 1e-12);
    }
}

TEST_CASE("segmenting") {
    auto panel = gen_gaussian_panel(2, 300, 0.0, 5, 20040101);
    SUBCASE("a period inside a longer panel keeps its dates in range") {
        std::vector<PeriodSpec> specs{{"p1", 20040407, 20050606}};
        auto parts = segment_periods(panel, specs);
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].dates.front() >= 20040407);
        CHECK(parts[0].dates.back() <= 20050606);
        CHECK(parts[0].tickers == panel.tickers);
    }
    SUBCASE("an all-covering period is the identity") {
        std::vector<PeriodSpec> specs{{"all", 19000101, 29991231}};
        CHECK(segment_periods(panel, specs)[0] == panel);
    }
    SUBCASE("no overlapping days is an error") {
        std::vector<PeriodSpec> specs{{"none", 19900101, 19901231}};
        CHECK(error_of([&] { segment_periods(panel, specs); }).find("empty period") != std::string::npos);
    }
    SUBCASE("overlapping or unordered periods are rejected") {
        std::vector<PeriodSpec> specs{{"a", 20040101, 20040301}, {"b", 20040201, 20040401}};
        CHECK_THROWS_AS(validate_periods(specs), Error);
        std::vector<PeriodSpec> bad{{"a", 20040301, 20040101}};
        CHECK_THROWS_AS(validate_periods(bad), Error);
    }
}

TEST_CASE("round trip: write, load, segment with one covering period") {
    auto returns = gen_gaussian_panel(4, 120, 0.2, 9);
    auto prices = returns_to_prices(returns);
    const auto path = std::filesystem::temp_directory_path() / "lgcnet_roundtrip.csv";
    {
        std::ofstream out(path);
        write_prices(prices, out);
    }
    auto loaded = load_prices(path);
    CHECK(loaded.tickers == prices.tickers);
    CHECK(loaded.dates == prices.dates);
    CHECK(loaded.prices == prices.prices);
    auto r = log_returns(loaded);
    std::vector<PeriodSpec> all{{"all", r.dates.front(), r.dates.back()}};
    CHECK(segment_periods(r, all)[0] == r);
    std::filesystem::remove(path);
}

TEST_CASE("eligibility boundary at 30 missing returns") {
    ReturnsPanel p;
    p.tickers = {"K0", "K30", "K31"};
    const std::size_t T = 200;
    p.dates = weekday_calendar(20100104, T);
    p.returns.assign(3 * T, 0.01);
    const double nan = std::nan("");
    for (std::size_t t = 0; t < 30; ++t) p.returns[1 * T + t] = nan;
    for (std::size_t t = 0; t < 31; ++t) p.returns[2 * T + t] = nan;
    auto kept = eligibility_filter(p, 30);
    CHECK(kept.tickers == std::vector<std::string>{"K0", "K30"});
    CHECK(eligibility_filter(kept, 30) == kept);  // idempotent

    ReturnsPanel none = p;
    none.tickers = {"K31"};
    none.returns.assign(p.returns.begin() + 2 * T, p.returns.end());
    CHECK(error_of([&] { eligibility_filter(none, 30); }).find("no eligible stocks") != std::string::npos);
}

TEST_CASE("period files accept a bare array or an object") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = dir / "lgcnet_periods_a.json";
    const auto b = dir / "lgcnet_periods_b.json";
    std::ofstream(a) << R"([{"label":"p1","start":"2004-04-07","end":20050606}])";
    std::ofstream(b) << R"({"periods":[{"label":"p1","start":20040407,"end":20050606},{"label":"p2","start":20050607,"end":20071016}]})";
    auto pa = load_periods(a);
    REQUIRE(pa.size() == 1);
    CHECK(pa[0].start == 20040407);
    CHECK(pa[0].end == 20050606);
    CHECK(load_periods(b).size() == 2);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}
