#include "lgcnet/synth_market.hpp"

#include "lgcnet/error.hpp"
#include "lgcnet/normal.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace lgcnet {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const long doe = z - era * 146097;
    const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = yoe + era * 400;
    const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const long mp = (5 * doy + 2) / 153;
    const long d = doy - (153 * mp + 2) / 5 + 1;
    const long m = mp + (mp < 10 ? 3 : -9);
    return static_cast<Date>((y + (m <= 2)) * 10000 + m * 100 + d);
}

bool weekend(long days) {
    const long wd = ((days % 7) + 7 + 3) % 7;  // 1970-01-01 was a Thursday; 0 = Monday
    return wd >= 5;
}

// Conditional inverse for the k-th coordinate (k >= 1, zero-based) of an
// exchangeable Clayton copula given sum_{j<k} u_j^-theta.
double clayton_conditional(double sum_pow, std::size_t k, double theta, double w) {
    const double a = sum_pow - static_cast<double>(k) + 1.0;
    const double expo = -theta / (1.0 + static_cast<double>(k) * theta);
    return std::pow(a * (std::pow(w, expo) - 1.0) + 1.0, -1.0 / theta);
}

double clamp_unit(double u) { return std::fmin(std::fmax(u, 1e-16), 1.0 - 1e-16); }

ReturnsPanel empty_panel(std::size_t n_stocks, std::size_t n_days, Date start) {
    ReturnsPanel p;
    for (std::size_t i = 0; i < n_stocks; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
        p.tickers.emplace_back(buf);
    }
    p.dates = weekday_calendar(start, n_days);
    p.returns.assign(n_stocks * n_days, 0.0);
    return p;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2DULL))) {}

double Rng::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Rng::student_t(int df) {
    if (df <= 0) throw Error("student_t: df must be positive");
    const double z = normal();
    double chi2 = 0.0;
    for (int k = 0; k < df; ++k) {
        const double g = normal();
        chi2 += g * g;
    }
    return z / std::sqrt(chi2 / df);
}

std::vector<Date> weekday_calendar(Date start, std::size_t count) {
    long day = days_from_civil(start / 10000, (start / 100) % 100, start % 100);
    std::vector<Date> out;
    out.reserve(count);
    while (out.size() < count) {
        if (!weekend(day)) out.push_back(civil_from_days(day));
        ++day;
    }
    return out;
}

PairedSamples gen_bivariate_gaussian(double rho, std::size_t n, std::uint64_t seed) {
    if (!(std::abs(rho) < 1.0)) throw Error("gen_bivariate_gaussian: need |rho| < 1");
    Rng rng(seed);
    const double c = std::sqrt(1.0 - rho * rho);
    PairedSamples s;
    s.x.resize(n);
    s.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        s.x[i] = z1;
        s.y[i] = rho * z1 + c * z2;
    }
    return s;
}

PairedSamples gen_clayton_pair(double theta, std::size_t n, std::uint64_t seed) {
    if (!(theta > 0.0)) throw Error("gen_clayton_pair: theta must be positive");
    Rng rng(seed);
    PairedSamples s;
    s.x.resize(n);
    s.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u1 = rng.uniform();
        const double w = rng.uniform();
        const double u2 = clayton_conditional(std::pow(u1, -theta), 1, theta, w);
        s.x[i] = norm_quantile(u1);
        s.y[i] = norm_quantile(clamp_unit(u2));
    }
    return s;
}

PairedSamples gen_parabola(std::size_t n, double noise_sd, std::uint64_t seed) {
    if (!(noise_sd >= 0.0)) throw Error("gen_parabola: noise_sd must be non-negative");
    Rng rng(seed);
    PairedSamples s;
    s.x.resize(n);
    s.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal();
        const double e = rng.normal();
        s.x[i] = x;
        s.y[i] = x * x + noise_sd * e;
    }
    return s;
}

void ScenarioSpec::validate() const {
    if (n_stocks < 2) throw Error("scenario: n_stocks must be at least 2");
    if (total_days() < 100) throw Error("scenario: need at least 100 days");
    switch (generator) {
        case GeneratorKind::gaussian:
            if (!(std::abs(rho) < 1.0)) throw Error("scenario: gaussian rho must satisfy |rho| < 1");
            break;
        case GeneratorKind::clayton:
            if (!(theta > 0.0)) throw Error("scenario: clayton theta must be positive");
            break;
        case GeneratorKind::parabola:
            if (!(noise_sd >= 0.0)) throw Error("scenario: parabola noise_sd must be non-negative");
            break;
        case GeneratorKind::factor:
            if (!(factor.beta_lo <= factor.beta_hi)) throw Error("scenario: beta_lo > beta_hi");
            if (factor.factor_df < 3) throw Error("scenario: factor_df must be >= 3 (finite variance)");
            if (!(factor.idio_sd >= 0.0 && factor.return_scale > 0.0)) throw Error("scenario: bad volatility");
            if (!(factor.crash_mix >= 0.0 && factor.crash_mix <= 1.0)) throw Error("scenario: crash_mix outside [0,1]");
            if (!(factor.crash_clayton_theta > 0.0)) throw Error("scenario: crash theta must be positive");
            break;
    }
    for (const auto& r : regimes) {
        if (r.label.empty() || r.days == 0) throw Error("scenario: regime needs a label and days > 0");
    }
}

std::size_t ScenarioSpec::total_days() const {
    if (generator != GeneratorKind::factor || regimes.empty()) return n_days;
    std::size_t t = 0;
    for (const auto& r : regimes) t += r.days;
    return t;
}

ReturnsPanel gen_gaussian_panel(std::size_t n_stocks, std::size_t n_days, double rho, std::uint64_t seed,
                                Date start_date) {
    if (!(rho >= 0.0 && rho < 1.0)) throw Error("gen_gaussian_panel: need 0 <= rho < 1");
    ReturnsPanel p = empty_panel(n_stocks, n_days, start_date);
    Rng common(seed, 0);
    std::vector<Rng> own;
    for (std::size_t i = 0; i < n_stocks; ++i) own.emplace_back(seed, i + 1);
    const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
    for (std::size_t t = 0; t < n_days; ++t) {
        const double f = common.normal();
        for (std::size_t i = 0; i < n_stocks; ++i) {
            p.returns[i * n_days + t] = 0.01 * (a * f + b * own[i].normal());
        }
    }
    return p;
}

ReturnsPanel gen_clayton_panel(std::size_t n_stocks, std::size_t n_days, double theta, std::uint64_t seed,
                               Date start_date) {
    if (!(theta > 0.0)) throw Error("gen_clayton_panel: theta must be positive");
    ReturnsPanel p = empty_panel(n_stocks, n_days, start_date);
    std::vector<Rng> own;
    for (std::size_t i = 0; i < n_stocks; ++i) own.emplace_back(seed, i + 1);
    for (std::size_t t = 0; t < n_days; ++t) {
        double sum_pow = 0.0;
        for (std::size_t i = 0; i < n_stocks; ++i) {
            const double w = own[i].uniform();
            const double u = i == 0 ? w : clamp_unit(clayton_conditional(sum_pow, i, theta, w));
            sum_pow += std::pow(u, -theta);
            p.returns[i * n_days + t] = 0.01 * norm_quantile(u);
        }
    }
    return p;
}

ReturnsPanel gen_factor_market(const ScenarioSpec& spec) {
    spec.validate();
    const FactorParams& fp = spec.factor;
    std::vector<Regime> schedule = spec.regimes;
    if (schedule.empty()) schedule.push_back({"all", spec.n_days, false});
    const std::size_t days = spec.total_days();
    const std::size_t n = spec.n_stocks;
    ReturnsPanel p = empty_panel(n, days, spec.start_date);

    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        beta[i] = n == 1 ? fp.beta_lo
                         : fp.beta_lo + (fp.beta_hi - fp.beta_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    const double t_scale = std::sqrt((fp.factor_df - 2.0) / fp.factor_df);  // unit-variance factor
    Rng factor_rng(spec.seed, 0);
    std::vector<Rng> own;
    for (std::size_t i = 0; i < n; ++i) own.emplace_back(spec.seed, i + 1);

    std::size_t t = 0;
    for (const auto& regime : schedule) {
        const double vol = regime.crash ? fp.crash_vol_multiplier : 1.0;
        const double keep = regime.crash ? std::sqrt(1.0 - fp.crash_mix) : 1.0;
        const double mix = regime.crash ? std::sqrt(fp.crash_mix) : 0.0;
        const double theta = fp.crash_clayton_theta;
        for (std::size_t d = 0; d < regime.days; ++d, ++t) {
            const double f = vol * t_scale * factor_rng.student_t(fp.factor_df);
            double sum_pow = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = own[i].normal();
                double shock = 0.0;
                if (regime.crash) {
                    const double w = own[i].uniform();
                    const double u = i == 0 ? w : clamp_unit(clayton_conditional(sum_pow, i, theta, w));
                    sum_pow += std::pow(u, -theta);
                    shock = norm_quantile(u);
                }
                const double idio = fp.idio_sd * (keep * e + mix * shock);
                p.returns[i * days + t] = fp.return_scale * (beta[i] * f + idio);
            }
        }
    }
    return p;
}

ReturnsPanel generate_returns(const ScenarioSpec& spec) {
    spec.validate();
    switch (spec.generator) {
        case GeneratorKind::gaussian:
            return gen_gaussian_panel(spec.n_stocks, spec.n_days, spec.rho, spec.seed, spec.start_date);
        case GeneratorKind::clayton:
            return gen_clayton_panel(spec.n_stocks, spec.n_days, spec.theta, spec.seed, spec.start_date);
        case GeneratorKind::parabola: {
            ReturnsPanel p = empty_panel(spec.n_stocks, spec.n_days, spec.start_date);
            Rng base(spec.seed, 0);
            std::vector<Rng> own;
            for (std::size_t i = 1; i < spec.n_stocks; ++i) own.emplace_back(spec.seed, i);
            for (std::size_t t = 0; t < spec.n_days; ++t) {
                const double x = base.normal();
                p.returns[t] = 0.01 * x;
                for (std::size_t i = 1; i < spec.n_stocks; ++i) {
                    p.returns[i * spec.n_days + t] = 0.01 * (x * x + spec.noise_sd * own[i - 1].normal());
                }
            }
            return p;
        }
        case GeneratorKind::factor:
            return gen_factor_market(spec);
    }
    throw Error("unknown generator");
}

std::vector<PeriodSpec> regime_periods(const ScenarioSpec& spec, const ReturnsPanel& panel) {
    std::vector<PeriodSpec> out;
    if (panel.dates.empty()) return out;
    if (spec.generator != GeneratorKind::factor || spec.regimes.empty()) {
        out.push_back({"all", panel.dates.front(), panel.dates.back()});
        return out;
    }
    std::size_t t = 0;
    for (const auto& r : spec.regimes) {
        out.push_back({r.label, panel.dates[t], panel.dates[t + r.days - 1]});
        t += r.days;
    }
    return out;
}

PricePanel returns_to_prices(const ReturnsPanel& returns, double p0) {
    PricePanel p;
    p.tickers = returns.tickers;
    const std::size_t days = returns.n_days();
    if (days == 0) return p;
    // the base price sits on the weekday before the first return date
    const Date first = returns.dates.front();
    long day = days_from_civil(first / 10000, (first / 100) % 100, first % 100) - 1;
    while (weekend(day)) --day;
    p.dates.push_back(civil_from_days(day));
    p.dates.insert(p.dates.end(), returns.dates.begin(), returns.dates.end());
    p.prices.assign(p.tickers.size() * (days + 1), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < p.tickers.size(); ++i) {
        double level = p0;
        p.prices[i * (days + 1)] = level;
        for (std::size_t t = 0; t < days; ++t) {
            const double r = returns.at(i, t);
            if (std::isnan(r)) {
                level = std::numeric_limits<double>::quiet_NaN();
            } else if (!std::isnan(level)) {
                level *= std::exp(r);
            }
            p.prices[i * (days + 1) + t + 1] = level;
        }
    }
    return p;
}

}  // namespace lgcnet

namespace lgcnet {

std::vector<double> gen_gpd(double xi, double scale, std::size_t n, std::uint64_t seed) {
    if (!(scale > 0.0)) throw Error("gen_gpd: scale must be positive");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) {
        const double u = rng.uniform();
        v = xi == 0.0 ? -scale * std::log(u) : scale * std::expm1(-xi * std::log(u)) / xi;
    }
    return out;
}

}  // namespace lgcnet
