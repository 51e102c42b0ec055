#pragma once

#include "lgcnet/dependence.hpp"
#include "lgcnet/market_data.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lgcnet {

/// Seeded random source. Each (seed, stream) pair owns an independent
/// std::mt19937_64 whose seed is derived with SplitMix64; all variates are
/// built from the raw 64-bit output so streams are identical on every
/// platform with an IEEE libm.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal (Box-Muller, cached second variate).
    double normal();
    /// Student-t with integer degrees of freedom, unscaled.
    double student_t(int df);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

PairedSamples gen_bivariate_gaussian(double rho, std::size_t n, std::uint64_t seed);

/// Clayton copula pairs by conditional inversion, with standard normal margins.
PairedSamples gen_clayton_pair(double theta, std::size_t n, std::uint64_t seed);

/// X ~ N(0,1), Y = X^2 + noise_sd * N(0,1).
PairedSamples gen_parabola(std::size_t n, double noise_sd, std::uint64_t seed);

enum class GeneratorKind { gaussian, clayton, parabola, factor };

struct FactorParams {
    double beta_lo = 0.3;
    double beta_hi = 1.8;
    int factor_df = 4;
    double idio_sd = 0.5;
    double return_scale = 0.01;       // maps unit-variance model returns to daily returns
    double crash_vol_multiplier = 3.0;
    double crash_clayton_theta = 2.0;
    double crash_mix = 0.9;           // share of idiosyncratic variance replaced by the Clayton shock
};

struct Regime {
    std::string label;
    std::size_t days = 0;
    bool crash = false;
};

struct ScenarioSpec {
    std::size_t n_stocks = 10;
    std::size_t n_days = 250;
    GeneratorKind generator = GeneratorKind::factor;
    double rho = 0.5;       // gaussian: equicorrelation
    double theta = 2.0;     // clayton
    double noise_sd = 0.1;  // parabola
    FactorParams factor;
    /// factor only; empty means one calm regime spanning n_days.
    std::vector<Regime> regimes;
    std::uint64_t seed = 1;
    Date start_date = 20100104;

    void validate() const;
    std::size_t total_days() const;
};

/// Equicorrelated Gaussian panel, unit variance scaled by 0.01.
ReturnsPanel gen_gaussian_panel(std::size_t n_stocks, std::size_t n_days, double rho, std::uint64_t seed,
                                Date start_date = 20100104);

/// Exchangeable d-dimensional Clayton copula panel with normal margins (x 0.01).
ReturnsPanel gen_clayton_panel(std::size_t n_stocks, std::size_t n_days, double theta, std::uint64_t seed,
                               Date start_date = 20100104);

/// r_it = beta_i f_t + e_it. The factor is Student-t (unit variance); crash
/// regimes scale factor volatility and mix a Clayton-coupled shock into e.
ReturnsPanel gen_factor_market(const ScenarioSpec& spec);

/// Dispatches on spec.generator. Parabola panels use stock 0 as X and every
/// other stock as X^2 plus independent noise.
ReturnsPanel generate_returns(const ScenarioSpec& spec);

/// Periods matching the regime schedule (or one period over all days).
std::vector<PeriodSpec> regime_periods(const ScenarioSpec& spec, const ReturnsPanel& panel);

/// Prices starting at `p0` on the day before the first return date.
PricePanel returns_to_prices(const ReturnsPanel& returns, double p0 = 100.0);

/// `count` consecutive weekdays starting at `start` (rolled forward if it
/// falls on a weekend).
std::vector<Date> weekday_calendar(Date start, std::size_t count);

}  // namespace lgcnet

namespace lgcnet {

/// Generalized Pareto draws by inversion: scale * ((U^-xi - 1) / xi), or the
/// exponential limit at xi = 0.
std::vector<double> gen_gpd(double xi, double scale, std::size_t n, std::uint64_t seed);

}  // namespace lgcnet
