#pragma once

#include "lgcnet/market_data.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgcnet {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Per-coordinate Gaussian kernel bandwidths.
struct Bandwidth {
    double b1;
    double b2;

    Bandwidth(double b1_, double b2_);
    explicit Bandwidth(double b) : Bandwidth(b, b) {}
};

/// Kernel value at the origin, 1 / (2 pi b1 b2).
double kernel_peak(const Bandwidth& bw);

enum class FitStatus {
    ok,
    low_effective_n,  // too little kernel mass near the point
    not_converged,
    degenerate,       // |rho| ran into the clamp (near-perfect local dependence)
};

std::string_view to_string(FitStatus s);

/// Local bivariate Gaussian fitted around `point`.
struct LocalGaussParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;
    Point point;
    bool converged = false;
    double effective_n = 0.0;  // sum of kernel weights relative to the kernel peak
    FitStatus status = FitStatus::not_converged;

    bool valid() const { return status == FitStatus::ok; }
};

/// Paired observations with no missing values.
struct PairedSamples {
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
};

/// Positions where both inputs are non-NaN.
PairedSamples pairwise_complete(std::span<const double> a, std::span<const double> b);

/// Empirical normal scores: the value with (average) rank r among the m
/// present values maps to Phi^{-1}((r - 0.5) / m). NaN stays NaN.
std::vector<double> rank_normalize(std::span<const double> series);

/// 1.75 * sigma * n^(-1/6).
double plugin_bandwidth(std::size_t n, double sigma);

/// Local penalized log-likelihood, evaluated directly over the samples:
///   n^-1 sum_i K_b(X_i - x) log psi(X_i; theta) - N(x; mu, Sigma + diag(b^2)).
/// Throws Error if the result is not finite.
double local_loglik(const LocalGaussParams& theta, Point point, const PairedSamples& data,
                    const Bandwidth& bw);

/// The same objective as local_loglik, computed from kernel moments gathered
/// once per (data, point, bandwidth). Each evaluation is O(1).
class LocalLikelihood {
public:
    LocalLikelihood(const PairedSamples& data, Point point, const Bandwidth& bw);

    double operator()(double mu1, double mu2, double sigma1, double sigma2, double rho) const;
    double operator()(const LocalGaussParams& theta) const {
        return (*this)(theta.mu1, theta.mu2, theta.sigma1, theta.sigma2, theta.rho);
    }

    double effective_n() const { return s0_; }
    /// Kernel-weighted moments at the point, used as the optimizer start.
    LocalGaussParams weighted_moments() const;

private:
    Point point_;
    Bandwidth bw_;
    double n_;
    double s0_, s1_, s2_, s11_, s22_, s12_;
};

struct LocalFitOptions {
    std::size_t min_obs = 50;
    double min_effective_n = 5.0;
    int max_iter = 200;
    double step_tol = 1e-6;
    double rho_clamp = 0.999;
};

/// Maximizes the local likelihood over (mu1, mu2, log sigma1, log sigma2,
/// atanh rho). Throws Error when fewer than opt.min_obs samples are given;
/// other failures come back through `status`.
LocalGaussParams estimate_local_gauss(const PairedSamples& data, Point point, const Bandwidth& bw,
                                      const LocalFitOptions& opt = {});

enum class TailSide { negative, positive };

std::string_view to_string(TailSide s);

struct TailSpec {
    TailSide side = TailSide::negative;
    double quantile_lo = 0.05;
    double quantile_hi = 0.20;
    double step = 0.01;

    static TailSpec negative_default() { return {TailSide::negative, 0.05, 0.20, 0.01}; }
    static TailSpec positive_default() { return {TailSide::positive, 0.80, 0.95, 0.01}; }

    void validate() const;
    /// lo, lo + step, ... up to hi inclusive (with a 1e-9 allowance).
    std::vector<double> grid() const;
};

struct DiagPoint {
    double quantile = 0.0;
    double rho = 0.0;
    bool valid = false;
};

struct DiagonalOptions {
    std::size_t min_overlap = 100;
    /// Multiplies the plug-in bandwidth 1.75 n^(-1/6) (sigma = 1 after
    /// normalization).
    double bandwidth_multiplier = 1.0;
    /// Replaces the plug-in rule entirely when set.
    std::optional<double> bandwidth_override;
    LocalFitOptions fit;
};

/// Diagonal local Gaussian correlation at (Phi^{-1}(p), Phi^{-1}(p)) for each
/// p on the tail grid, on rank-normalized pairwise-complete data.
std::vector<DiagPoint> diagonal_lgc(std::span<const double> a, std::span<const double> b,
                                    const TailSpec& tail, const DiagonalOptions& opt = {});

struct TailWeight {
    double value = 0.0;
    bool valid = false;
};

/// Mean of the valid diagonal values; invalid unless at least
/// `min_valid_fraction` of the grid is valid.
TailWeight tail_mean_weight(std::span<const DiagPoint> diag, double min_valid_fraction = 0.5);

enum class WeightKind { lgc_negative, lgc_positive, pearson };

std::string_view to_string(WeightKind k);
WeightKind parse_weight_kind(std::string_view s);

/// Symmetric dependence matrix with unit diagonal. Invalid entries hold NaN.
struct WeightMatrix {
    WeightKind kind = WeightKind::pearson;
    std::vector<std::string> tickers;
    std::vector<double> weights;   // row-major N x N
    std::vector<std::uint8_t> valid;

    WeightMatrix() = default;
    WeightMatrix(WeightKind k, std::vector<std::string> names);

    std::size_t size() const { return tickers.size(); }
    double at(std::size_t i, std::size_t j) const { return weights[i * size() + j]; }
    bool is_valid(std::size_t i, std::size_t j) const { return valid[i * size() + j] != 0; }
    void set(std::size_t i, std::size_t j, double w);
    void set_invalid(std::size_t i, std::size_t j);

    std::size_t invalid_pairs() const;
    std::size_t total_pairs() const { return size() * (size() - 1) / 2; }
};

/// Sample Pearson correlation over pairwise-complete days; nullopt when the
/// overlap is below min_overlap or either side has zero variance.
std::optional<double> pearson_pair(std::span<const double> a, std::span<const double> b,
                                   std::size_t min_overlap = 100);

WeightMatrix pearson_matrix(const ReturnsPanel& panel, std::size_t min_overlap = 100,
                            unsigned workers = 1);

struct LgcConfig {
    TailSpec tail = TailSpec::negative_default();
    DiagonalOptions diagonal;
    double min_valid_fraction = 0.5;
    double max_invalid_pair_fraction = 0.2;
    unsigned workers = 1;
};

/// Tail-averaged diagonal LGC for every unordered pair. Throws Error when
/// more than max_invalid_pair_fraction of the pairs are invalid.
WeightMatrix lgc_weight_matrix(const ReturnsPanel& panel, const LgcConfig& config);

}  // namespace lgcnet
