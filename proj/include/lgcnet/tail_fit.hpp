#pragma once

#include "lgcnet/graph_filter.hpp"
#include "lgcnet/net_metrics.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lgcnet {

/// Generalized Pareto fit to threshold exceedances.
struct GpdFit {
    double xi = 0.0;
    double scale = 1.0;
    double threshold = 0.0;
    std::size_t n_exceed = 0;
    double ci_lo = 0.0;  // 95% interval for xi
    double ci_hi = 0.0;
    bool converged = false;
    double loglik = 0.0;
};

/// Linear-interpolation sample quantile (type 7).
double empirical_quantile(std::span<const double> samples, double p);

/// GPD log-likelihood of exceedances y >= 0; -inf outside the support.
/// Uses the exponential limit for |xi| < 1e-6.
double gpd_loglik(std::span<const double> exceedances, double xi, double scale);

/// ML fit to exceedances (already shifted by the threshold). Throws Error
/// with fewer than `min_exceed` values.
GpdFit gpd_fit_exceedances(std::span<const double> exceedances, double threshold = 0.0,
                           std::size_t min_exceed = 10);

/// Threshold at the empirical `threshold_quantile`; exceedances are the
/// samples strictly above it.
GpdFit gpd_fit(std::span<const double> samples, double threshold_quantile = 0.90, std::size_t min_exceed = 10);

struct CentralityTailInput {
    WeightKind network;
    FilterKind filter;
    CentralityVector centrality;
};

struct CentralityTailFit {
    WeightKind network;
    FilterKind filter;
    CentralityKind centrality;
    GpdFit fit;
};

/// One fit per input; errors propagate from gpd_fit.
std::vector<CentralityTailFit> centrality_tail_report(std::span<const CentralityTailInput> inputs,
                                                      double threshold_quantile = 0.90);

}  // namespace lgcnet
