#include "lgcnet/tail_fit.hpp"

#include "lgcnet/error.hpp"
#include "lgcnet/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lgcnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kXiLo = -0.99;
constexpr double kXiHi = 5.0;

// Probability-weighted-moment start (Hosking & Wallis), clipped so the
// start is inside the support.
void pwm_start(std::vector<double> y, double& xi, double& scale) {
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(y.size());
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        a0 += y[i];
        a1 += y[i] * (n - 1.0 - static_cast<double>(i)) / (n - 1.0);
    }
    a0 /= n;
    a1 /= n;
    const double denom = a0 - 2.0 * a1;
    if (denom > 0.0) {
        xi = 2.0 - a0 / denom;
        scale = 2.0 * a0 * a1 / denom;
    } else {
        xi = 0.5;
        scale = a0;
    }
    if (!std::isfinite(xi)) xi = 0.1;
    xi = std::clamp(xi, -0.45, 1.5);
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = a0 > 0.0 ? a0 : 1.0;
    if (xi < 0.0) scale = std::max(scale, -xi * y.back() * 1.05);
}

}  // namespace

double empirical_quantile(std::span<const double> samples, double p) {
    if (samples.empty()) throw Error("empirical_quantile: no samples");
    if (!(p >= 0.0 && p <= 1.0)) throw Error("empirical_quantile: p outside [0, 1]");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double gpd_loglik(std::span<const double> exceedances, double xi, double scale) {
    if (!(scale > 0.0) || !std::isfinite(xi)) return -kInf;
    const double n = static_cast<double>(exceedances.size());
    double ll = -n * std::log(scale);
    if (std::abs(xi) < 1e-6) {
        for (double y : exceedances) ll -= y / scale;
        return ll;
    }
    const double c = 1.0 + 1.0 / xi;
    for (double y : exceedances) {
        const double z = xi * y / scale;
        if (!(z > -1.0)) return -kInf;
        ll -= c * std::log1p(z);
    }
    return ll;
}

GpdFit gpd_fit_exceedances(std::span<const double> exceedances, double threshold, std::size_t min_exceed) {
    if (exceedances.size() < min_exceed) {
        throw Error("too few exceedances: " + std::to_string(exceedances.size()) + " (need " +
                    std::to_string(min_exceed) + ")");
    }
    std::vector<double> y(exceedances.begin(), exceedances.end());
    const double n = static_cast<double>(y.size());
    double xi0, s0;
    pwm_start(y, xi0, s0);

    auto objective = [&](std::span<const double> z) {
        if (z[0] < kXiLo || z[0] > kXiHi) return kInf;
        const double ll = gpd_loglik(y, z[0], std::exp(z[1]));
        return std::isfinite(ll) ? -ll / n : kInf;
    };
    BfgsOptions opt;
    opt.max_iter = 500;
    opt.step_tol = 1e-9;
    const BfgsResult res = bfgs_minimize(objective, {xi0, std::log(s0)}, opt);

    GpdFit fit;
    fit.xi = res.x[0];
    fit.scale = std::exp(res.x[1]);
    fit.threshold = threshold;
    fit.n_exceed = y.size();
    // A fit pinned at a bound is not an interior optimum.
    fit.converged = res.converged && fit.xi > kXiLo + 1e-4 && fit.xi < kXiHi - 1e-4;
    fit.loglik = gpd_loglik(y, fit.xi, fit.scale);

    // Observed information in (xi, log sigma); the xi variance is unchanged by
    // the scale reparameterization.
    const auto h = fd_hessian([&](std::span<const double> z) { return -gpd_loglik(y, z[0], std::exp(z[1])); },
                              res.x, 1e-4);
    const double det = h[0] * h[3] - h[1] * h[2];
    const double var_xi = det > 0.0 && h[3] > 0.0 ? h[3] / det : std::numeric_limits<double>::quiet_NaN();
    if (!(var_xi > 0.0) || !std::isfinite(var_xi)) {
        fit.converged = false;
        fit.ci_lo = -kInf;
        fit.ci_hi = kInf;
    } else {
        const double half = 1.959963984540054 * std::sqrt(var_xi);
        fit.ci_lo = fit.xi - half;
        fit.ci_hi = fit.xi + half;
    }
    return fit;
}

GpdFit gpd_fit(std::span<const double> samples, double threshold_quantile, std::size_t min_exceed) {
    const double u = empirical_quantile(samples, threshold_quantile);
    std::vector<double> y;
    for (double x : samples) {
        if (x > u) y.push_back(x - u);
    }
    return gpd_fit_exceedances(y, u, min_exceed);
}

std::vector<CentralityTailFit> centrality_tail_report(std::span<const CentralityTailInput> inputs,
                                                      double threshold_quantile) {
    std::vector<CentralityTailFit> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        out.push_back({in.network, in.filter, in.centrality.kind, gpd_fit(in.centrality.values, threshold_quantile)});
    }
    return out;
}

}  // namespace lgcnet
