#include "lgcnet/dependence.hpp"

#include "lgcnet/error.hpp"
#include "lgcnet/kernels.hpp"
#include "lgcnet/normal.hpp"
#include "lgcnet/optim.hpp"
#include "lgcnet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>

namespace lgcnet {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Penalty term: bivariate normal density with mean m (relative to the point)
// and covariance Sigma + diag(b1^2, b2^2), evaluated at the point.
double convolution_penalty(double m1, double m2, double s1, double s2, double rho, const Bandwidth& bw) {
    const double c11 = s1 * s1 + bw.b1 * bw.b1;
    const double c22 = s2 * s2 + bw.b2 * bw.b2;
    const double c12 = rho * s1 * s2;
    const double det = c11 * c22 - c12 * c12;
    const double quad = (c22 * m1 * m1 - 2.0 * c12 * m1 * m2 + c11 * m2 * m2) / det;
    return std::exp(-0.5 * quad) / (kTwoPi * std::sqrt(det));
}

double log_psi(double v1, double v2, double mu1, double mu2, double s1, double s2, double rho) {
    const double z1 = (v1 - mu1) / s1;
    const double z2 = (v2 - mu2) / s2;
    const double omr = 1.0 - rho * rho;
    return -std::log(kTwoPi * s1 * s2) - 0.5 * std::log(omr) -
           (z1 * z1 + z2 * z2 - 2.0 * rho * z1 * z2) / (2.0 * omr);
}

}  // namespace

Bandwidth::Bandwidth(double b1_, double b2_) : b1(b1_), b2(b2_) {
    if (!(b1 > 0.0 && std::isfinite(b1) && b2 > 0.0 && std::isfinite(b2))) {
        throw Error("bandwidth must be positive and finite");
    }
}

double kernel_peak(const Bandwidth& bw) { return 1.0 / (kTwoPi * bw.b1 * bw.b2); }

std::string_view to_string(FitStatus s) {
    switch (s) {
        case FitStatus::ok: return "ok";
        case FitStatus::low_effective_n: return "low_effective_n";
        case FitStatus::not_converged: return "not_converged";
        case FitStatus::degenerate: return "degenerate";
    }
    return "unknown";
}

std::string_view to_string(TailSide s) { return s == TailSide::negative ? "negative" : "positive"; }

PairedSamples pairwise_complete(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("pairwise_complete: length mismatch");
    PairedSamples out;
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (std::isnan(a[t]) || std::isnan(b[t])) continue;
        out.x.push_back(a[t]);
        out.y.push_back(b[t]);
    }
    return out;
}

std::vector<double> rank_normalize(std::span<const double> series) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (!std::isnan(series[t])) idx.push_back(t);
    }
    const std::size_t m = idx.size();
    if (m < 2) throw Error("rank_normalize: fewer than 2 present values");
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return series[a] < series[b]; });

    std::vector<double> out(series.size(), kNaN);
    for (std::size_t k = 0; k < m;) {
        std::size_t e = k + 1;
        while (e < m && series[idx[e]] == series[idx[k]]) ++e;
        // ranks k+1..e share their average
        const double avg_rank = 0.5 * static_cast<double>(k + 1 + e);
        const double score = norm_quantile((avg_rank - 0.5) / static_cast<double>(m));
        for (std::size_t r = k; r < e; ++r) out[idx[r]] = score;
        k = e;
    }
    return out;
}

double plugin_bandwidth(std::size_t n, double sigma) {
    return 1.75 * sigma * std::pow(static_cast<double>(n), -1.0 / 6.0);
}

double local_loglik(const LocalGaussParams& theta, Point point, const PairedSamples& data, const Bandwidth& bw) {
    if (data.size() == 0) throw Error("local_loglik: no data");
    const double kp = kernel_peak(bw);
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double u1 = (data.x[i] - point.x1) / bw.b1;
        const double u2 = (data.y[i] - point.x2) / bw.b2;
        const double k = kp * std::exp(-0.5 * (u1 * u1 + u2 * u2));
        acc += k * log_psi(data.x[i], data.y[i], theta.mu1, theta.mu2, theta.sigma1, theta.sigma2, theta.rho);
    }
    const double value = acc / static_cast<double>(data.size()) -
                         convolution_penalty(theta.mu1 - point.x1, theta.mu2 - point.x2, theta.sigma1,
                                             theta.sigma2, theta.rho, bw);
    if (!std::isfinite(value)) throw Error("local_loglik: non-finite value (degenerate parameters)");
    return value;
}

LocalLikelihood::LocalLikelihood(const PairedSamples& data, Point point, const Bandwidth& bw)
    : point_(point), bw_(bw), n_(static_cast<double>(data.size())) {
    if (data.size() == 0) throw Error("LocalLikelihood: no data");
    const auto m = kernels::kernel_moments(data.x, data.y, point.x1, point.x2, bw.b1, bw.b2);
    s0_ = m.s0;
    s1_ = m.s1;
    s2_ = m.s2;
    s11_ = m.s11;
    s22_ = m.s22;
    s12_ = m.s12;
}

double LocalLikelihood::operator()(double mu1, double mu2, double sigma1, double sigma2, double rho) const {
    const double m1 = mu1 - point_.x1;
    const double m2 = mu2 - point_.x2;
    // kernel-weighted sums of a = u - m, scaled to n^-1 sum K_b
    const double scale = kernel_peak(bw_) / n_;
    const double k0 = s0_ * scale;
    const double a11 = (s11_ - 2.0 * m1 * s1_ + m1 * m1 * s0_) * scale;
    const double a22 = (s22_ - 2.0 * m2 * s2_ + m2 * m2 * s0_) * scale;
    const double a12 = (s12_ - m1 * s2_ - m2 * s1_ + m1 * m2 * s0_) * scale;
    const double omr = 1.0 - rho * rho;
    const double quad = (a11 / (sigma1 * sigma1) + a22 / (sigma2 * sigma2) -
                         2.0 * rho * a12 / (sigma1 * sigma2)) / omr;
    const double fit = -k0 * (std::log(kTwoPi * sigma1 * sigma2) + 0.5 * std::log(omr)) - 0.5 * quad;
    return fit - convolution_penalty(m1, m2, sigma1, sigma2, rho, bw_);
}

LocalGaussParams LocalLikelihood::weighted_moments() const {
    LocalGaussParams p;
    p.point = point_;
    p.effective_n = s0_;
    if (!(s0_ > 0.0)) {
        p.mu1 = point_.x1;
        p.mu2 = point_.x2;
        return p;
    }
    const double e1 = s1_ / s0_, e2 = s2_ / s0_;
    const double v1 = s11_ / s0_ - e1 * e1;
    const double v2 = s22_ / s0_ - e2 * e2;
    const double c12 = s12_ / s0_ - e1 * e2;
    p.mu1 = point_.x1 + e1;
    p.mu2 = point_.x2 + e2;
    p.sigma1 = std::sqrt(std::max(v1, 0.0));
    p.sigma2 = std::sqrt(std::max(v2, 0.0));
    p.rho = (p.sigma1 > 0.0 && p.sigma2 > 0.0) ? c12 / (p.sigma1 * p.sigma2) : kNaN;
    return p;
}

LocalGaussParams estimate_local_gauss(const PairedSamples& data, Point point, const Bandwidth& bw,
                                      const LocalFitOptions& opt) {
    if (data.size() < opt.min_obs) {
        throw Error("insufficient overlap: " + std::to_string(data.size()) + " observations, need " +
                    std::to_string(opt.min_obs));
    }
    const LocalLikelihood lik(data, point, bw);
    LocalGaussParams start = lik.weighted_moments();
    if (start.effective_n < opt.min_effective_n) {
        start.status = FitStatus::low_effective_n;
        return start;
    }
    const double tiny = 1e-12;
    if (!(start.sigma1 > tiny && start.sigma2 > tiny) || !std::isfinite(start.rho) ||
        std::abs(start.rho) >= 1.0 - 1e-12) {
        start.status = FitStatus::degenerate;
        start.rho = std::clamp(std::isfinite(start.rho) ? start.rho : 0.0, -opt.rho_clamp, opt.rho_clamp);
        start.sigma1 = std::max(start.sigma1, tiny);
        start.sigma2 = std::max(start.sigma2, tiny);
        return start;
    }

    // Normalizing by the kernel mass keeps objective values O(1) without
    // moving the optimum.
    const double mass = lik.effective_n() * kernel_peak(bw) / static_cast<double>(data.size());
    auto objective = [&](std::span<const double> z) {
        if (std::abs(z[2]) > 30.0 || std::abs(z[3]) > 30.0 || std::abs(z[4]) > 15.0) {
            return std::numeric_limits<double>::infinity();
        }
        const double v = lik(z[0], z[1], std::exp(z[2]), std::exp(z[3]), std::tanh(z[4]));
        return std::isfinite(v) ? -v / mass : std::numeric_limits<double>::infinity();
    };

    const double r0 = std::clamp(start.rho, -0.99, 0.99);
    std::vector<double> z0 = {start.mu1, start.mu2, std::log(start.sigma1), std::log(start.sigma2),
                              std::atanh(r0)};
    BfgsOptions bopt;
    bopt.max_iter = opt.max_iter;
    bopt.step_tol = opt.step_tol;
    const BfgsResult res = bfgs_minimize(objective, std::move(z0), bopt);

    LocalGaussParams out;
    out.point = point;
    out.effective_n = start.effective_n;
    out.mu1 = res.x[0];
    out.mu2 = res.x[1];
    out.sigma1 = std::exp(res.x[2]);
    out.sigma2 = std::exp(res.x[3]);
    out.rho = std::tanh(res.x[4]);
    out.converged = res.converged;
    out.status = res.converged ? FitStatus::ok : FitStatus::not_converged;
    if (std::abs(out.rho) > opt.rho_clamp) {
        out.rho = std::copysign(opt.rho_clamp, out.rho);
        out.status = FitStatus::degenerate;
    }
    return out;
}

void TailSpec::validate() const {
    if (!(quantile_lo > 0.0 && quantile_lo < quantile_hi && quantile_hi < 1.0)) {
        throw Error("tail spec: need 0 < quantile_lo < quantile_hi < 1");
    }
    if (!(step > 0.0)) throw Error("tail spec: step must be positive");
}

std::vector<double> TailSpec::grid() const {
    validate();
    std::vector<double> g;
    for (int k = 0;; ++k) {
        const double p = quantile_lo + k * step;
        if (p > quantile_hi + 1e-9) break;
        g.push_back(p);
    }
    return g;
}

std::vector<DiagPoint> diagonal_lgc(std::span<const double> a, std::span<const double> b, const TailSpec& tail,
                                    const DiagonalOptions& opt) {
    const PairedSamples raw = pairwise_complete(a, b);
    if (raw.size() < opt.min_overlap) {
        throw Error("insufficient overlap: " + std::to_string(raw.size()) + " pairwise-complete observations, need " +
                    std::to_string(opt.min_overlap));
    }
    PairedSamples data{rank_normalize(raw.x), rank_normalize(raw.y)};
    const double b0 = opt.bandwidth_override ? *opt.bandwidth_override
                                             : opt.bandwidth_multiplier * plugin_bandwidth(data.size(), 1.0);
    const Bandwidth bw(b0);

    std::vector<DiagPoint> out;
    for (double p : tail.grid()) {
        const double q = norm_quantile(p);
        const LocalGaussParams fit = estimate_local_gauss(data, {q, q}, bw, opt.fit);
        out.push_back({p, fit.rho, fit.valid()});
    }
    return out;
}

TailWeight tail_mean_weight(std::span<const DiagPoint> diag, double min_valid_fraction) {
    double sum = 0.0;
    std::size_t n_valid = 0;
    for (const auto& d : diag) {
        if (!d.valid) continue;
        sum += d.rho;
        ++n_valid;
    }
    if (n_valid == 0 || static_cast<double>(n_valid) < min_valid_fraction * static_cast<double>(diag.size())) {
        return {kNaN, false};
    }
    return {sum / static_cast<double>(n_valid), true};
}

std::string_view to_string(WeightKind k) {
    switch (k) {
        case WeightKind::lgc_negative: return "lgc_negative";
        case WeightKind::lgc_positive: return "lgc_positive";
        case WeightKind::pearson: return "pearson";
    }
    return "unknown";
}

WeightKind parse_weight_kind(std::string_view s) {
    if (s == "lgc_negative") return WeightKind::lgc_negative;
    if (s == "lgc_positive") return WeightKind::lgc_positive;
    if (s == "pearson") return WeightKind::pearson;
    throw Error("unknown network kind '" + std::string(s) + "'");
}

WeightMatrix::WeightMatrix(WeightKind k, std::vector<std::string> names)
    : kind(k), tickers(std::move(names)) {
    const std::size_t n = tickers.size();
    weights.assign(n * n, kNaN);
    valid.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        weights[i * n + i] = 1.0;
        valid[i * n + i] = 1;
    }
}

void WeightMatrix::set(std::size_t i, std::size_t j, double w) {
    const std::size_t n = size();
    weights[i * n + j] = weights[j * n + i] = w;
    valid[i * n + j] = valid[j * n + i] = 1;
}

void WeightMatrix::set_invalid(std::size_t i, std::size_t j) {
    const std::size_t n = size();
    weights[i * n + j] = weights[j * n + i] = kNaN;
    valid[i * n + j] = valid[j * n + i] = 0;
}

std::size_t WeightMatrix::invalid_pairs() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = i + 1; j < size(); ++j) c += !is_valid(i, j);
    }
    return c;
}

std::optional<double> pearson_pair(std::span<const double> a, std::span<const double> b, std::size_t min_overlap) {
    const auto first = kernels::masked_pair_sums(a, b, 0.0, 0.0);
    if (first.n < std::max<std::size_t>(min_overlap, 2)) return std::nullopt;
    const double n = static_cast<double>(first.n);
    const double mx = first.sx / n, my = first.sy / n;
    const auto s = kernels::masked_pair_sums(a, b, mx, my);
    // Rounding leaves a residual spread on constant series; treat spreads
    // below 1e-12 of the mean level as zero variance.
    const auto flat = [n](double ss, double m) { return !(ss > n * (1e-24 * m * m)); };
    if (flat(s.sxx, mx) || flat(s.syy, my)) return std::nullopt;
    const double r = s.sxy / std::sqrt(s.sxx * s.syy);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> upper_pairs(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n > 0 ? n - 1 : 0) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    return pairs;
}

}  // namespace

WeightMatrix pearson_matrix(const ReturnsPanel& panel, std::size_t min_overlap, unsigned workers) {
    WeightMatrix w(WeightKind::pearson, panel.tickers);
    const auto pairs = upper_pairs(panel.n_tickers());
    std::vector<double> values(pairs.size(), kNaN);
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto r = pearson_pair(panel.row(pairs[k].first), panel.row(pairs[k].second), min_overlap);
        if (r) values[k] = *r;
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (!std::isnan(values[k])) w.set(pairs[k].first, pairs[k].second, values[k]);
    }
    return w;
}

WeightMatrix lgc_weight_matrix(const ReturnsPanel& panel, const LgcConfig& config) {
    config.tail.validate();
    const WeightKind kind = config.tail.side == TailSide::negative ? WeightKind::lgc_negative : WeightKind::lgc_positive;
    WeightMatrix w(kind, panel.tickers);
    const auto pairs = upper_pairs(panel.n_tickers());
    std::vector<double> values(pairs.size(), kNaN);
    parallel_for(pairs.size(), config.workers, [&](std::size_t k) {
        try {
            const auto diag = diagonal_lgc(panel.row(pairs[k].first), panel.row(pairs[k].second), config.tail,
                                           config.diagonal);
            const TailWeight tw = tail_mean_weight(diag, config.min_valid_fraction);
            if (tw.valid) values[k] = tw.value;
        } catch (const Error&) {
            // insufficient overlap: entry stays invalid
        }
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (!std::isnan(values[k])) w.set(pairs[k].first, pairs[k].second, values[k]);
    }
    const std::size_t bad = w.invalid_pairs();
    if (w.total_pairs() > 0 &&
        static_cast<double>(bad) > config.max_invalid_pair_fraction * static_cast<double>(w.total_pairs())) {
        throw Error(std::string(to_string(kind)) + ": " + std::to_string(bad) + " of " +
                    std::to_string(w.total_pairs()) + " pairs invalid");
    }
    return w;
}

}  // namespace lgcnet
