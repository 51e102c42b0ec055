#include "doctest.h"

#include "lgcnet/dependence.hpp"
#include "lgcnet/error.hpp"
#include "lgcnet/normal.hpp"
#include "lgcnet/optim.hpp"
#include "lgcnet/synth_market.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lgcnet;

namespace {

constexpr double kPi = std::numbers::pi;

// Bivariate normal density, written out independently of the library.
double bvn(double x, double y, double m1, double m2, double s1, double s2, double r) {
    const double zx = (x - m1) / s1, zy = (y - m2) / s2;
    const double q = (zx * zx - 2 * r * zx * zy + zy * zy) / (1 - r * r);
    return std::exp(-0.5 * q) / (2 * kPi * s1 * s2 * std::sqrt(1 - r * r));
}

// (K_b * psi)(x) by 2-D midpoint quadrature over +-8 sd.
double penalty_by_quadrature(const LocalGaussParams& t, Point x, double b1, double b2) {
    const int steps = 800;
    const double lo1 = t.mu1 - 8 * t.sigma1, hi1 = t.mu1 + 8 * t.sigma1;
    const double lo2 = t.mu2 - 8 * t.sigma2, hi2 = t.mu2 + 8 * t.sigma2;
    const double h1 = (hi1 - lo1) / steps, h2 = (hi2 - lo2) / steps;
    double sum = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double v1 = lo1 + (i + 0.5) * h1;
        for (int j = 0; j < steps; ++j) {
            const double v2 = lo2 + (j + 0.5) * h2;
            sum += bvn(v1, v2, x.x1, x.x2, b1, b2, 0.0) * bvn(v1, v2, t.mu1, t.mu2, t.sigma1, t.sigma2, t.rho);
        }
    }
    return sum * h1 * h2;
}

double kernel_term(const LocalGaussParams& t, Point x, const PairedSamples& d, double b1, double b2) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s += bvn(d.x[i], d.y[i], x.x1, x.x2, b1, b2, 0.0) *
             std::log(bvn(d.x[i], d.y[i], t.mu1, t.mu2, t.sigma1, t.sigma2, t.rho));
    }
    return s / static_cast<double>(d.size());
}


}  // namespace

TEST_CASE("rank normalization") {
    auto r = rank_normalize(std::vector<double>{1, 2, 3});
    CHECK(r[0] == doctest::Approx(-0.9674216).epsilon(1e-6));
    CHECK(r[1] == doctest::Approx(0.0));
    CHECK(r[2] == doctest::Approx(0.9674216).epsilon(1e-6));
    auto tie = rank_normalize(std::vector<double>{5, 5});
    CHECK(tie[0] == doctest::Approx(0.0));
    CHECK(tie[1] == doctest::Approx(0.0));

    std::vector<double> x{0.3, -1.0, std::nan(""), 2.5, 0.0, 0.3};
    std::vector<double> fx;
    for (double v : x) fx.push_back(std::exp(3 * v) + 7);
    auto a = rank_normalize(x), b = rank_normalize(fx);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i])) CHECK(std::isnan(b[i]));
        else CHECK(a[i] == b[i]);
    }
    CHECK(std::isnan(a[2]));
    CHECK_THROWS_AS(rank_normalize(std::vector<double>{1.0, std::nan("")}), Error);
}

TEST_CASE("plug-in bandwidth and kernel peak") {
    CHECK(plugin_bandwidth(1, 1.0) == doctest::Approx(1.75));
    CHECK(plugin_bandwidth(64, 2.0) == doctest::Approx(1.75));
    CHECK(plugin_bandwidth(729, 1.0) == doctest::Approx(0.583333).epsilon(1e-6));
    CHECK(kernel_peak(Bandwidth(0.5, 2.0)) == doctest::Approx(1.0 / (2 * kPi)));
    CHECK_THROWS_AS(Bandwidth(0.0, 1.0), Error);
    CHECK_THROWS_AS(Bandwidth(1.0, std::nan("")), Error);
}

TEST_CASE("penalty term of the local likelihood") {
    SUBCASE("standard normal theta, unit bandwidth, origin: 1/(4 pi)") {
        LocalGaussParams t;
        PairedSamples d{{0.3, -0.2, 1.1}, {0.1, 0.4, -0.7}};
        const double ll = local_loglik(t, {0, 0}, d, Bandwidth(1.0));
        CHECK(kernel_term(t, {0, 0}, d, 1, 1) - ll == doctest::Approx(1.0 / (4 * kPi)).epsilon(1e-12));
    }
    SUBCASE("general theta matches numerical convolution") {
        LocalGaussParams t;
        t.mu1 = 0.4;
        t.mu2 = -0.3;
        t.sigma1 = 0.8;
        t.sigma2 = 1.3;
        t.rho = 0.6;
        PairedSamples d{{0.0}, {0.0}};
        const Point x{-1.0, 0.5};
        const double pen = kernel_term(t, x, d, 0.5, 0.7) - local_loglik(t, x, d, Bandwidth(0.5, 0.7));
        CHECK(pen == doctest::Approx(penalty_by_quadrature(t, x, 0.5, 0.7)).epsilon(1e-7));
    }
}

TEST_CASE("single observation at the point gives a finite objective") {
    PairedSamples d{{0.5}, {0.5}};
    LocalGaussParams t;
    t.mu1 = t.mu2 = 0.5;
    t.sigma1 = t.sigma2 = 0.3;
    CHECK(std::isfinite(local_loglik(t, {0.5, 0.5}, d, Bandwidth(0.4))));
}

TEST_CASE("moment form of the objective equals direct summation") {
    auto d = gen_bivariate_gaussian(0.4, 700, 3);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (Point x : {Point{0, 0}, Point{-1.28, -1.28}, Point{1.0, -0.5}}) {
        LocalLikelihood fast(d, x, Bandwidth(0.45, 0.5));
        for (int k = 0; k < 20; ++k) {
            LocalGaussParams t;
            t.mu1 = u(rng);
            t.mu2 = u(rng);
            t.sigma1 = std::exp(u(rng));
            t.sigma2 = std::exp(u(rng));
            t.rho = u(rng);
            const double direct = local_loglik(t, x, d, Bandwidth(0.45, 0.5));
            CHECK(fast(t) == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("local fit on Gaussian data") {
    SUBCASE("independence: seed average at the origin is near zero") {
        double sum = 0.0;
        for (std::uint64_t s = 1; s <= 20; ++s) {
            auto d = gen_bivariate_gaussian(0.0, 5000, s);
            auto f = estimate_local_gauss(d, {0, 0}, Bandwidth(plugin_bandwidth(5000, 1.0)));
            REQUIRE(f.valid());
            sum += f.rho;
        }
        CHECK(std::abs(sum / 20) <= 0.05);
    }
    SUBCASE("rho 0.5 at diagonal points inside +-1.64, averaged over seeds") {
        const Bandwidth bw(plugin_bandwidth(5000, 1.0));
        for (double q : {-1.64, -1.0, 0.0, 1.0, 1.64}) {
            double sum = 0.0;
            for (std::uint64_t s = 1; s <= 10; ++s) {
                auto d = gen_bivariate_gaussian(0.5, 5000, 40 + s);
                auto f = estimate_local_gauss(d, {q, q}, bw);
                REQUIRE(f.valid());
                CHECK(f.sigma1 > 0);
                CHECK(f.effective_n > 5);
                sum += f.rho;
            }
            CAPTURE(q);
            CHECK(sum / 10 >= 0.40);
            CHECK(sum / 10 <= 0.60);
        }
    }
    SUBCASE("gradient vanishes at the optimum") {
        auto d = gen_bivariate_gaussian(0.3, 3000, 8);
        const Bandwidth bw(plugin_bandwidth(3000, 1.0));
        for (Point x : {Point{0, 0}, Point{-1.28, -1.28}, Point{1.64, 1.64}}) {
            auto f = estimate_local_gauss(d, x, bw);
            REQUIRE(f.valid());
            Objective obj = [&](std::span<const double> z) {
                LocalGaussParams t;
                t.mu1 = z[0];
                t.mu2 = z[1];
                t.sigma1 = std::exp(z[2]);
                t.sigma2 = std::exp(z[3]);
                t.rho = std::tanh(z[4]);
                return local_loglik(t, x, d, bw);
            };
            std::vector<double> z{f.mu1, f.mu2, std::log(f.sigma1), std::log(f.sigma2), std::atanh(f.rho)};
            auto g = fd_gradient(obj, z, 1e-6);
            double norm = 0.0;
            for (double v : g) norm += v * v;
            CHECK(std::sqrt(norm) <= 1e-4);
        }
    }
    SUBCASE("too few observations") {
        auto d = gen_bivariate_gaussian(0.3, 49, 1);
        CHECK_THROWS_AS(estimate_local_gauss(d, {0, 0}, Bandwidth(0.5)), Error);
    }
    SUBCASE("no kernel mass near the point is flagged") {
        auto d = gen_bivariate_gaussian(0.3, 200, 1);
        auto f = estimate_local_gauss(d, {6, 6}, Bandwidth(0.3));
        CHECK(f.status == FitStatus::low_effective_n);
        CHECK_FALSE(f.valid());
    }
}

TEST_CASE("parabola: local correlation changes sign across the vertex") {
    auto d = gen_parabola(10000, 0.1, 4);
    const Bandwidth bw(plugin_bandwidth(10000, 1.0));
    auto left = estimate_local_gauss(d, {-1, 1}, bw);
    auto right = estimate_local_gauss(d, {1, 1}, bw);
    REQUIRE(left.valid());
    REQUIRE(right.valid());
    CHECK(left.rho < 0);
    CHECK(right.rho > 0);
}

TEST_CASE("diagonal LGC") {
    CHECK(TailSpec::negative_default().grid().size() == 16);
    auto g = TailSpec::negative_default().grid();
    CHECK(g.front() == doctest::Approx(0.05));
    CHECK(g[1] == doctest::Approx(0.06));
    CHECK(g.back() == doctest::Approx(0.20));
    CHECK(TailSpec::positive_default().grid().size() == 16);
    CHECK_THROWS_AS((TailSpec{TailSide::negative, 0.2, 0.1, 0.01}.validate()), Error);
    CHECK_THROWS_AS((TailSpec{TailSide::negative, 0.05, 0.2, 0.0}.validate()), Error);

    SUBCASE("identical series are degenerate everywhere") {
        auto d = gen_bivariate_gaussian(0.0, 500, 2);
        for (const auto& p : diagonal_lgc(d.x, d.x, TailSpec::negative_default())) CHECK_FALSE(p.valid);
    }
    SUBCASE("rho 0.8 stays inside [0.70, 0.90] on both grids") {
        auto d = gen_bivariate_gaussian(0.8, 5000, 12);
        for (auto tail : {TailSpec::negative_default(), TailSpec::positive_default()}) {
            for (const auto& p : diagonal_lgc(d.x, d.y, tail)) {
                CAPTURE(p.quantile);
                REQUIRE(p.valid);
                CHECK(p.rho >= 0.70);
                CHECK(p.rho <= 0.90);
            }
        }
    }
    SUBCASE("exchange symmetry") {
        auto d = gen_clayton_pair(1.5, 800, 6);
        auto ab = diagonal_lgc(d.x, d.y, TailSpec::negative_default());
        auto ba = diagonal_lgc(d.y, d.x, TailSpec::negative_default());
        for (std::size_t k = 0; k < ab.size(); ++k) {
            REQUIRE(ab[k].valid == ba[k].valid);
            if (ab[k].valid) CHECK(std::abs(ab[k].rho - ba[k].rho) < 1e-4);
        }
    }
    SUBCASE("insufficient overlap") {
        std::vector<double> a(150, std::nan("")), b(150);
        for (std::size_t t = 0; t < 150; ++t) {
            b[t] = std::sin(static_cast<double>(t));
            if (t % 2) a[t] = std::cos(static_cast<double>(t));
        }
        CHECK_THROWS_AS(diagonal_lgc(a, b, TailSpec::negative_default()), Error);
    }
}

TEST_CASE("tail mean weight") {
    std::vector<DiagPoint> same(16, DiagPoint{0.1, 0.37, true});
    CHECK(tail_mean_weight(same).value == doctest::Approx(0.37));
    std::vector<DiagPoint> three{{0.1, 0.1, true}, {0.2, 0.2, true}, {0.3, 0.3, true}};
    auto w = tail_mean_weight(three);
    CHECK(w.valid);
    CHECK(w.value == doctest::Approx(0.2));
    std::vector<DiagPoint> sparse(16, DiagPoint{0.1, 0.5, false});
    for (int k = 0; k < 7; ++k) sparse[k].valid = true;
    CHECK_FALSE(tail_mean_weight(sparse).valid);
    for (int k = 0; k < 8; ++k) sparse[k].valid = true;
    CHECK(tail_mean_weight(sparse).valid);
}

TEST_CASE("Pearson") {
    auto d = gen_bivariate_gaussian(0.0, 5000, 77);
    std::vector<double> neg;
    for (double v : d.x) neg.push_back(-v);
    CHECK(*pearson_pair(d.x, d.x) == doctest::Approx(1.0));
    CHECK(*pearson_pair(d.x, neg) == doctest::Approx(-1.0));
    CHECK(std::abs(*pearson_pair(d.x, d.y)) <= 0.05);
    std::vector<double> flat(d.x.size(), 0.01);
    CHECK_FALSE(pearson_pair(d.x, flat).has_value());
    CHECK_FALSE(pearson_pair(std::span(d.x).first(99), std::span(d.y).first(99)).has_value());

    SUBCASE("matches a textbook two-pass formula with missing values") {
        auto e = gen_bivariate_gaussian(0.6, 400, 5);
        for (std::size_t t = 0; t < 400; t += 7) e.x[t] = std::nan("");
        for (std::size_t t = 3; t < 400; t += 11) e.y[t] = std::nan("");
        double mx = 0, my = 0;
        int n = 0;
        for (std::size_t t = 0; t < 400; ++t) {
            if (std::isnan(e.x[t]) || std::isnan(e.y[t])) continue;
            mx += e.x[t];
            my += e.y[t];
            ++n;
        }
        mx /= n;
        my /= n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t t = 0; t < 400; ++t) {
            if (std::isnan(e.x[t]) || std::isnan(e.y[t])) continue;
            sxy += (e.x[t] - mx) * (e.y[t] - my);
            sxx += (e.x[t] - mx) * (e.x[t] - mx);
            syy += (e.y[t] - my) * (e.y[t] - my);
        }
        CHECK(*pearson_pair(e.x, e.y) == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-12));
    }
}

TEST_CASE("weight matrices") {
    SUBCASE("independent stocks give weights near zero; symmetric; unit diagonal") {
        auto panel = gen_gaussian_panel(3, 5000, 0.0, 21);
        LgcConfig cfg;
        auto w = lgc_weight_matrix(panel, cfg);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(w.at(i, i) == 1.0);
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(w.is_valid(i, j));
                if (i != j) CHECK(std::abs(w.at(i, j)) < 0.25);
                CHECK(w.at(i, j) == w.at(j, i));
            }
        }
        auto p = pearson_matrix(panel);
        CHECK(p.at(0, 1) == p.at(1, 0));
        CHECK(std::abs(p.at(0, 1)) <= 0.05);
    }
    SUBCASE("independent pairs: tail mean weight averages to zero over seeds") {
        for (auto tail : {TailSpec::negative_default(), TailSpec::positive_default()}) {
            double sum = 0.0;
            for (std::uint64_t s = 1; s <= 64; ++s) {
                auto d = gen_bivariate_gaussian(0.0, 5000, 500 + s);
                auto tw = tail_mean_weight(diagonal_lgc(d.x, d.y, tail));
                REQUIRE(tw.valid);
                sum += tw.value;
            }
            CHECK(std::abs(sum / 64) <= 0.05);
        }
    }
    SUBCASE("Clayton pair: lower tail outweighs upper tail") {
        auto d = gen_clayton_pair(2.0, 5000, 13);
        ReturnsPanel panel;
        panel.tickers = {"A", "B"};
        panel.dates = weekday_calendar(20100104, 5000);
        panel.returns = d.x;
        panel.returns.insert(panel.returns.end(), d.y.begin(), d.y.end());
        LgcConfig neg, pos;
        pos.tail = TailSpec::positive_default();
        CHECK(lgc_weight_matrix(panel, neg).at(0, 1) > lgc_weight_matrix(panel, pos).at(0, 1));
    }
    SUBCASE("monotone marginal transforms leave LGC weights unchanged") {
        auto panel = gen_gaussian_panel(3, 300, 0.4, 2);
        auto tr = panel;
        for (std::size_t t = 0; t < tr.n_days(); ++t) tr.returns[t] = std::exp(50 * tr.returns[t]);
        for (std::size_t t = 0; t < tr.n_days(); ++t) tr.returns[2 * tr.n_days() + t] = std::pow(tr.returns[2 * tr.n_days() + t] + 1, 3);
        LgcConfig cfg;
        auto a = lgc_weight_matrix(panel, cfg), b = lgc_weight_matrix(tr, cfg);
        CHECK(a.weights == b.weights);
    }
    SUBCASE("worker count does not change results") {
        auto panel = gen_factor_market([] {
            ScenarioSpec s;
            s.n_stocks = 8;
            s.n_days = 250;
            s.seed = 4;
            return s;
        }());
        LgcConfig one, many;
        many.workers = 4;
        auto a = lgc_weight_matrix(panel, one), b = lgc_weight_matrix(panel, many);
        CHECK(a.valid == b.valid);
        for (std::size_t k = 0; k < a.weights.size(); ++k) {
            if (std::isnan(a.weights[k])) CHECK(std::isnan(b.weights[k]));
            else CHECK(a.weights[k] == b.weights[k]);
        }
    }
    SUBCASE("too many invalid pairs is an error") {
        auto panel = gen_gaussian_panel(4, 90, 0.3, 1);  // below the 100-day overlap
        CHECK_THROWS_AS(lgc_weight_matrix(panel, LgcConfig{}), Error);
        auto p = pearson_matrix(panel);
        CHECK(p.invalid_pairs() == p.total_pairs());
        CHECK(std::isnan(p.at(0, 1)));
    }
}

// Single pairs can move by 0.2 at 0.8x (about 100 effective observations at
// the 5% point); the average over pairs is what stays put.
TEST_CASE("tail weights move little on average under 0.8x and 1.2x bandwidth") {
    auto panel = gen_gaussian_panel(8, 1000, 0.5, 31);
    for (auto tail : {TailSpec::negative_default(), TailSpec::positive_default()}) {
        LgcConfig base;
        base.tail = tail;
        auto w1 = lgc_weight_matrix(panel, base);
        for (double m : {0.8, 1.2}) {
            LgcConfig c = base;
            c.diagonal.bandwidth_multiplier = m;
            auto wm = lgc_weight_matrix(panel, c);
            double sum = 0;
            int k = 0;
            for (std::size_t i = 0; i < 8; ++i)
                for (std::size_t j = i + 1; j < 8; ++j)
                    if (w1.is_valid(i, j) && wm.is_valid(i, j)) {
                        sum += std::abs(w1.at(i, j) - wm.at(i, j));
                        ++k;
                    }
            CAPTURE(m);
            REQUIRE(k == 28);
            CHECK(sum / k <= 0.05);
        }
    }
}

TEST_CASE("Gaussian consistency: error shrinks with sample size") {
    auto mae = [](std::size_t n) {
        double sum = 0.0;
        int cnt = 0;
        for (std::uint64_t s = 1; s <= 4; ++s) {
            auto d = gen_bivariate_gaussian(0.5, n, 100 + s);
            for (auto tail : {TailSpec::negative_default(), TailSpec::positive_default()}) {
                for (const auto& p : diagonal_lgc(d.x, d.y, tail)) {
                    if (!p.valid) continue;
                    sum += std::abs(p.rho - 0.5);
                    ++cnt;
                }
            }
        }
        return sum / cnt;
    };
    const double e500 = mae(500), e2000 = mae(2000), e8000 = mae(8000);
    MESSAGE("MAE n=500 " << e500 << ", n=2000 " << e2000 << ", n=8000 " << e8000);
    CHECK(e2000 < e500);
    CHECK(e8000 < e2000);
}
