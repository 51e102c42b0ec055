#include "lgcnet/optim.hpp"

#include <cmath>
#include <limits>

namespace lgcnet {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double eval(const Objective& f, std::span<const double> x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// Inverts a symmetric positive definite matrix via Cholesky; false if not SPD.
bool spd_inverse(std::vector<double> a, std::size_t n, std::vector<double>& inv) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    inv.assign(n * n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> z(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = (i == col) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * z[k];
            z[i] = s / a[i * n + i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = z[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * inv[k * n + col];
            inv[ii * n + col] = s / a[ii * n + ii];
        }
    }
    return true;
}

void identity_scaled(std::vector<double>& h, std::size_t n, double scale) {
    h.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
}

}  // namespace

std::vector<double> fd_gradient(const Objective& f, std::span<const double> x, double h) {
    std::vector<double> g(x.size());
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = xp[i];
        xp[i] = xi + h;
        const double fp = f(xp);
        xp[i] = xi - h;
        const double fm = f(xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

std::vector<double> fd_hessian(const Objective& f, std::span<const double> x, double h) {
    const std::size_t n = x.size();
    std::vector<double> hess(n * n);
    std::vector<double> xp(x.begin(), x.end());
    const double f0 = f(xp);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double v;
            if (i == j) {
                const double xi = xp[i];
                xp[i] = xi + h;
                const double fp = f(xp);
                xp[i] = xi - h;
                const double fm = f(xp);
                xp[i] = xi;
                v = (fp - 2.0 * f0 + fm) / (h * h);
            } else {
                const double xi = xp[i], xj = xp[j];
                xp[i] = xi + h; xp[j] = xj + h;
                const double fpp = f(xp);
                xp[j] = xj - h;
                const double fpm = f(xp);
                xp[i] = xi - h;
                const double fmm = f(xp);
                xp[j] = xj + h;
                const double fmp = f(xp);
                xp[i] = xi; xp[j] = xj;
                v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            }
            hess[i * n + j] = v;
            hess[j * n + i] = v;
        }
    }
    return hess;
}

BfgsResult bfgs_minimize(const Objective& f, std::vector<double> x0, const BfgsOptions& opt) {
    const std::size_t n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    res.value = eval(f, res.x);
    if (!std::isfinite(res.value)) return res;

    std::vector<double> g = fd_gradient(f, res.x, opt.fd_step);
    std::vector<double> hinv;
    const double fallback_scale = 1.0 / std::max(1.0, norm2(g));
    if (!(opt.hessian_start && spd_inverse(fd_hessian(f, res.x, 1e-4), n, hinv))) {
        identity_scaled(hinv, n, fallback_scale);
    }

    std::vector<double> p(n), xn(n), s(n), y(n), hy(n);
    for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) v -= hinv[i * n + j] * g[j];
            p[i] = v;
        }
        double slope = dot(g, p);
        if (!(slope < 0.0)) {
            identity_scaled(hinv, n, 1.0 / std::max(1.0, norm2(g)));
            for (std::size_t i = 0; i < n; ++i) p[i] = -hinv[i * n + i] * g[i];
            slope = dot(g, p);
            if (!(slope < 0.0)) {
                res.converged = norm2(g) == 0.0;
                return res;
            }
        }

        double t = 1.0;
        double fn = 0.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + t * p[i];
            fn = eval(f, xn);
            if (fn <= res.value + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.converged = norm2(p) < opt.step_tol;
            return res;
        }

        for (std::size_t i = 0; i < n; ++i) s[i] = xn[i] - res.x[i];
        std::vector<double> gn = fd_gradient(f, xn, opt.fd_step);
        for (std::size_t i = 0; i < n; ++i) y[i] = gn[i] - g[i];
        res.x = xn;
        res.value = fn;
        g = std::move(gn);

        if (norm2(s) < opt.step_tol) {
            res.converged = true;
            ++res.iterations;
            return res;
        }

        const double sy = dot(s, y);
        if (sy > 1e-14 * norm2(s) * norm2(y)) {
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < n; ++j) v += hinv[i * n + j] * y[j];
                hy[i] = v;
            }
            const double yhy = dot(y, hy);
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    hinv[i * n + j] += (1.0 + yhy * rho) * rho * s[i] * s[j] -
                                       rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
    }
    return res;
}

}  // namespace lgcnet
