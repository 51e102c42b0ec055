#pragma once

#include <functional>
#include <span>
#include <vector>

namespace lgcnet {

struct BfgsOptions {
    int max_iter = 200;
    double step_tol = 1e-6;     // converged when ||x_{k+1} - x_k||_2 < step_tol
    double fd_step = 1e-6;      // central-difference step for gradients
    bool hessian_start = true;  // seed the inverse Hessian from a finite-difference Hessian
};

struct BfgsResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes f with BFGS using central finite-difference gradients and an
/// Armijo backtracking line search. f may return +inf (or NaN) to mark
/// infeasible points; the line search backs off from them.
BfgsResult bfgs_minimize(const Objective& f, std::vector<double> x0,
                         const BfgsOptions& opt = {});

/// Central finite-difference gradient.
std::vector<double> fd_gradient(const Objective& f, std::span<const double> x, double h);

/// Central finite-difference Hessian (row-major, dim x dim).
std::vector<double> fd_hessian(const Objective& f, std::span<const double> x, double h);

}  // namespace lgcnet
