#pragma once

namespace lgcnet {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile function. Accurate to ~1e-15 relative on (0, 1);
/// returns -inf / +inf at 0 / 1.
double norm_quantile(double p);

/// Standard normal density.
double norm_pdf(double x);

}  // namespace lgcnet
