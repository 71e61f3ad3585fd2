#pragma once

namespace rdlocal {

// Standard normal CDF, accurate over the full double range.
double normal_cdf(double x);

// Inverse standard normal CDF (Wichura's PPND16, ~1e-15 relative).
// Throws parameter_error outside (0, 1).
double normal_quantile(double prob);

}  // namespace rdlocal
