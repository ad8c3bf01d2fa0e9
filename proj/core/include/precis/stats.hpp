#pragma once

namespace precis {

// Inverse standard-normal CDF, Wichura's AS241 rational approximation
// (absolute error well below 1e-8 across (0,1)). Deterministic across platforms.
double normal_quantile(double p);

double normal_cdf(double x);

// z_{1 - alpha/2} for two-sided intervals at level alpha.
double two_sided_z(double alpha);

}  // namespace precis
