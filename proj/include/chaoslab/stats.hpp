#pragma once

#include <vector>

namespace chaoslab {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_half_95 = 0.0; ///< 95% half-width (Student-t on n-2 dof)
  double r2 = 0.0;
  int n = 0;
};

/// Ordinary least squares y = a + b x.
OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);

/// OLS on (log x, log y); requires positive inputs.
OlsFit ols_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided 97.5% Student-t quantile (95% CI half-width multiplier).
double student_t_975(int dof);

struct WilsonInterval {
  double phat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion (default z for 95%).
WilsonInterval wilson_interval(int successes, int trials, double z = 1.959963984540054);

struct MannKendall {
  long long s = 0;
  double var_s = 0.0;
  double z = 0.0; ///< continuity-corrected standard score
};

/// Mann-Kendall trend statistic with tie-adjusted variance. z < -1.645
/// rejects "no trend" in favour of decreasing at one-sided 95%; z > +1.645
/// in favour of increasing.
MannKendall mann_kendall(const std::vector<double>& v);

/// Trapezoid rule over a (time, value) series.
double trapezoid(const std::vector<double>& t, const std::vector<double>& y);

/// Mean and standard error of the mean.
struct MeanStderr {
  double mean = 0.0;
  double stderr_mean = 0.0;
  int n = 0;
};
MeanStderr mean_stderr(const std::vector<double>& v);

} // namespace chaoslab
