#include "chaoslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chaoslab/errors.hpp"

namespace chaoslab {

OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("ols_fit", "need at least two matching (x, y) points");
  const int n = static_cast<int>(x.size());
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += x[static_cast<std::size_t>(i)];
    sy += y[static_cast<std::size_t>(i)];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    const double dy = y[static_cast<std::size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw ValidationError("ols_fit", "degenerate x values");
  OlsFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[static_cast<std::size_t>(i)] - f.intercept -
                     f.slope * x[static_cast<std::size_t>(i)];
    sse += r * r;
  }
  if (n > 2) {
    f.stderr_slope = std::sqrt(sse / (n - 2) / sxx);
    f.ci_half_95 = student_t_975(n - 2) * f.stderr_slope;
  }
  f.r2 = (syy > 0.0) ? 1.0 - sse / syy : 1.0;
  return f;
}

OlsFit ols_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ValidationError("ols_loglog", "log-log fit requires positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return ols_fit(lx, ly);
}

double student_t_975(int dof) {
  static const double table[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) throw ValidationError("student_t_975", "dof must be >= 1");
  if (dof <= 30) return table[dof - 1];
  if (dof <= 60) return 2.000;
  if (dof <= 120) return 1.980;
  return 1.960;
}

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw ValidationError("wilson_interval", "need 0 <= successes <= trials, trials > 0");
  WilsonInterval w;
  const double n = trials;
  const double p = static_cast<double>(successes) / n;
  w.phat = p;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  w.lo = std::max(0.0, (center - spread) / denom);
  w.hi = std::min(1.0, (center + spread) / denom);
  return w;
}

MannKendall mann_kendall(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  if (n < 3) throw ValidationError("mann_kendall", "need at least 3 points");
  MannKendall mk;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = v[static_cast<std::size_t>(j)] - v[static_cast<std::size_t>(i)];
      if (d > 0.0) ++mk.s;
      else if (d < 0.0) --mk.s;
    }
  }
  // tie-adjusted variance
  std::map<double, long long> ties;
  for (double x : v) ++ties[x];
  double var = static_cast<double>(n) * (n - 1) * (2 * n + 5);
  for (const auto& [val, t] : ties) {
    (void)val;
    if (t > 1) var -= static_cast<double>(t) * (t - 1) * (2 * t + 5);
  }
  var /= 18.0;
  mk.var_s = var;
  if (var <= 0.0) {
    mk.z = 0.0;
  } else if (mk.s > 0) {
    mk.z = (static_cast<double>(mk.s) - 1.0) / std::sqrt(var);
  } else if (mk.s < 0) {
    mk.z = (static_cast<double>(mk.s) + 1.0) / std::sqrt(var);
  } else {
    mk.z = 0.0;
  }
  return mk;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2)
    throw ValidationError("trapezoid", "need matching series with >= 2 points");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    acc += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
  return acc;
}

MeanStderr mean_stderr(const std::vector<double>& v) {
  if (v.empty()) throw ValidationError("mean_stderr", "empty sample");
  MeanStderr m;
  m.n = static_cast<int>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / m.n;
  if (m.n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_mean = std::sqrt(ss / (m.n - 1) / m.n);
  }
  return m;
}

} // namespace chaoslab
