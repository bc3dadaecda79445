#include "stoqlab/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stoqlab {

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  return (x < a + 1.0) ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

double chi2_sf(double x, int dof) { return gamma_q(0.5 * dof, 0.5 * x); }

double chi2_quantile(double p, int dof) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("chi2_quantile: p in (0,1) required");
  double lo = 0.0, hi = 1.0;
  while (1.0 - chi2_sf(hi, dof) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - chi2_sf(mid, dof) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Chi2Report chi2_poisson_test(const std::vector<std::int64_t>& histogram, double lambda,
                             std::int64_t n_draws, double alpha) {
  // expected counts per bin, last bin is the open tail
  std::vector<double> expected;
  std::vector<double> observed;
  double pmf = std::exp(-lambda);
  double cum = 0.0;
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    if (k > 0) pmf *= lambda / static_cast<double>(k);
    expected.push_back(pmf * static_cast<double>(n_draws));
    observed.push_back(static_cast<double>(histogram[k]));
    cum += pmf;
  }
  expected.push_back((1.0 - cum) * static_cast<double>(n_draws));
  observed.push_back(0.0);

  // pool small expected counts from the right
  while (expected.size() > 2 && expected.back() < 5.0) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }

  Chi2Report report;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (expected[k] <= 0.0) continue;
    const double d = observed[k] - expected[k];
    report.statistic += d * d / expected[k];
  }
  report.dof = static_cast<int>(expected.size()) - 1;
  if (report.dof < 1) report.dof = 1;
  report.critical = chi2_quantile(1.0 - alpha, report.dof);
  report.pass = report.statistic < report.critical;
  return report;
}

}  // namespace stoqlab
