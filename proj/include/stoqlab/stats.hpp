#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace stoqlab {

// Monte Carlo estimate; stderr is the standard error of the mean and seed is
// recorded so every stochastic figure in an output file can be reproduced.
struct Estimate {
  std::complex<double> value{0.0, 0.0};
  double stderr_ = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Regularized incomplete gamma functions (series + continued fraction).
double gamma_p(double a, double x);  // P(a,x), lower
double gamma_q(double a, double x);  // Q(a,x), upper

// Survival function and upper quantile of the chi-square distribution.
double chi2_sf(double x, int dof);
double chi2_quantile(double p, int dof);  // smallest x with CDF(x) >= p

// Pearson chi-square goodness-of-fit test of observed counts against Poisson
// pmf with the given mean. Bins with expected count < 5 are pooled from the
// right. Returns true when the statistic stays below the (1 - alpha) quantile.
struct Chi2Report {
  double statistic = 0.0;
  int dof = 0;
  double critical = 0.0;
  bool pass = false;
};
Chi2Report chi2_poisson_test(const std::vector<std::int64_t>& histogram, double lambda,
                             std::int64_t n_draws, double alpha = 0.01);

}  // namespace stoqlab
