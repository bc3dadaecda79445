#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stoqlab/rng.hpp"
#include "stoqlab/stats.hpp"

namespace stoqlab::pointproc {

struct Mark {
  double t = 0.0;
  int label = 0;
};

// finite counting measure on [0,1] with integer labels, sorted by time
struct MarkedPointSet {
  std::vector<Mark> marks;

  std::size_t count() const { return marks.size(); }
  void sort();
};

// per label: count ~ Poisson(lambda), times i.i.d. uniform; merged sorted
MarkedPointSet sample_poisson(double lambda, const std::vector<int>& labels, RngStream& rng);

using SetFunction = std::function<double(const MarkedPointSet&)>;

struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
};
// f(empty) e^{-lambda} + e^{-lambda} sum_{n=1}^{max_n} lambda^n/n! int f dt^n
// by tensor Gauss-Legendre quadrature; tail <= sup|f| sum_{n > max_n} lambda^n/n!
SeriesValue poisson_integral_series(const SetFunction& f, double f_sup, double lambda, int max_n,
                                    int quad_nodes = 32);

MarkedPointSet superpose(const MarkedPointSet& a, const MarkedPointSet& b);

struct SuperpositionReport {
  Chi2Report merged_counts;  // merged counts against Poisson(l1 + l2)
  double additivity_sigmas = 0.0;  // |mean - (l1+l2)| in units of stderr
  double decomposition_residual_sigmas = 0.0;  // the double-integration identity
  bool pass = false;
};
SuperpositionReport superposition_test(double lambda1, double lambda2, std::int64_t n_draws,
                                       std::uint64_t seed);

// marks at j/n, each present independently with probability r/n
MarkedPointSet bernoulli_process(int n, double r, RngStream& rng);
// exact finite sum over supports; n <= 20
double bernoulli_integral_exact(const SetFunction& f, int n, double r);
// closed forms for product observables f(nu) = prod_marks g(t): exact for
// both processes at any n, used by the convergence check
double bernoulli_integral_product(const std::function<double(double)>& g, int n, double r);
double poisson_integral_product(const std::function<double(double)>& g, double r,
                                int quad_nodes = 64);

}  // namespace stoqlab::pointproc
