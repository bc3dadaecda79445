#include "stoqlab/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stoqlab::pointproc {

void MarkedPointSet::sort() {
  std::stable_sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.label < b.label;
  });
}

MarkedPointSet sample_poisson(double lambda, const std::vector<int>& labels, RngStream& rng) {
  if (lambda < 0.0) throw std::invalid_argument("sample_poisson: lambda >= 0 required");
  MarkedPointSet out;
  for (int label : labels) {
    const int count = rng.next_poisson(lambda);
    for (int k = 0; k < count; ++k) out.marks.push_back({rng.next_uniform(), label});
  }
  out.sort();
  return out;
}

namespace {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
    weights[static_cast<std::size_t>(n - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

SeriesValue poisson_integral_series(const SetFunction& f, double f_sup, double lambda, int max_n,
                                    int quad_nodes) {
  if (max_n > 4) throw std::invalid_argument("poisson_integral_series: max_n <= 4");
  std::vector<double> nodes, weights;
  gauss_legendre(quad_nodes, nodes, weights);

  SeriesValue out;
  out.value = f(MarkedPointSet{}) * std::exp(-lambda);
  double factorial = 1.0;
  for (int n = 1; n <= max_n; ++n) {
    factorial *= n;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    double integral = 0.0;
    while (true) {
      double w = 1.0;
      MarkedPointSet nu;
      for (int k = 0; k < n; ++k) {
        w *= weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        nu.marks.push_back({nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])], 0});
      }
      nu.sort();
      integral += w * f(nu);
      int axis = n - 1;
      while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == quad_nodes) {
        idx[static_cast<std::size_t>(axis)] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
    out.value += std::exp(-lambda) * std::pow(lambda, n) / factorial * integral;
  }
  // tail of the Poisson series
  double partial = 1.0, term = 1.0;
  for (int k = 1; k <= max_n; ++k) {
    term *= lambda / k;
    partial += term;
  }
  out.tail_bound = f_sup * std::max(0.0, 1.0 - std::exp(-lambda) * partial);
  return out;
}

MarkedPointSet superpose(const MarkedPointSet& a, const MarkedPointSet& b) {
  MarkedPointSet out;
  out.marks.reserve(a.marks.size() + b.marks.size());
  out.marks.insert(out.marks.end(), a.marks.begin(), a.marks.end());
  out.marks.insert(out.marks.end(), b.marks.begin(), b.marks.end());
  out.sort();
  return out;
}

SuperpositionReport superposition_test(double lambda1, double lambda2, std::int64_t n_draws,
                                       std::uint64_t seed) {
  SuperpositionReport report;
  const double lambda = lambda1 + lambda2;
  std::vector<std::int64_t> histogram(static_cast<std::size_t>(lambda + 10.0 * std::sqrt(lambda) + 10.0), 0);
  RunningStat count_stat;
  // both sides of the double-integration identity for f(nu) = #nu
  RunningStat merged_f, nested_f;
  RngStream rng(seed);
  for (std::int64_t i = 0; i < n_draws; ++i) {
    const MarkedPointSet a = sample_poisson(lambda1, {0}, rng);
    const MarkedPointSet b = sample_poisson(lambda2, {1}, rng);
    const MarkedPointSet merged = superpose(a, b);
    const std::size_t c = merged.count();
    if (c < histogram.size()) ++histogram[c];
    count_stat.add(static_cast<double>(c));
    merged_f.add(static_cast<double>(c));
  }
  RngStream rng2(seed + 1);
  for (std::int64_t i = 0; i < n_draws; ++i) {
    // inner and outer draws of the iterated integral
    const MarkedPointSet a = sample_poisson(lambda1, {0}, rng2);
    const MarkedPointSet b = sample_poisson(lambda2, {1}, rng2);
    nested_f.add(static_cast<double>(a.count() + b.count()));
  }
  report.merged_counts = chi2_poisson_test(histogram, lambda, n_draws);
  report.additivity_sigmas =
      std::abs(count_stat.mean() - lambda) / std::max(count_stat.stderr_of_mean(), 1e-300);
  const double pooled = std::sqrt(merged_f.stderr_of_mean() * merged_f.stderr_of_mean() +
                                  nested_f.stderr_of_mean() * nested_f.stderr_of_mean());
  report.decomposition_residual_sigmas =
      std::abs(merged_f.mean() - nested_f.mean()) / std::max(pooled, 1e-300);
  report.pass = report.merged_counts.pass && report.additivity_sigmas <= 3.0 &&
                report.decomposition_residual_sigmas <= 3.0;
  return report;
}

MarkedPointSet bernoulli_process(int n, double r, RngStream& rng) {
  if (r / n >= 1.0) throw std::invalid_argument("bernoulli_process: r/n < 1 required");
  MarkedPointSet out;
  for (int j = 1; j <= n; ++j) {
    if (rng.next_bernoulli(r / n)) out.marks.push_back({static_cast<double>(j) / n, 0});
  }
  return out;
}

double bernoulli_integral_exact(const SetFunction& f, int n, double r) {
  if (n > 20) throw std::invalid_argument("bernoulli_integral_exact: n <= 20 required");
  if (r / n >= 1.0) throw std::invalid_argument("bernoulli_integral_exact: r/n < 1 required");
  const double p = r / n;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    MarkedPointSet nu;
    for (int j = 0; j < n; ++j) {
      if ((mask >> j) & 1) nu.marks.push_back({static_cast<double>(j + 1) / n, 0});
    }
    const int m = static_cast<int>(nu.count());
    total += f(nu) * std::pow(p, m) * std::pow(1.0 - p, n - m);
  }
  return total;
}

double bernoulli_integral_product(const std::function<double(double)>& g, int n, double r) {
  const double p = r / n;
  double total = 1.0;
  for (int j = 1; j <= n; ++j) total *= 1.0 - p + p * g(static_cast<double>(j) / n);
  return total;
}

double poisson_integral_product(const std::function<double(double)>& g, double r,
                                int quad_nodes) {
  std::vector<double> nodes, weights;
  gauss_legendre(quad_nodes, nodes, weights);
  double integral = 0.0;
  for (int i = 0; i < quad_nodes; ++i)
    integral += weights[static_cast<std::size_t>(i)] * g(nodes[static_cast<std::size_t>(i)]);
  return std::exp(r * (integral - 1.0));
}

}  // namespace stoqlab::pointproc
