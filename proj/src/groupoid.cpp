#include "stoqlab/groupoid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stoqlab/parallel.hpp"

namespace stoqlab::groupoid {

AlgebraSpec::AlgebraSpec(Region sites, int q) : sites_(std::move(sites)), q_(q) {
  if (q_ < 2) throw std::invalid_argument("AlgebraSpec: q >= 2 required");
  order_ = 1;
  pow_.resize(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    pow_[i] = order_;
    order_ *= static_cast<std::size_t>(q_);
    if (order_ > (std::size_t{1} << 22))
      throw std::invalid_argument("AlgebraSpec: dimension budget exceeded");
  }
  roots_.resize(static_cast<std::size_t>(q_));
  for (int k = 0; k < q_; ++k) {
    roots_[static_cast<std::size_t>(k)] =
        std::polar(1.0, 2.0 * std::numbers::pi * k / static_cast<double>(q_));
  }
}

int AlgebraSpec::digit(std::size_t index, int site) const {
  return static_cast<int>(index / pow_[static_cast<std::size_t>(site)]) % q_;
}

std::size_t AlgebraSpec::with_digit(std::size_t index, int site, int value) const {
  const int old = digit(index, site);
  return index + static_cast<std::size_t>(value - old) * pow_[static_cast<std::size_t>(site)];
}

std::size_t AlgebraSpec::act(std::size_t g, std::size_t sigma) const {
  if (q_ == 2) return g ^ sigma;
  std::size_t out = 0;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const int k = (digit(g, static_cast<int>(i)) + digit(sigma, static_cast<int>(i))) % q_;
    out += static_cast<std::size_t>(k) * pow_[i];
  }
  return out;
}

std::size_t AlgebraSpec::compose(std::size_t g, std::size_t h) const { return act(g, h); }

std::size_t AlgebraSpec::inverse(std::size_t g) const {
  if (q_ == 2) return g;
  std::size_t out = 0;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const int k = (q_ - digit(g, static_cast<int>(i))) % q_;
    out += static_cast<std::size_t>(k) * pow_[i];
  }
  return out;
}

Complex AlgebraSpec::root(int k) const {
  return roots_[static_cast<std::size_t>(((k % q_) + q_) % q_)];
}

Complex AlgebraSpec::config_value(std::size_t sigma, int site) const {
  return roots_[static_cast<std::size_t>(digit(sigma, site))];
}

std::size_t AlgebraSpec::flip_of(const Region& b) const {
  if (q_ != 2) throw std::invalid_argument("flip_of: q = 2 only");
  std::size_t g = 0;
  for (const Point& p : b) {
    const std::ptrdiff_t i = sites_.index_of(p);
    if (i < 0) throw std::invalid_argument("flip_of: point outside the spec sites");
    g |= pow_[static_cast<std::size_t>(i)];
  }
  return g;
}

SpecPtr make_spec(Region sites, int q) {
  return std::make_shared<const AlgebraSpec>(std::move(sites), q);
}

AlgebraElement::AlgebraElement(SpecPtr spec)
    : spec_(std::move(spec)), n_(spec_->order()), table_(n_ * n_, Complex{}) {}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  for (std::size_t i = 0; i < table_.size(); ++i) table_[i] += other.table_[i];
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  for (std::size_t i = 0; i < table_.size(); ++i) table_[i] -= other.table_[i];
  return *this;
}

AlgebraElement AlgebraElement::scaled(Complex s) const {
  AlgebraElement out = *this;
  for (Complex& z : out.table_) z *= s;
  return out;
}

double AlgebraElement::max_abs_diff(const AlgebraElement& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < table_.size(); ++i)
    m = std::max(m, std::abs(table_[i] - other.table_[i]));
  return m;
}

double AlgebraElement::max_abs() const {
  double m = 0.0;
  for (const Complex& z : table_) m = std::max(m, std::abs(z));
  return m;
}

AlgebraElement identity(const SpecPtr& spec) {
  AlgebraElement f(spec);
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) f.at(0, sigma) = 1.0;
  return f;
}

AlgebraElement delta(const SpecPtr& spec, std::size_t sigma, std::size_t g) {
  AlgebraElement f(spec);
  f.at(g, sigma) = 1.0;
  return f;
}

AlgebraElement classical(const SpecPtr& spec, const std::vector<Complex>& values) {
  AlgebraElement f(spec);
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) f.at(0, sigma) = values[sigma];
  return f;
}

AlgebraElement exp_classical(const SpecPtr& spec, const std::vector<Complex>& values) {
  AlgebraElement f(spec);
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma)
    f.at(0, sigma) = std::exp(values[sigma]);
  return f;
}

namespace {

template <bool kParallel>
AlgebraElement convolve_impl(const AlgebraElement& f1, const AlgebraElement& f2) {
  if (f1.spec() != f2.spec() && !(*f1.spec() == *f2.spec()))
    throw std::invalid_argument("convolve: spec mismatch");
  const AlgebraSpec& spec = *f1.spec();
  const std::size_t n = spec.order();
  AlgebraElement out(f1.spec());
  // (f1 f2)(sigma, g) = sum_k f1(k sigma, g k^{-1}) f2(sigma, k)
  auto row = [&](std::size_t g) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t gk_inv = spec.compose(g, spec.inverse(k));
      for (std::size_t sigma = 0; sigma < n; ++sigma) {
        const Complex w2 = f2.at(k, sigma);
        if (w2 == Complex{}) continue;
        out.at(g, sigma) += f1.at(gk_inv, spec.act(k, sigma)) * w2;
      }
    }
  };
  if constexpr (kParallel) {
    parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t g) {
      row(static_cast<std::size_t>(g));
    });
  } else {
    for (std::size_t g = 0; g < n; ++g) row(g);
  }
  return out;
}

}  // namespace

AlgebraElement convolve(const AlgebraElement& f1, const AlgebraElement& f2) {
  return convolve_impl<true>(f1, f2);
}

AlgebraElement convolve_serial(const AlgebraElement& f1, const AlgebraElement& f2) {
  return convolve_impl<false>(f1, f2);
}

AlgebraElement adjoint(const AlgebraElement& f) {
  const AlgebraSpec& spec = *f.spec();
  AlgebraElement out(f.spec());
  for (std::size_t g = 0; g < spec.order(); ++g) {
    const std::size_t ginv = spec.inverse(g);
    for (std::size_t sigma = 0; sigma < spec.order(); ++sigma) {
      out.at(g, sigma) = std::conj(f.at(ginv, spec.act(g, sigma)));
    }
  }
  return out;
}

Complex trace(const AlgebraElement& f) {
  Complex t{};
  for (std::size_t sigma = 0; sigma < f.spec()->order(); ++sigma) t += f.at(0, sigma);
  return t;
}

std::vector<Complex> conditional_expectation(const AlgebraElement& f) {
  std::vector<Complex> out(f.spec()->order());
  for (std::size_t sigma = 0; sigma < out.size(); ++sigma) out[sigma] = f.at(0, sigma);
  return out;
}

AlgebraElement generator_u(const SpecPtr& spec, const Point& x) {
  const std::ptrdiff_t site = spec->sites().index_of(x);
  if (site < 0) throw std::invalid_argument("generator_u: point outside the spec sites");
  AlgebraElement f(spec);
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) {
    f.at(0, sigma) = spec->config_value(sigma, static_cast<int>(site));
  }
  return f;
}

AlgebraElement generator_v(const SpecPtr& spec, const Point& x) {
  const std::ptrdiff_t site = spec->sites().index_of(x);
  if (site < 0) throw std::invalid_argument("generator_v: point outside the spec sites");
  AlgebraElement f(spec);
  const std::size_t g = spec->with_digit(0, static_cast<int>(site), 1);
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) f.at(g, sigma) = 1.0;
  return f;
}

AlgebraElement sigma3(const SpecPtr& spec, const Point& x) {
  if (spec->q() != 2) throw std::invalid_argument("sigma3: q = 2 only");
  return generator_u(spec, x);
}

AlgebraElement sigma1(const SpecPtr& spec, const Point& x) {
  if (spec->q() != 2) throw std::invalid_argument("sigma1: q = 2 only");
  return generator_v(spec, x);
}

AlgebraElement sigma1_set(const SpecPtr& spec, const Region& b) {
  AlgebraElement f(spec);
  const std::size_t g = spec->flip_of(b);
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) f.at(g, sigma) = 1.0;
  return f;
}

CMatrix regular_representation(const AlgebraElement& f) {
  const AlgebraSpec& spec = *f.spec();
  const std::size_t n = spec.order();
  CMatrix m(n);
  // config index of g sigma0 equals g itself since sigma0 = 0
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t g = 0; g < n; ++g) {
      m.at(h, g) = f.at(spec.compose(h, spec.inverse(g)), g);
    }
  }
  return m;
}

AlgebraElement element_from_matrix(const SpecPtr& spec, const CMatrix& m) {
  if (m.size() != spec->order())
    throw std::invalid_argument("element_from_matrix: size mismatch");
  AlgebraElement f(spec);
  for (std::size_t g = 0; g < spec->order(); ++g) {
    for (std::size_t k = 0; k < spec->order(); ++k) {
      f.at(k, g) = m.at(spec->compose(k, g), g);
    }
  }
  return f;
}

bool is_perron_positive(const AlgebraElement& f, double tol) {
  for (std::size_t g = 0; g < f.spec()->order(); ++g) {
    for (std::size_t sigma = 0; sigma < f.spec()->order(); ++sigma) {
      const Complex z = f.at(g, sigma);
      if (std::abs(z.imag()) > tol || z.real() < -tol) return false;
    }
  }
  return true;
}

bool is_positive_operator(const AlgebraElement& f, double tol) {
  const auto eigenvalues = linalg::hermitian_eigenvalues(regular_representation(f));
  return eigenvalues.empty() || eigenvalues.front() >= -tol;
}

double lexicographic_weight(const Point& x, const Point& y) { return y < x ? 1.0 : 0.0; }

std::vector<LadderPair> jordan_wigner(const SpecPtr& spec, const PairWeight& w) {
  if (spec->q() != 2) throw std::invalid_argument("jordan_wigner: q = 2 only");
  const Region& sites = spec->sites();
  for (const Point& x : sites) {
    if (w(x, x) != 0.0) throw std::invalid_argument("jordan_wigner: w(x,x) must vanish");
    for (const Point& y : sites) {
      if (x == y || !(x < y)) continue;
      const double sum = w(x, y) + w(y, x);
      const double diff = w(x, y) - w(y, x);
      auto odd_integer = [](double v) {
        const double r = std::round(v);
        return std::abs(v - r) < 1e-12 && std::llround(r) % 2 != 0;
      };
      if (!odd_integer(sum) || !odd_integer(diff))
        throw std::invalid_argument("jordan_wigner: parity rule fails for a site pair");
    }
  }

  std::vector<LadderPair> out;
  for (const Point& x : sites) {
    const std::ptrdiff_t site = sites.index_of(x);
    // f_x = sum_z w(x,z) n_z, with n_z the +1 occupation
    std::vector<Complex> phase_plus(spec->order()), phase_minus(spec->order());
    for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) {
      double fx = 0.0;
      for (const Point& z : sites) {
        const std::ptrdiff_t zi = sites.index_of(z);
        if (spec->digit(sigma, static_cast<int>(zi)) == 0) fx += w(x, z);
      }
      phase_plus[sigma] = std::polar(1.0, std::numbers::pi * fx);
      phase_minus[sigma] = std::polar(1.0, -std::numbers::pi * fx);
    }
    // occupation indicators: digit 0 is the +1 spin
    std::vector<Complex> occ_plus(spec->order()), occ_minus(spec->order());
    for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) {
      const bool plus = spec->digit(sigma, static_cast<int>(site)) == 0;
      occ_plus[sigma] = plus ? 1.0 : 0.0;
      occ_minus[sigma] = plus ? 0.0 : 1.0;
    }
    const AlgebraElement flip = sigma1(spec, x);
    const AlgebraElement lower = convolve(classical(spec, occ_minus), flip);
    const AlgebraElement upper = convolve(classical(spec, occ_plus), flip);
    LadderPair pair;
    pair.annihilate = convolve(classical(spec, phase_plus), lower);
    pair.create = convolve(classical(spec, phase_minus), upper);
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace stoqlab::groupoid
