#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "stoqlab/lattice.hpp"
#include "stoqlab/linalg.hpp"

namespace stoqlab::groupoid {

using lattice::Point;
using lattice::Region;
using linalg::CMatrix;
using linalg::Complex;

// Finite transformation groupoid Omega_Lambda x G_Lambda for q-state spins.
// Configurations and group elements are encoded as base-q digit strings over
// the sites in canonical order (site 0 = least significant digit); the digit
// k stands for the root of unity z_q^k.
class AlgebraSpec {
 public:
  AlgebraSpec(Region sites, int q);

  const Region& sites() const { return sites_; }
  int q() const { return q_; }
  int n_sites() const { return static_cast<int>(sites_.size()); }
  std::size_t order() const { return order_; }  // q^{|sites|}

  friend bool operator==(const AlgebraSpec& a, const AlgebraSpec& b) {
    return a.q_ == b.q_ && a.sites_ == b.sites_;
  }

  int digit(std::size_t index, int site) const;
  std::size_t with_digit(std::size_t index, int site, int value) const;
  std::size_t act(std::size_t g, std::size_t sigma) const;      // g sigma
  std::size_t compose(std::size_t g, std::size_t h) const;      // g h
  std::size_t inverse(std::size_t g) const;
  Complex root(int k) const;  // z_q^k
  Complex config_value(std::size_t sigma, int site) const;
  std::size_t flip_of(const Region& b) const;  // q = 2: exponent 1 on b

 private:
  Region sites_;
  int q_;
  std::size_t order_;
  std::vector<std::size_t> pow_;  // q^i per site
  std::vector<Complex> roots_;
};

using SpecPtr = std::shared_ptr<const AlgebraSpec>;

SpecPtr make_spec(Region sites, int q);

// Complex function on the groupoid, dense over (group, config).
class AlgebraElement {
 public:
  AlgebraElement() = default;
  explicit AlgebraElement(SpecPtr spec);

  const SpecPtr& spec() const { return spec_; }
  Complex& at(std::size_t g, std::size_t sigma) { return table_[g * n_ + sigma]; }
  const Complex& at(std::size_t g, std::size_t sigma) const { return table_[g * n_ + sigma]; }
  std::size_t order() const { return n_; }

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement scaled(Complex s) const;
  double max_abs_diff(const AlgebraElement& other) const;
  double max_abs() const;

 private:
  SpecPtr spec_;
  std::size_t n_ = 0;
  std::vector<Complex> table_;
};

AlgebraElement identity(const SpecPtr& spec);
AlgebraElement delta(const SpecPtr& spec, std::size_t sigma, std::size_t g);
// classical function embedded on the unit space
AlgebraElement classical(const SpecPtr& spec, const std::vector<Complex>& values);
// pointwise exponential of a classical function
AlgebraElement exp_classical(const SpecPtr& spec, const std::vector<Complex>& values);

// convolution product; OpenMP over output arrows with a serial reference
AlgebraElement convolve(const AlgebraElement& f1, const AlgebraElement& f2);
AlgebraElement convolve_serial(const AlgebraElement& f1, const AlgebraElement& f2);
AlgebraElement adjoint(const AlgebraElement& f);
Complex trace(const AlgebraElement& f);
std::vector<Complex> conditional_expectation(const AlgebraElement& f);

// generators: u_x classical site value, v_x the single-site cyclic step
AlgebraElement generator_u(const SpecPtr& spec, const Point& x);
AlgebraElement generator_v(const SpecPtr& spec, const Point& x);
// q = 2 Pauli-type elements
AlgebraElement sigma3(const SpecPtr& spec, const Point& x);
AlgebraElement sigma1(const SpecPtr& spec, const Point& x);
AlgebraElement sigma1_set(const SpecPtr& spec, const Region& b);  // simultaneous flips

// one source fiber of the left regular representation (the action is
// transitive, so the fiber matrix is faithful); rows and columns are indexed
// by the group element, M[h][g] = f(g sigma0, h g^{-1}) with sigma0 = index 0
CMatrix regular_representation(const AlgebraElement& f);
AlgebraElement element_from_matrix(const SpecPtr& spec, const CMatrix& m);

bool is_perron_positive(const AlgebraElement& f, double tol = 1e-12);
bool is_positive_operator(const AlgebraElement& f, double tol = 1e-10);

struct LadderPair {
  AlgebraElement annihilate;  // a_x
  AlgebraElement create;      // a_x^*
};
using PairWeight = std::function<double(const Point&, const Point&)>;
// default weight [y < x] in lexicographic order
double lexicographic_weight(const Point& x, const Point& y);
// F-Jordan-Wigner ladder pairs from f_x = sum_z w(x,z) n_z; validates the
// odd-integer parity rule on w
std::vector<LadderPair> jordan_wigner(const SpecPtr& spec, const PairWeight& w);

}  // namespace stoqlab::groupoid
