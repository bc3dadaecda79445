#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace stoqlab::linalg {

using Complex = std::complex<double>;

// Dense square complex matrix, row major.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(std::size_t n) : n_(n), a_(n * n, Complex{0.0, 0.0}) {}
  static CMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  Complex& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const Complex& at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  CMatrix adjoint() const;
  double max_abs() const;
  double one_norm() const;  // max column sum

  friend CMatrix operator+(const CMatrix& x, const CMatrix& y);
  friend CMatrix operator-(const CMatrix& x, const CMatrix& y);
  friend CMatrix operator*(const CMatrix& x, const CMatrix& y);
  CMatrix& operator+=(const CMatrix& y);
  CMatrix scaled(Complex s) const;

 private:
  std::size_t n_ = 0;
  std::vector<Complex> a_;
};

// serial reference product kept for the kernel tests
CMatrix multiply_serial(const CMatrix& x, const CMatrix& y);

// Solves A X = B by LU with partial pivoting.
CMatrix lu_solve(CMatrix a, const CMatrix& b);

// Scaling-and-squaring with the degree-13 Pade approximant; relative error
// near machine precision for the modest norms used here.
CMatrix expm(const CMatrix& a);

// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
// ascending order.
std::vector<double> hermitian_eigenvalues(CMatrix a);
// Full eigensystem: eigenvalues plus the unitary of column eigenvectors.
void hermitian_eigensystem(CMatrix a, std::vector<double>& values, CMatrix& vectors);

// Numerical rank by Gaussian elimination with full pivoting.
std::size_t rank(CMatrix a, double tol = 1e-9);

}  // namespace stoqlab::linalg
