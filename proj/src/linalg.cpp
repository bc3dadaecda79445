#include "stoqlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stoqlab/parallel.hpp"

namespace stoqlab::linalg {

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix m(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m.at(i, j) = std::conj(at(j, i));
  return m;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const Complex& z : a_) m = std::max(m, std::abs(z));
  return m;
}

double CMatrix::one_norm() const {
  double m = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n_; ++i) col += std::abs(at(i, j));
    m = std::max(m, col);
  }
  return m;
}

CMatrix operator+(const CMatrix& x, const CMatrix& y) {
  CMatrix m = x;
  for (std::size_t i = 0; i < m.n_ * m.n_; ++i) m.a_[i] += y.a_[i];
  return m;
}

CMatrix operator-(const CMatrix& x, const CMatrix& y) {
  CMatrix m = x;
  for (std::size_t i = 0; i < m.n_ * m.n_; ++i) m.a_[i] -= y.a_[i];
  return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& y) {
  for (std::size_t i = 0; i < n_ * n_; ++i) a_[i] += y.a_[i];
  return *this;
}

CMatrix CMatrix::scaled(Complex s) const {
  CMatrix m = *this;
  for (Complex& z : m.a_) z *= s;
  return m;
}

CMatrix multiply_serial(const CMatrix& x, const CMatrix& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("matrix product: size mismatch");
  CMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex xik = x.at(i, k);
      if (xik == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) m.at(i, j) += xik * y.at(k, j);
    }
  }
  return m;
}

CMatrix operator*(const CMatrix& x, const CMatrix& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("matrix product: size mismatch");
  if (n < 64) return multiply_serial(x, y);
  CMatrix m(n);
  parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex xik = x.at(static_cast<std::size_t>(i), k);
      if (xik == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j)
        m.at(static_cast<std::size_t>(i), j) += xik * y.at(k, j);
    }
  });
  return m;
}

CMatrix lu_solve(CMatrix a, const CMatrix& b) {
  const std::size_t n = a.size();
  if (n != b.size()) throw std::invalid_argument("lu_solve: size mismatch");
  CMatrix x = b;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a.at(col, col));
    for (std::size_t i = col + 1; i < n; ++i) {
      const double v = std::abs(a.at(i, col));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best == 0.0) throw std::runtime_error("lu_solve: singular matrix");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a.at(col, j), a.at(pivot, j));
        std::swap(x.at(col, j), x.at(pivot, j));
      }
    }
    const Complex inv = 1.0 / a.at(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      const Complex f = a.at(i, col) * inv;
      if (f == Complex{}) continue;
      for (std::size_t j = col; j < n; ++j) a.at(i, j) -= f * a.at(col, j);
      for (std::size_t j = 0; j < n; ++j) x.at(i, j) -= f * x.at(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    const Complex inv = 1.0 / a.at(col, col);
    for (std::size_t j = 0; j < n; ++j) x.at(col, j) *= inv;
    for (std::size_t i = 0; i < col; ++i) {
      const Complex f = a.at(i, col);
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) x.at(i, j) -= f * x.at(col, j);
    }
  }
  return x;
}

CMatrix expm(const CMatrix& a) {
  // degree-13 Pade coefficients
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const std::size_t n = a.size();
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  const double norm = a.one_norm();
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  }
  const CMatrix s = a.scaled(std::pow(2.0, -squarings));
  const CMatrix id = CMatrix::identity(n);
  const CMatrix s2 = s * s;
  const CMatrix s4 = s2 * s2;
  const CMatrix s6 = s4 * s2;

  CMatrix u_inner = s6.scaled(b[13]) + s4.scaled(b[11]) + s2.scaled(b[9]);
  CMatrix u = s * (s6 * u_inner + s6.scaled(b[7]) + s4.scaled(b[5]) + s2.scaled(b[3]) +
                   id.scaled(b[1]));
  CMatrix v_inner = s6.scaled(b[12]) + s4.scaled(b[10]) + s2.scaled(b[8]);
  CMatrix v = s6 * v_inner + s6.scaled(b[6]) + s4.scaled(b[4]) + s2.scaled(b[2]) + id.scaled(b[0]);

  CMatrix r = lu_solve(v - u, v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

namespace {

void jacobi_sweeps(CMatrix& a, CMatrix* vectors) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a.at(p, q));
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = a.at(p, p).real();
        const double aqq = a.at(q, q).real();
        // unitary 2x2 rotation zeroing the (p,q) entry of the Hermitian block
        const double phi = std::arg(apq);
        const double g = std::abs(apq);
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex eip = std::polar(1.0, phi);
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a.at(k, p);
          const Complex akq = a.at(k, q);
          a.at(k, p) = c * akp - s * std::conj(eip) * akq;
          a.at(k, q) = s * eip * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a.at(p, k);
          const Complex aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * eip * aqk;
          a.at(q, k) = s * std::conj(eip) * apk + c * aqk;
        }
        if (vectors != nullptr) {
          for (std::size_t k = 0; k < n; ++k) {
            const Complex vkp = vectors->at(k, p);
            const Complex vkq = vectors->at(k, q);
            vectors->at(k, p) = c * vkp - s * std::conj(eip) * vkq;
            vectors->at(k, q) = s * eip * vkp + c * vkq;
          }
        }
      }
    }
  }
}

}  // namespace

std::vector<double> hermitian_eigenvalues(CMatrix a) {
  const std::size_t n = a.size();
  jacobi_sweeps(a, nullptr);
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a.at(i, i).real();
  std::sort(eig.begin(), eig.end());
  return eig;
}

void hermitian_eigensystem(CMatrix a, std::vector<double>& values, CMatrix& vectors) {
  const std::size_t n = a.size();
  vectors = CMatrix::identity(n);
  jacobi_sweeps(a, &vectors);
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a.at(i, i).real();
}

std::size_t rank(CMatrix a, double tol) {
  const std::size_t n = a.size();
  std::size_t r = 0;
  std::vector<char> used_row(n, 0);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    double best = tol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used_row[i] && std::abs(a.at(i, col)) > best) {
        best = std::abs(a.at(i, col));
        pivot = i;
      }
    }
    if (pivot == n) continue;
    used_row[pivot] = 1;
    ++r;
    const Complex inv = 1.0 / a.at(pivot, col);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == pivot || a.at(i, col) == Complex{}) continue;
      const Complex f = a.at(i, col) * inv;
      for (std::size_t j = 0; j < n; ++j) a.at(i, j) -= f * a.at(pivot, j);
    }
  }
  return r;
}

}  // namespace stoqlab::linalg
