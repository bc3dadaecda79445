#include <doctest.h>

#include <cmath>

#include "stoqlab/groupoid.hpp"
#include "stoqlab/rng.hpp"

using namespace stoqlab;
using groupoid::AlgebraElement;
using groupoid::Complex;
using lattice::Point;
using lattice::Region;

namespace {

Region chain(int length) {
  std::vector<Point> pts;
  for (int i = 0; i < length; ++i) pts.push_back(Point{i});
  return Region(std::move(pts));
}

AlgebraElement random_element(const groupoid::SpecPtr& spec, RngStream& rng) {
  AlgebraElement f(spec);
  for (std::size_t g = 0; g < spec->order(); ++g)
    for (std::size_t s = 0; s < spec->order(); ++s)
      f.at(g, s) = {2.0 * rng.next_uniform() - 1.0, 2.0 * rng.next_uniform() - 1.0};
  return f;
}

}  // namespace

TEST_CASE("identity is a partition of unity") {
  for (int q : {2, 3}) {
    const auto spec = groupoid::make_spec(chain(2), q);
    const auto one = groupoid::identity(spec);
    RngStream rng(1);
    const auto f = random_element(spec, rng);
    CHECK(groupoid::convolve(one, f).max_abs_diff(f) <= 1e-14);
    CHECK(groupoid::convolve(f, one).max_abs_diff(f) <= 1e-14);
    // identity = sum of unit deltas
    AlgebraElement sum(spec);
    for (std::size_t s = 0; s < spec->order(); ++s) sum += groupoid::delta(spec, s, 0);
    CHECK(sum.max_abs_diff(one) == 0.0);
  }
}

TEST_CASE("classical product rule") {
  const auto spec = groupoid::make_spec(chain(2), 3);
  RngStream rng(2);
  std::vector<Complex> values(spec->order());
  for (auto& v : values) v = {2.0 * rng.next_uniform() - 1.0, 0.0};
  const auto f1 = groupoid::classical(spec, values);
  const auto f2 = random_element(spec, rng);
  const auto prod = groupoid::convolve(f1, f2);
  for (std::size_t g = 0; g < spec->order(); ++g) {
    for (std::size_t s = 0; s < spec->order(); ++s) {
      // (f1 f2)(sigma, g) = f1(g sigma) f2(sigma, g)
      const Complex expected = values[spec->act(g, s)] * f2.at(g, s);
      CHECK(std::abs(prod.at(g, s) - expected) <= 1e-13);
    }
  }
}

TEST_CASE("delta sandwich matrix elements") {
  for (int q : {2, 3}) {
    const auto spec = groupoid::make_spec(chain(2), q);
    const std::size_t n = spec->order();
    RngStream rng(3);
    const auto f = random_element(spec, rng);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t omega = rng.next_int(static_cast<int>(n));
      const std::size_t h = rng.next_int(static_cast<int>(n));
      const std::size_t eta = rng.next_int(static_cast<int>(n));
      const std::size_t k = rng.next_int(static_cast<int>(n));
      const auto sandwich = groupoid::convolve(
          groupoid::convolve(groupoid::delta(spec, omega, h), f), groupoid::delta(spec, eta, k));
      // nonzero only at (eta, g~) with g~ eta = h omega; digit strings of
      // configurations and group elements share the encoding, so g~ is the
      // digitwise difference of h omega and eta
      const std::size_t g_tilde = spec->compose(spec->act(h, omega), spec->inverse(eta));
      const Complex expected =
          f.at(spec->compose(spec->inverse(h), spec->compose(g_tilde, spec->inverse(k))),
               spec->act(k, eta));
      for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t s = 0; s < n; ++s) {
          const Complex want = (g == g_tilde && s == eta) ? expected : Complex{0.0, 0.0};
          CHECK(std::abs(sandwich.at(g, s) - want) <= 1e-13);
        }
      }
    }
  }
}

TEST_CASE("adjoint is an involution and fixes real classical functions") {
  const auto spec = groupoid::make_spec(chain(2), 3);
  RngStream rng(4);
  const auto f = random_element(spec, rng);
  CHECK(groupoid::adjoint(groupoid::adjoint(f)).max_abs_diff(f) == 0.0);
  std::vector<Complex> values(spec->order());
  for (auto& v : values) v = {rng.next_uniform(), 0.0};
  const auto classical = groupoid::classical(spec, values);
  CHECK(groupoid::adjoint(classical).max_abs_diff(classical) == 0.0);
  // u* = u^{q-1}
  const auto u = groupoid::generator_u(spec, Point{0});
  auto upow = u;
  for (int k = 2; k < spec->q(); ++k) upow = groupoid::convolve(upow, u);
  CHECK(groupoid::adjoint(u).max_abs_diff(upow) <= 1e-14);
}

TEST_CASE("trace properties") {
  const auto spec = groupoid::make_spec(chain(2), 3);
  CHECK(groupoid::trace(groupoid::identity(spec)).real() == doctest::Approx(9.0));
  RngStream rng(5);
  const auto f1 = random_element(spec, rng);
  const auto f2 = random_element(spec, rng);
  const auto t12 = groupoid::trace(groupoid::convolve(f1, f2));
  const auto t21 = groupoid::trace(groupoid::convolve(f2, f1));
  CHECK(std::abs(t12 - t21) <= 1e-12);
  CHECK(std::abs(groupoid::trace(groupoid::generator_u(spec, Point{0}))) <= 1e-14);
  // faithful on positive elements: nonzero f gives positive trace(f* f)
  const auto ff = groupoid::convolve(groupoid::adjoint(f1), f1);
  CHECK(groupoid::trace(ff).real() > 0.0);
}

TEST_CASE("regular representation round trip and fiber shifts") {
  const auto spec = groupoid::make_spec(chain(2), 2);
  RngStream rng(6);
  const auto f = random_element(spec, rng);
  const auto m = groupoid::regular_representation(f);
  const auto back = groupoid::element_from_matrix(spec, m);
  CHECK(back.max_abs_diff(f) == 0.0);

  // pi(u) is diagonal, pi(v) a permutation
  const auto mu = groupoid::regular_representation(groupoid::generator_u(spec, Point{0}));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(mu.at(i, j)) == 0.0);
  const auto mv = groupoid::regular_representation(groupoid::generator_v(spec, Point{0}));
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(mv.at(j ^ 1, j) - Complex{1.0, 0.0}) == 0.0);

  // single site at general q: pi(u) is the root diagonal and pi(v) the cyclic
  // step, matching the standard clock-and-shift pair
  const auto spec3 = groupoid::make_spec(Region({Point{0}}), 3);
  const auto u3 = groupoid::regular_representation(groupoid::generator_u(spec3, Point{0}));
  const auto v3 = groupoid::regular_representation(groupoid::generator_v(spec3, Point{0}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const Complex u_want = (i == j) ? spec3->root(static_cast<int>(j)) : Complex{0.0, 0.0};
      CHECK(std::abs(u3.at(i, j) - u_want) <= 1e-15);
      const Complex v_want = (i == (j + 1) % 3) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      CHECK(std::abs(v3.at(i, j) - v_want) <= 1e-15);
    }
  }
}

TEST_CASE("conditional expectation") {
  const auto spec = groupoid::make_spec(chain(2), 2);
  RngStream rng(7);
  const auto g = random_element(spec, rng);
  std::vector<Complex> values(spec->order());
  for (auto& v : values) v = {2.0 * rng.next_uniform() - 1.0, 0.0};
  const auto f = groupoid::classical(spec, values);
  // E(classical) = classical
  const auto ef = groupoid::conditional_expectation(f);
  for (std::size_t s = 0; s < spec->order(); ++s) CHECK(ef[s] == values[s]);
  // module property E(f g) = f E(g)
  const auto efg = groupoid::conditional_expectation(groupoid::convolve(f, g));
  const auto eg = groupoid::conditional_expectation(g);
  for (std::size_t s = 0; s < spec->order(); ++s)
    CHECK(std::abs(efg[s] - values[s] * eg[s]) <= 1e-13);
  // E(v) = 0
  const auto ev = groupoid::conditional_expectation(groupoid::generator_v(spec, Point{0}));
  for (const auto& v : ev) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("convolution associativity on random triples") {
  for (int q : {2, 3}) {
    const auto spec = groupoid::make_spec(chain(2), q);
    RngStream rng(8);
    for (int rep = 0; rep < 10; ++rep) {
      const auto a = random_element(spec, rng);
      const auto b = random_element(spec, rng);
      const auto c = random_element(spec, rng);
      const auto left = groupoid::convolve(groupoid::convolve(a, b), c);
      const auto right = groupoid::convolve(a, groupoid::convolve(b, c));
      CHECK(left.max_abs_diff(right) <= 1e-12);
    }
  }
}

TEST_CASE("span of monomials has full dimension") {
  for (int q : {2, 3}) {
    for (int m = 1; m <= 2; ++m) {
      const auto spec = groupoid::make_spec(chain(m), q);
      const std::size_t n = spec->order();
      // Gram matrix of all u^k v^l monomials under <A,B> = trace(A* B)
      std::vector<AlgebraElement> monomials;
      for (std::size_t uk = 0; uk < n; ++uk) {
        for (std::size_t vl = 0; vl < n; ++vl) {
          AlgebraElement mono = groupoid::identity(spec);
          for (int site = 0; site < m; ++site) {
            const auto u = groupoid::generator_u(spec, spec->sites()[site]);
            const auto v = groupoid::generator_v(spec, spec->sites()[site]);
            for (int k = 0; k < spec->digit(uk, site); ++k) mono = groupoid::convolve(mono, u);
            for (int l = 0; l < spec->digit(vl, site); ++l) mono = groupoid::convolve(mono, v);
          }
          monomials.push_back(std::move(mono));
        }
      }
      linalg::CMatrix gram(monomials.size());
      for (std::size_t i = 0; i < monomials.size(); ++i)
        for (std::size_t j = 0; j < monomials.size(); ++j)
          gram.at(i, j) =
              groupoid::trace(groupoid::convolve(groupoid::adjoint(monomials[i]), monomials[j]));
      CHECK(linalg::rank(gram, 1e-8) == monomials.size());
    }
  }
}

TEST_CASE("positivity notions differ") {
  const auto spec = groupoid::make_spec(chain(1), 2);
  const auto one = groupoid::identity(spec);
  CHECK(groupoid::is_perron_positive(one));
  CHECK(groupoid::is_positive_operator(one));

  // v + v*: entrywise nonnegative but with eigenvalues +-1
  auto v = groupoid::generator_v(spec, Point{0});
  auto sym = v;
  sym += groupoid::adjoint(v);
  CHECK(groupoid::is_perron_positive(sym));
  CHECK(!groupoid::is_positive_operator(sym));

  std::vector<Complex> values{{0.3, 0.0}, {1.2, 0.0}};
  const auto classical = groupoid::classical(spec, values);
  CHECK(groupoid::is_perron_positive(classical));
  CHECK(groupoid::is_positive_operator(classical));
}

TEST_CASE("jordan-wigner validation") {
  const auto spec = groupoid::make_spec(chain(3), 2);
  CHECK_THROWS(groupoid::jordan_wigner(spec, [](const Point&, const Point&) { return 0.0; }));
  const auto ladders = groupoid::jordan_wigner(spec, groupoid::lexicographic_weight);
  CHECK(ladders.size() == 3);
  // a* is the adjoint of a
  for (const auto& pair : ladders) {
    CHECK(groupoid::adjoint(pair.annihilate).max_abs_diff(pair.create) <= 1e-12);
  }
}

TEST_CASE("groupoid composition and inverse laws") {
  // (sigma,g) o (omega,h) is defined iff g sigma = omega, and then equals
  // (sigma, h g); inverses reverse compositions
  const auto spec = groupoid::make_spec(chain(2), 3);
  RngStream rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t sigma = rng.next_int(static_cast<int>(spec->order()));
    const std::size_t g = rng.next_int(static_cast<int>(spec->order()));
    const std::size_t h = rng.next_int(static_cast<int>(spec->order()));
    const std::size_t omega = spec->act(g, sigma);  // composable by construction
    // ((sigma,g) o (omega,h))^{-1} = (omega,h)^{-1} o (sigma,g)^{-1}
    const std::size_t lhs_source = spec->act(spec->compose(h, g), sigma);
    const std::size_t lhs_group = spec->inverse(spec->compose(h, g));
    const std::size_t rhs_source = spec->act(h, omega);
    const std::size_t rhs_group = spec->compose(spec->inverse(g), spec->inverse(h));
    CHECK(lhs_source == rhs_source);
    CHECK(lhs_group == rhs_group);
    // range of the inverse is the source of the original
    CHECK(spec->act(spec->inverse(g), spec->act(g, sigma)) == sigma);
  }
}

TEST_CASE("mutation sensitivity of the homomorphism check") {
  // a deliberately corrupted convolution must trip the AC-ALG style check
  const auto spec = groupoid::make_spec(chain(2), 2);
  RngStream rng(9);
  const auto f1 = random_element(spec, rng);
  const auto f2 = random_element(spec, rng);
  auto corrupted = groupoid::convolve(f1, f2);
  corrupted.at(1, 2) += Complex{1e-6, 0.0};  // injected sign-scale error
  const auto lhs = groupoid::regular_representation(corrupted);
  const auto rhs = groupoid::regular_representation(f1) * groupoid::regular_representation(f2);
  CHECK((lhs - rhs).max_abs() > 1e-12);
}
