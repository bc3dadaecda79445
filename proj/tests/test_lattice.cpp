#include <doctest.h>

#include <cmath>
#include <functional>

#include "stoqlab/contours.hpp"
#include "stoqlab/lattice.hpp"
#include "stoqlab/rng.hpp"

using namespace stoqlab;
using lattice::Point;
using lattice::Region;

namespace {

// independent oracle: count l1-sphere points by cube enumeration
std::int64_t sphere_oracle(int d, int n) {
  std::int64_t count = 0;
  std::function<void(int, int)> rec = [&](int axis, int used) {
    if (axis == d) {
      if (used == n) ++count;
      return;
    }
    for (int v = -n; v <= n; ++v)
      if (used + std::abs(v) <= n) rec(axis + 1, used + std::abs(v));
  };
  rec(0, 0);
  return count;
}

}  // namespace

TEST_CASE("l1 distance") {
  CHECK(lattice::l1_distance(Point{0, 0}, Point{0, 0}) == 0);
  CHECK(lattice::l1_distance(Point{0, 0}, Point{1, 1}) == 2);
  CHECK(lattice::l1_distance(Point{2, -1}, Point{-1, 3}) == 7);
  CHECK_THROWS(lattice::l1_distance(Point{0}, Point{0, 0}));
}

TEST_CASE("balls") {
  CHECK(lattice::ball(Point{0}, 0).size() == 1);
  CHECK(lattice::ball(Point{0, 0}, 1).size() == 5);
  CHECK(lattice::ball(Point{0, 0}, 2).size() == 13);
  // |B_n| = 1 + sum of sphere counts, enumerated for n <= 12 and d <= 3
  for (int d = 1; d <= 3; ++d) {
    Point origin;
    origin.dim = d;
    for (int n = 0; n <= (d == 3 ? 8 : 12); ++n) {
      std::int64_t expected = 1;
      for (int m = 1; m <= n; ++m) expected += lattice::sphere_count(d, m);
      CHECK(static_cast<std::int64_t>(lattice::ball(origin, n).size()) == expected);
    }
  }
}

TEST_CASE("sphere count formula") {
  for (int d = 1; d <= 3; ++d) {
    CHECK(lattice::sphere_count(d, 1) == 2 * d);
    for (int n = 0; n <= 12; ++n) CHECK(lattice::sphere_count(d, n) == sphere_oracle(d, n));
  }
  CHECK(lattice::sphere_count(2, 2) == 8);
  for (int n = 1; n <= 12; ++n) CHECK(lattice::sphere_count(1, n) == 2);
}

TEST_CASE("connected components") {
  CHECK(lattice::connected_components(Region{}).empty());
  CHECK(lattice::connected_components(Region({Point{0, 0}, Point{1, 0}})).size() == 1);
  CHECK(lattice::connected_components(Region({Point{0, 0}, Point{2, 0}})).size() == 2);
}

TEST_CASE("boundaries") {
  const auto single = lattice::boundaries(Region({Point{0, 0}}));
  CHECK(single.inner.size() == 1);
  CHECK(single.edge_count == 4);
  const auto square = lattice::boundaries(Region::box(Point{0, 0}, Point{1, 1}));
  CHECK(square.inner.size() == 4);
  CHECK(square.edge_count == 8);
  const auto empty = lattice::boundaries(Region{});
  CHECK(empty.inner.empty());
  CHECK(empty.edge_count == 0);
}

TEST_CASE("decompose") {
  const Region filled = Region::box(Point{0, 0}, Point{2, 2});
  const auto d1 = lattice::decompose(filled);
  CHECK(d1.interior.empty());
  CHECK(d1.volume == filled);

  // hollow 3x3 ring
  const Region ring = lattice::region_difference(filled, Region({Point{1, 1}}));
  const auto d2 = lattice::decompose(ring);
  CHECK(d2.interior.size() == 1);
  CHECK(d2.interior.contains(Point{1, 1}));
  CHECK(d2.volume.size() == 9);

  const Region two = Region({Point{0, 0}, Point{5, 5}});
  CHECK(lattice::decompose(two).interior.empty());

  // idempotent under margin increase
  for (int margin = 1; margin <= 4; ++margin) {
    const auto d = lattice::decompose(ring, margin);
    CHECK(d.interior == d2.interior);
    CHECK(d.volume == d2.volume);
  }
}

TEST_CASE("diameter") {
  CHECK(lattice::diameter(Region({Point{3, 4}})) == 0);
  CHECK(lattice::diameter(Region({Point{0, 0}, Point{3, 0}})) == 3);
  CHECK(lattice::diameter(lattice::ball(Point{0, 0}, 2)) == 4);
  CHECK_THROWS(lattice::diameter(Region{}));
  // brute-force cross-check on random regions
  RngStream rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Point> pts;
    for (int k = 0; k < 12; ++k) pts.push_back(Point{rng.next_int(9) - 4, rng.next_int(9) - 4});
    const Region r(std::move(pts));
    int brute = 0;
    for (const Point& a : r)
      for (const Point& b : r) brute = std::max(brute, lattice::l1_distance(a, b));
    CHECK(lattice::diameter(r) == brute);
  }
}

TEST_CASE("sphere bounds from the combinatorial corollary") {
  for (int d = 2; d <= 3; ++d) {
    const double cd = contours::constants::c_d(d);
    for (int n = 1; n <= 12; ++n) {
      const double s = static_cast<double>(lattice::sphere_count(d, n));
      CHECK(cd * std::pow(n, d - 1) <= s);
      CHECK(s <= std::exp(-1.0) * std::pow(2.0 * std::exp(1.0) + 1.0, d) * std::pow(n, d - 1));
    }
  }
}
