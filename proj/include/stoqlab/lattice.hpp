#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stoqlab::lattice {

// Lattice site in Z^d, d in {1,2,3}. Unused coordinates stay zero so that
// lexicographic comparison is well defined across the fixed maximum arity.
struct Point {
  std::array<int, 3> c{0, 0, 0};
  int dim = 0;

  Point() = default;
  Point(std::initializer_list<int> xs);
  static Point of(const std::vector<int>& xs);

  int operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Point& a, const Point& b) { return a.dim == b.dim && a.c == b.c; }
  friend bool operator<(const Point& a, const Point& b) { return a.c < b.c; }
};

int l1_distance(const Point& a, const Point& b);
Point operator+(const Point& a, const Point& b);

// Finite subset of Z^d held in canonical lexicographic order without
// duplicates. All set algebra preserves the canonical order, which keeps
// every downstream computation deterministic.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Point> pts);  // sorts and dedups

  static Region box(const Point& lo, const Point& hi);  // inclusive corners

  bool empty() const { return pts_.empty(); }
  std::size_t size() const { return pts_.size(); }
  int dim() const { return pts_.empty() ? 0 : pts_.front().dim; }
  const std::vector<Point>& points() const { return pts_; }
  const Point& operator[](std::size_t i) const { return pts_[i]; }
  bool contains(const Point& p) const;
  // index of p in canonical order, or -1
  std::ptrdiff_t index_of(const Point& p) const;

  friend bool operator==(const Region& a, const Region& b) { return a.pts_ == b.pts_; }
  auto begin() const { return pts_.begin(); }
  auto end() const { return pts_.end(); }

 private:
  std::vector<Point> pts_;
};

Region region_union(const Region& a, const Region& b);
Region region_intersection(const Region& a, const Region& b);
Region region_difference(const Region& a, const Region& b);
bool region_subset(const Region& a, const Region& b);
bool regions_disjoint(const Region& a, const Region& b);
Region region_translate(const Region& r, const Point& shift);
// minimum l1 distance between two nonempty regions
int region_distance(const Region& a, const Region& b);

// closed l1 ball B_radius(center) intersected with Z^d
Region ball(const Point& center, int radius);

// s_d(n): number of integer points on the l1 sphere of radius n, by the
// closed binomial formula; s_d(0) = 1 by convention.
std::int64_t sphere_count(int d, int n);

// nearest-neighbor (|x-y| = 1) connected components, canonically ordered
std::vector<Region> connected_components(const Region& r);

struct Boundaries {
  Region inner;             // points of r at distance 1 from the complement
  std::int64_t edge_count;  // unordered nearest-neighbor pairs crossing r
};
Boundaries boundaries(const Region& r);

// Complement decomposition inside a bounding box inflated by margin;
// components touching the inflated border are classified as unbounded.
struct RegionDecomposition {
  std::vector<Region> interior_components;  // I(r), each connected and finite
  Region interior;                          // union of the above
  Region volume;                            // r together with its interior
};
RegionDecomposition decompose(const Region& r, int bounding_margin = 1);

int diameter(const Region& r);  // max pairwise l1 distance; r nonempty

std::size_t hash_point(const Point& p);

}  // namespace stoqlab::lattice

template <>
struct std::hash<stoqlab::lattice::Point> {
  std::size_t operator()(const stoqlab::lattice::Point& p) const {
    return stoqlab::lattice::hash_point(p);
  }
};
