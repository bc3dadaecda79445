#include "stoqlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>

namespace stoqlab::lattice {

Point::Point(std::initializer_list<int> xs) {
  dim = static_cast<int>(xs.size());
  if (dim < 1 || dim > 3) throw std::invalid_argument("Point: dimension must be 1, 2 or 3");
  int i = 0;
  for (int x : xs) c[i++] = x;
}

Point Point::of(const std::vector<int>& xs) {
  Point p;
  p.dim = static_cast<int>(xs.size());
  if (p.dim < 1 || p.dim > 3) throw std::invalid_argument("Point: dimension must be 1, 2 or 3");
  for (int i = 0; i < p.dim; ++i) p.c[i] = xs[static_cast<std::size_t>(i)];
  return p;
}

int l1_distance(const Point& a, const Point& b) {
  if (a.dim != b.dim) throw std::invalid_argument("l1_distance: dimension mismatch");
  int s = 0;
  for (int i = 0; i < a.dim; ++i) s += std::abs(a.c[i] - b.c[i]);
  return s;
}

Point operator+(const Point& a, const Point& b) {
  if (a.dim != b.dim) throw std::invalid_argument("Point+: dimension mismatch");
  Point r = a;
  for (int i = 0; i < a.dim; ++i) r.c[i] += b.c[i];
  return r;
}

std::size_t hash_point(const Point& p) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.dim);
  for (int i = 0; i < 3; ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.c[i])) + 0x9e3779b97f4a7c15ULL +
         (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

Region::Region(std::vector<Point> pts) : pts_(std::move(pts)) {
  std::sort(pts_.begin(), pts_.end());
  pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
  for (const Point& p : pts_) {
    if (p.dim != pts_.front().dim) throw std::invalid_argument("Region: mixed dimensions");
  }
}

Region Region::box(const Point& lo, const Point& hi) {
  if (lo.dim != hi.dim) throw std::invalid_argument("Region::box: dimension mismatch");
  std::vector<Point> pts;
  std::array<int, 3> x{0, 0, 0};
  const int d = lo.dim;
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      Point p;
      p.dim = d;
      p.c = x;
      pts.push_back(p);
      return;
    }
    for (int v = lo[axis]; v <= hi[axis]; ++v) {
      x[static_cast<std::size_t>(axis)] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return Region(std::move(pts));
}

bool Region::contains(const Point& p) const {
  return std::binary_search(pts_.begin(), pts_.end(), p);
}

std::ptrdiff_t Region::index_of(const Point& p) const {
  auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
  if (it == pts_.end() || !(*it == p)) return -1;
  return it - pts_.begin();
}

Region region_union(const Region& a, const Region& b) {
  std::vector<Point> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region region_intersection(const Region& a, const Region& b) {
  std::vector<Point> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region region_difference(const Region& a, const Region& b) {
  std::vector<Point> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Region(std::move(out));
}

bool region_subset(const Region& a, const Region& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool regions_disjoint(const Region& a, const Region& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else
      return false;
  }
  return true;
}

Region region_translate(const Region& r, const Point& shift) {
  std::vector<Point> out;
  out.reserve(r.size());
  for (const Point& p : r) out.push_back(p + shift);
  return Region(std::move(out));
}

int region_distance(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("region_distance: empty region");
  int best = l1_distance(a[0], b[0]);
  for (const Point& p : a) {
    for (const Point& q : b) {
      const int d = l1_distance(p, q);
      if (d < best) best = d;
    }
  }
  return best;
}

Region ball(const Point& center, int radius) {
  if (radius < 0) throw std::invalid_argument("ball: negative radius");
  std::vector<Point> pts;
  const int d = center.dim;
  std::array<int, 3> x{0, 0, 0};
  std::function<void(int, int)> rec = [&](int axis, int budget) {
    if (axis == d - 1) {
      for (int v = -budget; v <= budget; ++v) {
        x[static_cast<std::size_t>(axis)] = center[axis] + v;
        Point p;
        p.dim = d;
        p.c = x;
        pts.push_back(p);
      }
      return;
    }
    for (int v = -budget; v <= budget; ++v) {
      x[static_cast<std::size_t>(axis)] = center[axis] + v;
      rec(axis + 1, budget - std::abs(v));
    }
  };
  rec(0, radius);
  return Region(std::move(pts));
}

std::int64_t sphere_count(int d, int n) {
  if (d < 1) throw std::invalid_argument("sphere_count: d >= 1 required");
  if (n < 0) throw std::invalid_argument("sphere_count: n >= 0 required");
  if (n == 0) return 1;
  auto binom = [](int a, int b) -> std::int64_t {
    if (b < 0 || b > a) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  const int k0 = (n < d) ? d - n : 0;
  std::int64_t s = 0;
  for (int k = k0; k <= d - 1; ++k) {
    s += (std::int64_t{1} << (d - k)) * binom(d, k) * binom(n - 1, d - k - 1);
  }
  return s;
}

namespace {

std::vector<Point> neighbors(const Point& p) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(2 * p.dim));
  for (int i = 0; i < p.dim; ++i) {
    for (int s : {-1, +1}) {
      Point q = p;
      q[i] += s;
      out.push_back(q);
    }
  }
  return out;
}

}  // namespace

std::vector<Region> connected_components(const Region& r) {
  std::vector<Region> components;
  std::vector<char> seen(r.size(), 0);
  for (std::size_t start = 0; start < r.size(); ++start) {
    if (seen[start]) continue;
    std::vector<Point> comp;
    std::queue<std::size_t> queue;
    queue.push(start);
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop();
      comp.push_back(r[i]);
      for (const Point& q : neighbors(r[i])) {
        const std::ptrdiff_t j = r.index_of(q);
        if (j >= 0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          queue.push(static_cast<std::size_t>(j));
        }
      }
    }
    components.emplace_back(std::move(comp));
  }
  std::sort(components.begin(), components.end(),
            [](const Region& a, const Region& b) { return a[0] < b[0]; });
  return components;
}

Boundaries boundaries(const Region& r) {
  Boundaries out{Region{}, 0};
  std::vector<Point> inner;
  for (const Point& p : r) {
    bool is_inner = false;
    for (const Point& q : neighbors(p)) {
      if (!r.contains(q)) {
        is_inner = true;
        ++out.edge_count;
      }
    }
    if (is_inner) inner.push_back(p);
  }
  out.inner = Region(std::move(inner));
  return out;
}

RegionDecomposition decompose(const Region& r, int bounding_margin) {
  if (bounding_margin < 1) throw std::invalid_argument("decompose: margin >= 1 required");
  RegionDecomposition out;
  if (r.empty()) {
    out.volume = r;
    return out;
  }
  const int d = r.dim();
  Point lo = r[0], hi = r[0];
  for (const Point& p : r) {
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  for (int i = 0; i < d; ++i) {
    lo[i] -= bounding_margin;
    hi[i] += bounding_margin;
  }
  const Region box = Region::box(lo, hi);
  const Region complement = region_difference(box, r);
  auto touches_border = [&](const Region& comp) {
    for (const Point& p : comp) {
      for (int i = 0; i < d; ++i) {
        if (p[i] == lo[i] || p[i] == hi[i]) return true;
      }
    }
    return false;
  };
  std::vector<Point> interior_pts;
  for (const Region& comp : connected_components(complement)) {
    if (!touches_border(comp)) {
      for (const Point& p : comp) interior_pts.push_back(p);
      out.interior_components.push_back(comp);
    }
  }
  out.interior = Region(std::move(interior_pts));
  out.volume = region_union(r, out.interior);
  return out;
}

int diameter(const Region& r) {
  if (r.empty()) throw std::invalid_argument("diameter: empty region");
  const int d = r.dim();
  // l1 diameter via signed projections: max over sign patterns s of
  // (max - min) of sum_i s_i x_i; O(n 2^{d-1})
  int best = 0;
  for (int mask = 0; mask < (1 << (d - 1)); ++mask) {
    long maxv = std::numeric_limits<long>::min();
    long minv = std::numeric_limits<long>::max();
    for (const Point& p : r) {
      long v = p[0];
      for (int i = 1; i < d; ++i) v += ((mask >> (i - 1)) & 1) ? -p[i] : p[i];
      maxv = std::max(maxv, v);
      minv = std::min(minv, v);
    }
    best = std::max(best, static_cast<int>(maxv - minv));
  }
  return best;
}

}  // namespace stoqlab::lattice
