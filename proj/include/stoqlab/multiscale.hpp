#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stoqlab/lattice.hpp"

namespace stoqlab::multiscale {

using lattice::Point;
using lattice::Region;

// Dyadic cube of scale n: the single point x for n = 0, otherwise the box
// prod_i [2^{n-1}x_i - 2^{n-1}, 2^{n-1}x_i + 2^{n-1}] with side length 2^n.
struct Cube {
  int scale = 0;
  Point center_index;

  friend bool operator==(const Cube& a, const Cube& b) {
    return a.scale == b.scale && a.center_index == b.center_index;
  }
  friend bool operator<(const Cube& a, const Cube& b) {
    if (a.scale != b.scale) return a.scale < b.scale;
    return a.center_index < b.center_index;
  }
};

Region cube_points(const Cube& c);
// lo/hi corners without materializing the point set
void cube_bounds(const Cube& c, Point& lo, Point& hi);
// l1 set distance between two cubes of equal dimension, O(d)
int cube_distance(const Cube& a, const Cube& b);
bool cube_contains(const Cube& c, const Point& p);

struct Cover {
  int scale = 0;
  std::vector<Cube> cubes;
};

enum class CoverMode { kGreedy, kExact };

// Cover of r by scale-n cubes. Greedy: deterministic greedy set cover over
// the candidate cubes meeting r, ties broken by lexicographically smallest
// center. Exact: provably minimum cardinality by branch and bound, subject to
// a node-expansion budget.
Cover minimal_cover(const Region& r, int n, CoverMode mode = CoverMode::kGreedy,
                    std::int64_t budget = 30'000'000);

// all scale-n cubes with at least one point in r, canonically ordered
std::vector<Cube> candidate_cubes(const Region& r, int n);

struct SimpleGraph {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, no duplicates

  std::vector<std::vector<int>> adjacency() const;
  bool connected() const;
};

// Vertices are the cover's cubes; an edge joins cubes at set distance at most
// M d^a 2^{a n}, n the cover scale.
SimpleGraph cover_graph(const Cover& c, double M, double a);

// V_r(Lambda) = sum of greedy-minimal cover sizes at scales 0, rr, 2rr, ...,
// up to n_r = ceil(log_{2^rr} diam); n_r := 0 when diam <= 1.
std::int64_t total_volume(const Region& r, int rr);

// Covers a connected graph by at most ceil(|v|/k) connected vertex sets of
// size at most 2k, by repeatedly cutting a spanning tree at the deepest
// vertex with at least k proper descendants.
std::vector<std::vector<int>> cover_connected_graph(const SimpleGraph& g, int k);

// Exact count of scale-n cube collections of size v_n subordinated to
// cover_m (cover_m is a minimum-cardinality cover of their union). Empty
// collections do not count as covers, so v_n = 0 yields 0. Brute force with
// a work budget; throws when the budget is exceeded.
std::int64_t count_subordinated(const Cover& cover_m, std::int64_t v_n, int n,
                                std::int64_t budget = 5'000'000);

}  // namespace stoqlab::multiscale
