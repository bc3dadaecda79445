#include <doctest.h>

#include <cmath>

#include "stoqlab/contours.hpp"
#include "stoqlab/multiscale.hpp"
#include "stoqlab/rng.hpp"

using namespace stoqlab;
using lattice::Point;
using lattice::Region;
using multiscale::Cover;
using multiscale::CoverMode;
using multiscale::Cube;

TEST_CASE("cube points") {
  CHECK(multiscale::cube_points({0, Point{3, 3}}) == Region({Point{3, 3}}));
  CHECK(multiscale::cube_points({1, Point{0}}) == Region::box(Point{-1}, Point{1}));
  CHECK(multiscale::cube_points({2, Point{1}}) == Region::box(Point{0}, Point{4}));
  // cardinality (2^n + 1)^d
  for (int n = 1; n <= 4; ++n) {
    const auto pts = multiscale::cube_points({n, Point{1, -1}});
    CHECK(static_cast<int>(pts.size()) == (1 << n) * (1 << n) + 2 * (1 << n) + 1);
  }
}

TEST_CASE("cube distance matches the point-set distance") {
  RngStream rng(3);
  for (int rep = 0; rep < 40; ++rep) {
    const Cube a{rng.next_int(3), Point{rng.next_int(7) - 3, rng.next_int(7) - 3}};
    const Cube b{rng.next_int(3), Point{rng.next_int(7) - 3, rng.next_int(7) - 3}};
    const Region ra = multiscale::cube_points(a);
    const Region rb = multiscale::cube_points(b);
    int expected = 0;
    if (lattice::regions_disjoint(ra, rb)) expected = lattice::region_distance(ra, rb);
    CHECK(multiscale::cube_distance(a, b) == expected);
  }
}

TEST_CASE("minimal cover") {
  const Region single({Point{5, -2}});
  for (int n = 0; n <= 3; ++n) {
    CHECK(multiscale::minimal_cover(single, n).cubes.size() == 1);
    CHECK(multiscale::minimal_cover(single, n, CoverMode::kExact).cubes.size() == 1);
  }
  // {0..4} in Z at scale 1 (width-3 cubes): two cubes needed
  const Region segment = Region::box(Point{0}, Point{4});
  CHECK(multiscale::minimal_cover(segment, 1, CoverMode::kExact).cubes.size() == 2);
  CHECK(multiscale::minimal_cover(segment, 1).cubes.size() == 2);
  // region inside one cube
  const Region small = Region::box(Point{0, 0}, Point{1, 1});
  CHECK(multiscale::minimal_cover(small, 2).cubes.size() == 1);
  CHECK(multiscale::minimal_cover(small, 2, CoverMode::kExact).cubes.size() == 1);

  // greedy stays within the classic ratio of the exact optimum
  RngStream rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Point> pts;
    for (int k = 0; k < 14; ++k) pts.push_back(Point{rng.next_int(12), rng.next_int(12)});
    const Region r(std::move(pts));
    if (r.empty()) continue;
    const auto greedy = multiscale::minimal_cover(r, 1);
    const auto exact = multiscale::minimal_cover(r, 1, CoverMode::kExact);
    CHECK(greedy.cubes.size() >= exact.cubes.size());
    CHECK(static_cast<double>(greedy.cubes.size()) <=
          (1.0 + std::log(static_cast<double>(r.size()))) *
              static_cast<double>(exact.cubes.size()));
    // covers actually cover
    for (const auto& cover : {greedy, exact}) {
      Region covered;
      for (const auto& cube : cover.cubes)
        covered = lattice::region_union(covered, multiscale::cube_points(cube));
      CHECK(lattice::region_subset(r, covered));
    }
  }
}

TEST_CASE("cover graph edges") {
  Cover c;
  c.scale = 0;
  c.cubes = {{0, Point{0, 0}}};
  CHECK(multiscale::cover_graph(c, 1.0, 2.0).edges.empty());
  c.cubes.push_back({0, Point{1, 0}});
  CHECK(multiscale::cover_graph(c, 1.0, 1.0).edges.size() == 1);  // threshold M d^a = 2 >= 1
  c.cubes = {{0, Point{0, 0}}, {0, Point{9, 0}}};
  CHECK(multiscale::cover_graph(c, 1.0, 1.0).edges.empty());
}

TEST_CASE("total volume") {
  CHECK(multiscale::total_volume(Region({Point{3}}), 1) == 1);
  // diam <= 1 stops at scale zero, so a two-point segment counts its points
  CHECK(multiscale::total_volume(Region({Point{0}, Point{1}}), 1) == 2);
  // first nondegenerate case: diam 2 reaches scale one, where a single
  // width-3 cube covers the segment
  CHECK(multiscale::total_volume(Region::box(Point{0}, Point{2}), 1) == 4);
  RngStream rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Point> pts;
    for (int k = 0; k < 10; ++k) pts.push_back(Point{rng.next_int(9), rng.next_int(9)});
    const Region r(std::move(pts));
    CHECK(multiscale::total_volume(r, 2) >= static_cast<std::int64_t>(r.size()));
  }
}

TEST_CASE("tree covering of connected graphs") {
  multiscale::SimpleGraph single;
  single.n_vertices = 1;
  CHECK(multiscale::cover_connected_graph(single, 3) ==
        std::vector<std::vector<int>>{{0}});

  multiscale::SimpleGraph path;
  path.n_vertices = 4;
  path.edges = {{0, 1}, {1, 2}, {2, 3}};
  const auto parts = multiscale::cover_connected_graph(path, 2);
  CHECK(parts.size() <= 2);
  for (const auto& p : parts) CHECK(p.size() <= 4);

  multiscale::SimpleGraph star;
  star.n_vertices = 6;
  star.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
  const auto star_parts = multiscale::cover_connected_graph(star, 2);
  CHECK(star_parts.size() <= 3);
  std::vector<char> covered(6, 0);
  for (const auto& p : star_parts) {
    CHECK(p.size() <= 4);
    for (int v : p) covered[static_cast<std::size_t>(v)] = 1;
  }
  for (char c : covered) CHECK(c == 1);

  CHECK_THROWS(multiscale::cover_connected_graph(multiscale::SimpleGraph{}, 2));
}

TEST_CASE("subordinated counting") {
  // v_n = 0 is not a cover by convention
  Cover cm;
  cm.scale = 2;
  cm.cubes = {{2, Point{0}}};
  CHECK(multiscale::count_subordinated(cm, 0, 1) == 0);
  // single scale-m cube, v_n = 1: all placements of an n-cube inside it,
  // which is 2^{m-n+1} - 1 per axis in d = 1
  CHECK(multiscale::count_subordinated(cm, 1, 1) == (1 << 2) - 1);
  const double c = contours::constants::subordinated_c(1, 1);
  CHECK(static_cast<double>(multiscale::count_subordinated(cm, 1, 1)) <= std::exp(c * 1));
  CHECK(static_cast<double>(multiscale::count_subordinated(cm, 2, 1)) <= std::exp(c * 2));
}
