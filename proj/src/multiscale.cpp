#include "stoqlab/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <stdexcept>

namespace stoqlab::multiscale {

void cube_bounds(const Cube& c, Point& lo, Point& hi) {
  lo = c.center_index;
  hi = c.center_index;
  if (c.scale == 0) return;
  const int half = 1 << (c.scale - 1);
  for (int i = 0; i < c.center_index.dim; ++i) {
    lo[i] = half * c.center_index[i] - half;
    hi[i] = half * c.center_index[i] + half;
  }
}

Region cube_points(const Cube& c) {
  Point lo, hi;
  cube_bounds(c, lo, hi);
  return Region::box(lo, hi);
}

int cube_distance(const Cube& a, const Cube& b) {
  Point alo, ahi, blo, bhi;
  cube_bounds(a, alo, ahi);
  cube_bounds(b, blo, bhi);
  int dist = 0;
  for (int i = 0; i < alo.dim; ++i) {
    if (blo[i] > ahi[i])
      dist += blo[i] - ahi[i];
    else if (alo[i] > bhi[i])
      dist += alo[i] - bhi[i];
  }
  return dist;
}

bool cube_contains(const Cube& c, const Point& p) {
  Point lo, hi;
  cube_bounds(c, lo, hi);
  for (int i = 0; i < p.dim; ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

std::vector<Cube> candidate_cubes(const Region& r, int n) {
  const int d = r.dim();
  if (n == 0) {
    std::vector<Cube> out;
    for (const Point& p : r) out.push_back(Cube{0, p});
    return out;
  }
  const int half = 1 << (n - 1);
  // per axis, centers x with half*x - half <= p <= half*x + half
  std::vector<Cube> out;
  std::set<Cube> seen;
  for (const Point& p : r) {
    std::vector<std::vector<int>> ranges(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      // ceil((p-half)/half) <= x <= floor((p+half)/half)
      const int lo = static_cast<int>(std::ceil(static_cast<double>(p[i] - half) / half));
      const int hi = static_cast<int>(std::floor(static_cast<double>(p[i] + half) / half));
      for (int x = lo; x <= hi; ++x) ranges[static_cast<std::size_t>(i)].push_back(x);
    }
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Point center;
      center.dim = d;
      for (int i = 0; i < d; ++i)
        center[i] = ranges[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      seen.insert(Cube{n, center});
      int axis = d - 1;
      while (axis >= 0) {
        if (++idx[static_cast<std::size_t>(axis)] <
            static_cast<int>(ranges[static_cast<std::size_t>(axis)].size()))
          break;
        idx[static_cast<std::size_t>(axis)] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
  }
  out.assign(seen.begin(), seen.end());
  return out;
}

namespace {

std::vector<std::vector<int>> coverage_lists(const Region& r, const std::vector<Cube>& cands) {
  std::vector<std::vector<int>> covers(cands.size());
  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    for (std::size_t pi = 0; pi < r.size(); ++pi) {
      if (cube_contains(cands[ci], r[pi])) covers[ci].push_back(static_cast<int>(pi));
    }
  }
  return covers;
}

Cover greedy_cover(const Region& r, int n) {
  const std::vector<Cube> cands = candidate_cubes(r, n);
  const auto covers = coverage_lists(r, cands);
  std::vector<char> covered(r.size(), 0);
  std::size_t remaining = r.size();
  Cover out{n, {}};
  while (remaining > 0) {
    int best = -1;
    std::size_t best_gain = 0;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      std::size_t gain = 0;
      for (int pi : covers[ci])
        if (!covered[static_cast<std::size_t>(pi)]) ++gain;
      // ties resolved by canonical (lexicographic) candidate order
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(ci);
      }
    }
    if (best < 0) throw std::logic_error("greedy_cover: uncoverable point");
    out.cubes.push_back(cands[static_cast<std::size_t>(best)]);
    for (int pi : covers[static_cast<std::size_t>(best)]) {
      if (!covered[static_cast<std::size_t>(pi)]) {
        covered[static_cast<std::size_t>(pi)] = 1;
        --remaining;
      }
    }
  }
  std::sort(out.cubes.begin(), out.cubes.end());
  return out;
}

struct BnB {
  const std::vector<std::vector<int>>* covers;
  std::size_t n_points;
  std::size_t max_cover_size = 1;
  std::int64_t budget;
  std::int64_t expanded = 0;
  std::size_t best_size;
  std::vector<int> best;

  void run(std::vector<char>& covered, std::size_t n_covered, std::vector<int>& chosen) {
    if (++expanded > budget) throw std::runtime_error("minimal_cover: exact budget exceeded");
    if (n_covered == n_points) {
      if (chosen.size() < best_size) {
        best_size = chosen.size();
        best = chosen;
      }
      return;
    }
    // counting lower bound: every extra cube covers at most max_cover_size
    const std::size_t need =
        (n_points - n_covered + max_cover_size - 1) / max_cover_size;
    if (chosen.size() + need >= best_size) return;
    // branch on the first uncovered point: one of its covering cubes is used
    std::size_t target = 0;
    while (covered[target]) ++target;
    for (std::size_t ci = 0; ci < covers->size(); ++ci) {
      const auto& list = (*covers)[ci];
      if (!std::binary_search(list.begin(), list.end(), static_cast<int>(target))) continue;
      std::vector<std::size_t> newly;
      for (int pi : list) {
        if (!covered[static_cast<std::size_t>(pi)]) {
          covered[static_cast<std::size_t>(pi)] = 1;
          newly.push_back(static_cast<std::size_t>(pi));
        }
      }
      chosen.push_back(static_cast<int>(ci));
      run(covered, n_covered + newly.size(), chosen);
      chosen.pop_back();
      for (std::size_t pi : newly) covered[pi] = 0;
    }
  }
};

}  // namespace

Cover minimal_cover(const Region& r, int n, CoverMode mode, std::int64_t budget) {
  if (r.empty()) throw std::invalid_argument("minimal_cover: empty region");
  Cover greedy = greedy_cover(r, n);
  if (mode == CoverMode::kGreedy) return greedy;

  const std::vector<Cube> cands = candidate_cubes(r, n);
  const auto covers = coverage_lists(r, cands);
  BnB bnb;
  bnb.covers = &covers;
  bnb.n_points = r.size();
  for (const auto& list : covers) bnb.max_cover_size = std::max(bnb.max_cover_size, list.size());
  bnb.budget = budget;
  bnb.best_size = greedy.cubes.size();
  // greedy solution indices as the incumbent
  bnb.best.clear();
  for (const Cube& c : greedy.cubes) {
    const auto it = std::lower_bound(cands.begin(), cands.end(), c);
    bnb.best.push_back(static_cast<int>(it - cands.begin()));
  }
  std::vector<char> covered(r.size(), 0);
  std::vector<int> chosen;
  bnb.run(covered, 0, chosen);

  Cover out{n, {}};
  for (int ci : bnb.best) out.cubes.push_back(cands[static_cast<std::size_t>(ci)]);
  std::sort(out.cubes.begin(), out.cubes.end());
  return out;
}

std::vector<std::vector<int>> SimpleGraph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_vertices));
  for (auto [i, j] : edges) {
    adj[static_cast<std::size_t>(i)].push_back(j);
    adj[static_cast<std::size_t>(j)].push_back(i);
  }
  return adj;
}

bool SimpleGraph::connected() const {
  if (n_vertices == 0) return false;
  const auto adj = adjacency();
  std::vector<char> seen(static_cast<std::size_t>(n_vertices), 0);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = 1;
  int visited = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++visited;
        queue.push(w);
      }
    }
  }
  return visited == n_vertices;
}

SimpleGraph cover_graph(const Cover& c, double M, double a) {
  if (M <= 0.0 || a < 1.0) throw std::invalid_argument("cover_graph: need M > 0, a >= 1");
  SimpleGraph g;
  g.n_vertices = static_cast<int>(c.cubes.size());
  if (c.cubes.empty()) return g;
  const int d = c.cubes.front().center_index.dim;
  const double threshold = M * std::pow(static_cast<double>(d), a) * std::pow(2.0, a * c.scale);
  for (std::size_t i = 0; i < c.cubes.size(); ++i) {
    for (std::size_t j = i + 1; j < c.cubes.size(); ++j) {
      if (cube_distance(c.cubes[i], c.cubes[j]) <= threshold) {
        g.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return g;
}

std::int64_t total_volume(const Region& r, int rr) {
  if (r.empty()) throw std::invalid_argument("total_volume: empty region");
  if (rr < 1) throw std::invalid_argument("total_volume: rr >= 1 required");
  const int diam = lattice::diameter(r);
  int n_top = 0;
  if (diam > 1) {
    n_top = static_cast<int>(
        std::ceil(std::log(static_cast<double>(diam)) / (rr * std::log(2.0)) - 1e-12));
  }
  std::int64_t total = 0;
  for (int n = 0; n <= n_top; ++n) {
    total += static_cast<std::int64_t>(minimal_cover(r, rr * n).cubes.size());
  }
  return total;
}

namespace {

// deepest vertex with at least k proper descendants in the rooted tree
struct TreeCut {
  const std::vector<std::vector<int>>* children;
  std::vector<int> desc;

  int count(int v) {
    int n = 0;
    for (int w : (*children)[static_cast<std::size_t>(v)]) n += 1 + count(w);
    desc[static_cast<std::size_t>(v)] = n;
    return n;
  }
};

}  // namespace

std::vector<std::vector<int>> cover_connected_graph(const SimpleGraph& g, int k) {
  if (k < 1) throw std::invalid_argument("cover_connected_graph: k >= 1 required");
  if (g.n_vertices == 0 || !g.connected())
    throw std::invalid_argument("cover_connected_graph: connected nonempty graph required");

  // BFS spanning tree from vertex 0 (lexicographically smallest id)
  const auto adj = g.adjacency();
  std::vector<int> parent(static_cast<std::size_t>(g.n_vertices), -1);
  std::vector<int> depth(static_cast<std::size_t>(g.n_vertices), -1);
  std::vector<std::vector<int>> children(static_cast<std::size_t>(g.n_vertices));
  std::queue<int> queue;
  queue.push(0);
  depth[0] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    std::vector<int> nbrs = adj[static_cast<std::size_t>(v)];
    std::sort(nbrs.begin(), nbrs.end());
    for (int w : nbrs) {
      if (depth[static_cast<std::size_t>(w)] < 0) {
        depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(v)] + 1;
        parent[static_cast<std::size_t>(w)] = v;
        children[static_cast<std::size_t>(v)].push_back(w);
        queue.push(w);
      }
    }
  }

  std::vector<std::vector<int>> parts;
  std::vector<char> alive(static_cast<std::size_t>(g.n_vertices), 1);
  int n_alive = g.n_vertices;

  while (n_alive > 2 * k) {
    TreeCut cut;
    cut.children = &children;
    cut.desc.assign(static_cast<std::size_t>(g.n_vertices), 0);
    cut.count(0);

    int u_star = -1;
    for (int v = 0; v < g.n_vertices; ++v) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      if (cut.desc[static_cast<std::size_t>(v)] >= k) {
        if (u_star < 0 || depth[static_cast<std::size_t>(v)] > depth[static_cast<std::size_t>(u_star)])
          u_star = v;
      }
    }
    if (u_star < 0) break;  // unreachable while n_alive > 2k

    // children subtrees of u_star have < k descendants each; take a prefix
    // whose sizes sum into [k, 2k)
    std::vector<int> part{u_star};
    int taken = 0;
    std::vector<int> taken_children;
    for (int w : children[static_cast<std::size_t>(u_star)]) {
      const int a_i = cut.desc[static_cast<std::size_t>(w)] + 1;
      taken += a_i;
      taken_children.push_back(w);
      if (taken >= k) break;
    }
    // collect the chosen subtrees
    for (int w : taken_children) {
      std::queue<int> sub;
      sub.push(w);
      while (!sub.empty()) {
        const int v = sub.front();
        sub.pop();
        part.push_back(v);
        for (int x : children[static_cast<std::size_t>(v)]) sub.push(x);
      }
    }
    std::sort(part.begin(), part.end());
    parts.push_back(part);
    // remove the subtrees (keep u_star) from the tree
    for (int v : part) {
      if (v == u_star) continue;
      alive[static_cast<std::size_t>(v)] = 0;
      --n_alive;
    }
    for (int w : taken_children) {
      auto& ch = children[static_cast<std::size_t>(u_star)];
      ch.erase(std::find(ch.begin(), ch.end(), w));
    }
  }

  std::vector<int> rest;
  for (int v = 0; v < g.n_vertices; ++v)
    if (alive[static_cast<std::size_t>(v)]) rest.push_back(v);
  if (!rest.empty()) parts.push_back(rest);
  return parts;
}

std::int64_t count_subordinated(const Cover& cover_m, std::int64_t v_n, int n,
                                std::int64_t budget) {
  if (v_n <= 0) return 0;  // empty collections are not covers
  if (n > cover_m.scale) throw std::invalid_argument("count_subordinated: need n <= m");

  // candidate n-cubes: those inside the union of the m-cubes
  Region covered;
  for (const Cube& c : cover_m.cubes) covered = lattice::region_union(covered, cube_points(c));
  std::vector<Cube> cands;
  for (const Cube& c : candidate_cubes(covered, n)) {
    if (lattice::region_subset(cube_points(c), covered)) cands.push_back(c);
  }

  const std::size_t target = cover_m.cubes.size();
  std::int64_t work = 0;
  std::int64_t count = 0;
  std::vector<int> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (++work > budget) throw std::runtime_error("count_subordinated: budget exceeded");
    if (static_cast<std::int64_t>(pick.size()) == v_n) {
      Region uni;
      for (int ci : pick)
        uni = lattice::region_union(uni, cube_points(cands[static_cast<std::size_t>(ci)]));
      // cover_m must be a minimum-cardinality cover of the union
      const Cover exact = minimal_cover(uni, cover_m.scale, CoverMode::kExact, budget);
      if (exact.cubes.size() == target && lattice::region_subset(uni, covered)) ++count;
      return;
    }
    for (std::size_t ci = start; ci < cands.size(); ++ci) {
      pick.push_back(static_cast<int>(ci));
      rec(ci + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return count;
}

}  // namespace stoqlab::multiscale
