#include "stoqlab/contours.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace stoqlab::contours {

namespace constants {

double riemann_zeta(double s) {
  if (s <= 1.0) throw std::invalid_argument("riemann_zeta: s > 1 required");
  // Euler-Maclaurin with N = 4096 base terms
  const int N = 4096;
  double sum = 0.0;
  for (int n = 1; n < N; ++n) sum += std::pow(n, -s);
  const double Nd = N;
  sum += std::pow(Nd, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(Nd, -s) +
         s / 12.0 * std::pow(Nd, -s - 1.0);
  return sum;
}

// Lower sphere-count constant. The binomial chain in the proof gives
// 2 C(n+d-1, d-1) >= 2 n^{d-1} / (d-1)^{d-1}; the exponent sign matters for
// d >= 3 (s_3(1) = 6 already refutes the 2 (d-1)^{d-1} variant).
double c_d(int d) { return d == 1 ? 2.0 : 2.0 * std::pow(d - 1, -(d - 1)); }

double k_d(int d) {
  const double e = std::exp(1.0);
  return std::pow(e * d, 1.0 / d) / (2.0 * (2.0 * e + 1.0));
}

double lattice_sum(int d, double alpha) {
  if (alpha <= d) throw std::invalid_argument("lattice_sum: alpha > d required");
  const int N = 100000;
  double sum = 0.0;
  for (int n = 1; n <= N; ++n)
    sum += static_cast<double>(lattice::sphere_count(d, n)) * std::pow(n, -alpha);
  // tail via the sphere upper bound and an integral
  const double e = std::exp(1.0);
  sum += std::exp(-1.0) * std::pow(2.0 * e + 1.0, d) * std::pow(N, d - alpha) / (alpha - d);
  return sum;
}

double subordinated_c(int d, int r) {
  return (2.0 * d + 1.0) * std::log(2.0) + d * std::log(std::pow(2.0, r + 1) - 1.0);
}

double volume_count_b(int d, int r) {
  return d * std::log(3.0) + std::log(2.0) + subordinated_c(d, r) + 1.0;
}

double contour_count_c1(int d, double M, double a, int r) {
  if (d < 2) throw std::invalid_argument("contour_count_c1: d >= 2 required");
  return 2.0 * volume_count_b(d, r) * kappa(d, M, a, r) + 1.0 + 1.0 / (d - 1.0);
}

double kappa(int d, double M, double a, int r) {
  if (a <= 1.0) throw std::invalid_argument("kappa: a > 1 required");
  const double log_r = r * std::log(2.0);
  const double log2Mda = std::log(2.0 * M * std::pow(d, a)) / log_r;
  const double n0 = (a + 2.0 + log2Mda) / (a - 1.0);
  const double expo = (r - d - 1.0) / std::log2(a);
  if (expo <= 1.0) throw std::invalid_argument("kappa: r too small for this a");
  const double first =
      n0 + 1.0 + std::pow(2.0, 2.0 * (r - d - 1.0)) * std::pow(n0, expo) * (2.0 + log2Mda);
  const double second =
      n0 + 1.0 + std::pow(2.0, r - d - 1.0) * std::pow(n0, expo) * riemann_zeta(expo);
  return std::max(first, second);
}

double k_alpha_1(int d, double alpha, double J, double a, int r) {
  const double e = std::exp(1.0);
  const double two_r = std::pow(2.0, r) - 1.0;
  const double first = J * std::exp(-1.0) * std::pow(2.0 * e + 1.0, d - 1) * two_r /
                       ((alpha - d) * std::pow(k_d(d), a * (alpha - d)));
  const double second =
      3.0 * std::pow(two_r, d + 1) * std::pow(2.0, d) * riemann_zeta(a - d) / std::pow(k_d(d), d);
  return std::max(first, second);
}

double threshold_M(int d, double alpha, double J, double a, int r) {
  const double ka1 = k_alpha_1(d, alpha, J, a, r);
  const double c_alpha = lattice_sum(d, alpha);
  const double geometric = std::pow(std::pow(2.0, r) - 1.0, d + 1) / std::pow(k_d(d), d);
  const double m1 = std::pow(12.0 * (2.0 * d + 1.0) * std::pow(2.0 * d, d / (d - 1.0)) * ka1 *
                                 std::pow(2.0, alpha + 1.0) / (J * c_alpha),
                             1.0 / (alpha - d));
  const double m2 =
      std::pow((2.0 * d + 1.0) * ka1 * std::pow(2.0, alpha + 4.0), 1.0 / std::min(alpha - d, 1.0));
  return std::max(geometric, std::max(m1, m2));
}

double gap_c2(int d, double alpha, double J, double M, double a, int r) {
  const double ka1 = k_alpha_1(d, alpha, J, a, r);
  return J * lattice_sum(d, alpha) / ((2.0 * d + 1.0) * std::pow(2.0, alpha)) -
         6.0 * std::pow(2.0 * d, d / (d - 1.0)) * ka1 / std::pow(M, alpha - d);
}

double gap_c3(int d, double alpha, double J, double M, double a, int r) {
  const double ka1 = k_alpha_1(d, alpha, J, a, r);
  return 2.0 * (1.0 / ((2.0 * d + 1.0) * std::pow(2.0, alpha + 1.0)) - 4.0 * ka1 / M);
}

double gap_c4(int d, double alpha, double J, double M, double a, int r) {
  const double ka1 = k_alpha_1(d, alpha, J, a, r);
  return 1.0 / ((2.0 * d + 1.0) * std::pow(2.0, alpha + 1.0)) -
         2.0 * ka1 / std::pow(M, std::min(alpha - d, 1.0));
}

double field_c5(int d, double delta, double h_star) {
  if (delta >= d) throw std::invalid_argument("field_c5: delta < d required");
  const double e = std::exp(1.0);
  return h_star * std::exp(-1.0) * std::pow(2.0 * e + 1.0, d) / (d - delta) *
         std::pow(std::pow(d / c_d(d), 1.0 / d) + 2.0, d - delta);
}

double surface_K_alpha(double J, double alpha, int d) {
  const double c = std::pow(c_d(d), 1.0 + alpha - d) / ((alpha - d) * std::pow(d, alpha - d));
  return J * std::min(1.0, c);
}

}  // namespace constants

PartitionParams PartitionParams::defaults(int d, double alpha, double epsilon, double J) {
  PartitionParams p;
  p.a = std::max((d + 1.0 + epsilon) / (alpha - d), d + 1.0 + epsilon);
  p.r = static_cast<int>(std::ceil(std::log2(p.a + 1.0))) + d + 1;
  p.M = constants::threshold_M(d, alpha, J, p.a, p.r);
  return p;
}

SpinConfig SpinConfig::constant(Region domain, std::int8_t value, std::int8_t outside) {
  SpinConfig s;
  s.values.assign(domain.size(), value);
  s.domain = std::move(domain);
  s.outside = outside;
  return s;
}

int SpinConfig::at(const Point& p) const {
  const std::ptrdiff_t i = domain.index_of(p);
  return i < 0 ? outside : values[static_cast<std::size_t>(i)];
}

SpinConfig SpinConfig::with_value(const Point& p, std::int8_t v) const {
  const std::ptrdiff_t i = domain.index_of(p);
  if (i < 0) throw std::invalid_argument("SpinConfig::with_value: point outside domain");
  SpinConfig s = *this;
  s.values[static_cast<std::size_t>(i)] = v;
  return s;
}

Region boundary(const SpinConfig& sigma) {
  // incorrect points live within distance 1 of a spin deviating from the
  // outside value
  std::vector<Point> candidates;
  for (std::size_t i = 0; i < sigma.domain.size(); ++i) {
    if (sigma.values[i] == sigma.outside) continue;
    for (const Point& q : lattice::ball(sigma.domain[i], 1)) candidates.push_back(q);
  }
  Region cand(std::move(candidates));
  std::vector<Point> incorrect;
  for (const Point& x : cand) {
    const int v0 = sigma.at(x);
    bool constant = true;
    for (const Point& y : lattice::ball(x, 1)) {
      if (sigma.at(y) != v0) {
        constant = false;
        break;
      }
    }
    if (!constant) incorrect.push_back(x);
  }
  return Region(std::move(incorrect));
}

std::vector<PartitionPart> build_partition(const SpinConfig& sigma, const PartitionParams& p) {
  return build_partition(boundary(sigma), p);
}

std::vector<PartitionPart> build_partition(const Region& bdry, const PartitionParams& p) {
  std::vector<PartitionPart> parts;
  if (bdry.empty()) return parts;
  Region rem = bdry;
  const int guard =
      static_cast<int>(std::ceil(std::log2(std::max(2, lattice::diameter(bdry))))) + p.r + 8;
  int scale = 0;
  while (!rem.empty()) {
    if (scale > guard) throw std::logic_error("build_partition: scale guard exceeded");
    const multiscale::Cover cov = multiscale::minimal_cover(rem, scale);
    const multiscale::SimpleGraph g = multiscale::cover_graph(cov, p.M, p.a);
    // connected components of the cover graph
    const auto adj = g.adjacency();
    std::vector<int> comp(cov.cubes.size(), -1);
    int n_comp = 0;
    for (std::size_t v = 0; v < cov.cubes.size(); ++v) {
      if (comp[v] >= 0) continue;
      std::vector<std::size_t> stack{v};
      comp[v] = n_comp;
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (int w : adj[u]) {
          if (comp[static_cast<std::size_t>(w)] < 0) {
            comp[static_cast<std::size_t>(w)] = n_comp;
            stack.push_back(static_cast<std::size_t>(w));
          }
        }
      }
      ++n_comp;
    }
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(n_comp));
    for (std::size_t v = 0; v < cov.cubes.size(); ++v)
      groups[static_cast<std::size_t>(comp[v])].push_back(v);

    Region extracted;
    for (const auto& group : groups) {
      if (static_cast<int>(group.size()) > p.max_family_size()) continue;
      PartitionPart part;
      part.birth_scale = scale;
      for (std::size_t v : group) {
        const Region piece =
            lattice::region_intersection(rem, multiscale::cube_points(cov.cubes[v]));
        if (piece.empty()) continue;
        part.subfamily.push_back(piece);
        part.support = lattice::region_union(part.support, piece);
      }
      if (part.support.empty()) continue;
      extracted = lattice::region_union(extracted, part.support);
      parts.push_back(std::move(part));
    }
    rem = lattice::region_difference(rem, extracted);
    ++scale;
  }
  return parts;
}

namespace {

int family_max_diameter(const PartitionPart& part) {
  int m = 0;
  for (const Region& g : part.subfamily) m = std::max(m, lattice::diameter(g));
  return m;
}

}  // namespace

CheckReport check_partition(const std::vector<PartitionPart>& parts, const Region& bdry,
                            const PartitionParams& p) {
  CheckReport report;
  Region covered;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const PartitionPart& part = parts[i];
    if (part.support.empty()) report.fail("part " + std::to_string(i) + ": empty support");
    if (!lattice::regions_disjoint(covered, part.support))
      report.fail("condition A: parts " + std::to_string(i) + " overlap earlier parts");
    covered = lattice::region_union(covered, part.support);
    if (part.subfamily.empty() ||
        static_cast<int>(part.subfamily.size()) > p.max_family_size()) {
      report.fail("condition B.1: part " + std::to_string(i) + " family size " +
                  std::to_string(part.subfamily.size()));
    }
    Region fam_union;
    for (const Region& g : part.subfamily) fam_union = lattice::region_union(fam_union, g);
    if (!(fam_union == part.support))
      report.fail("condition B.1: part " + std::to_string(i) + " family does not union to support");
  }
  if (!(covered == bdry)) report.fail("condition A: union of parts differs from the boundary");

  // containment in a single complement component, against decompose()
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const lattice::RegionDecomposition dec = lattice::decompose(parts[i].support);
    for (std::size_t j = 0; j < parts.size(); ++j) {
      if (i == j) continue;
      const Region& other = parts[j].support;
      int hits = 0;
      bool contained = false;
      for (const Region& comp : dec.interior_components) {
        if (!lattice::regions_disjoint(comp, other)) {
          ++hits;
          contained = lattice::region_subset(other, comp);
        }
      }
      // zero hits means the whole of `other` sits in the unbounded component
      if (hits > 1 || (hits == 1 && !contained)) {
        report.fail("condition A: part " + std::to_string(j) +
                    " straddles complement components of part " + std::to_string(i));
      }
    }
  }

  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      if (parts[i].support.empty() || parts[j].support.empty()) continue;
      const int dist = lattice::region_distance(parts[i].support, parts[j].support);
      const int min_diam = std::min(family_max_diameter(parts[i]), family_max_diameter(parts[j]));
      const double rhs = p.M * std::pow(static_cast<double>(min_diam), p.a);
      if (!(static_cast<double>(dist) > rhs)) {
        report.fail("condition B.2: parts " + std::to_string(i) + "," + std::to_string(j) +
                    " at distance " + std::to_string(dist) + " vs bound " + std::to_string(rhs));
      }
    }
  }
  return report;
}

std::vector<PartitionPart> intersect_partitions(const std::vector<PartitionPart>& g1,
                                                const std::vector<PartitionPart>& g2,
                                                const PartitionParams& p) {
  (void)p;
  Region u1, u2;
  for (const auto& part : g1) u1 = lattice::region_union(u1, part.support);
  for (const auto& part : g2) u2 = lattice::region_union(u2, part.support);
  if (!(u1 == u2)) throw std::invalid_argument("intersect_partitions: different boundaries");

  auto restricted = [](const PartitionPart& from, const Region& target) {
    std::vector<Region> fam;
    for (const Region& g : from.subfamily) {
      Region piece = lattice::region_intersection(g, target);
      if (!piece.empty()) fam.push_back(std::move(piece));
    }
    return fam;
  };

  std::vector<PartitionPart> out;
  for (const auto& a : g1) {
    for (const auto& b : g2) {
      Region meet = lattice::region_intersection(a.support, b.support);
      if (meet.empty()) continue;
      PartitionPart part;
      part.birth_scale = std::min(a.birth_scale, b.birth_scale);
      part.support = std::move(meet);
      // keep whichever restricted family has the smaller max diameter; the
      // distance bound then holds for pairs sharing either source part
      std::vector<Region> fa = restricted(a, part.support);
      std::vector<Region> fb = restricted(b, part.support);
      auto max_diam = [](const std::vector<Region>& fam) {
        int m = 0;
        for (const Region& g : fam) m = std::max(m, lattice::diameter(g));
        return m;
      };
      part.subfamily = (max_diam(fa) <= max_diam(fb)) ? std::move(fa) : std::move(fb);
      out.push_back(std::move(part));
    }
  }
  return out;
}

namespace {

// sign of sigma on the inner boundary of the filled set; throws on
// non-constancy, which would contradict the label lemma
int constant_sign_on(const SpinConfig& sigma, const Region& pts, const char* what) {
  if (pts.empty()) throw std::logic_error(std::string("label_contours: empty ") + what);
  const int v0 = sigma.at(pts[0]);
  for (const Point& p : pts) {
    if (sigma.at(p) != v0)
      throw std::runtime_error(std::string("label_contours: sigma not constant on ") + what);
  }
  return v0;
}

}  // namespace

std::vector<Contour> label_contours(const SpinConfig& sigma,
                                    const std::vector<PartitionPart>& parts) {
  std::vector<Contour> out;
  for (const PartitionPart& part : parts) {
    Contour contour;
    contour.part = part;
    const lattice::RegionDecomposition dec = lattice::decompose(part.support);
    contour.volume = dec.volume;
    contour.exterior_label =
        constant_sign_on(sigma, lattice::boundaries(dec.volume).inner, "inner boundary of V");
    std::vector<Point> plus, minus;
    for (const Region& comp : dec.interior_components) {
      const lattice::RegionDecomposition comp_dec = lattice::decompose(comp);
      const int label =
          constant_sign_on(sigma, lattice::boundaries(comp_dec.volume).inner,
                           "inner boundary of an interior component");
      contour.interior_labels.push_back(label);
      auto& bucket = (label > 0) ? plus : minus;
      for (const Point& p : comp) bucket.push_back(p);
    }
    contour.interior_plus = Region(std::move(plus));
    contour.interior_minus = Region(std::move(minus));
    out.push_back(std::move(contour));
  }
  return out;
}

std::vector<std::size_t> external_indices(const std::vector<Contour>& family) {
  // external connected components of each support
  std::vector<std::vector<Region>> ext_comps(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto comps = lattice::connected_components(family[i].support());
    std::vector<Region> volumes;
    volumes.reserve(comps.size());
    for (const Region& c : comps) volumes.push_back(lattice::decompose(c).volume);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      bool external = true;
      for (std::size_t k2 = 0; k2 < comps.size(); ++k2) {
        if (k2 == k) continue;
        if (!lattice::regions_disjoint(volumes[k2], volumes[k]) &&
            !lattice::region_subset(volumes[k2], volumes[k])) {
          external = false;
          break;
        }
      }
      if (external) ext_comps[i].push_back(comps[k]);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    bool is_external = true;
    for (std::size_t j = 0; j < family.size() && is_external; ++j) {
      if (i == j) continue;
      for (const Region& c : ext_comps[i]) {
        if (lattice::region_subset(c, family[j].volume)) {
          is_external = false;
          break;
        }
      }
    }
    if (is_external) out.push_back(i);
  }
  return out;
}

SpinConfig erase_contours(const SpinConfig& sigma, const std::vector<Contour>& chosen) {
  SpinConfig tau = sigma;
  Region support, iplus;
  for (const Contour& c : chosen) {
    support = lattice::region_union(support, c.support());
    iplus = lattice::region_union(iplus, c.interior_plus);
  }
  for (std::size_t i = 0; i < tau.domain.size(); ++i) {
    const Point& p = tau.domain[i];
    if (support.contains(p))
      tau.values[i] = -1;
    else if (iplus.contains(p))
      tau.values[i] = static_cast<std::int8_t>(-tau.values[i]);
  }
  return tau;
}

std::vector<Region> enumerate_contours_at_origin(int m, const Region& box,
                                                 const PartitionParams& p, std::int64_t budget) {
  if (m < 0) throw std::invalid_argument("enumerate_contours_at_origin: m >= 0 required");
  std::vector<Region> out;
  if (m == 0) return out;
  const std::size_t n = box.size();
  if (n > 62 || (std::int64_t{1} << n) > budget)
    throw std::runtime_error("enumerate_contours_at_origin: budget exceeded");
  Point origin;
  origin.dim = box.dim();
  std::set<std::vector<Point>> seen;
  for (std::int64_t mask = 0; mask < (std::int64_t{1} << n); ++mask) {
    SpinConfig sigma = SpinConfig::constant(box, -1, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1) sigma.values[i] = +1;
    }
    const Region bdry = boundary(sigma);
    if (bdry.empty()) continue;
    const auto parts = build_partition(bdry, p);
    const auto family = label_contours(sigma, parts);
    for (std::size_t idx : external_indices(family)) {
      const Contour& c = family[idx];
      if (c.exterior_label == -1 && c.size() == m && c.volume.contains(origin)) {
        seen.insert(c.support().points());
      }
    }
  }
  for (const auto& pts : seen) out.emplace_back(pts);
  return out;
}

std::vector<std::vector<PartitionPart>> enumerate_partitions(const Region& bdry,
                                                             const PartitionParams& p,
                                                             std::int64_t budget) {
  const std::size_t n = bdry.size();
  std::vector<std::vector<PartitionPart>> valid;
  if (n == 0) return valid;
  std::vector<int> assign(n, 0);
  std::int64_t work = 0;

  auto harvest = [&](int n_blocks) {
    std::vector<PartitionPart> parts(static_cast<std::size_t>(n_blocks));
    std::vector<std::vector<Point>> blocks(static_cast<std::size_t>(n_blocks));
    for (std::size_t i = 0; i < n; ++i)
      blocks[static_cast<std::size_t>(assign[i])].push_back(bdry[i]);
    for (int b = 0; b < n_blocks; ++b) {
      PartitionPart& part = parts[static_cast<std::size_t>(b)];
      part.support = Region(blocks[static_cast<std::size_t>(b)]);
      if (p.r == 1) {
        part.subfamily = {part.support};
      } else if (static_cast<int>(part.support.size()) <= p.max_family_size()) {
        for (const Point& q : part.support) part.subfamily.push_back(Region({q}));
      } else {
        return;  // no exact family choice attempted for oversized blocks
      }
    }
    if (check_partition(parts, bdry, p).pass) valid.push_back(std::move(parts));
  };

  // restricted-growth enumeration of set partitions
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int n_blocks) {
    if (++work > budget) throw std::runtime_error("enumerate_partitions: budget exceeded");
    if (i == n) {
      harvest(n_blocks);
      return;
    }
    for (int b = 0; b <= n_blocks; ++b) {
      assign[i] = b;
      rec(i + 1, std::max(n_blocks, b + 1));
    }
  };
  rec(0, 0);
  return valid;
}

}  // namespace stoqlab::contours
