#include "stoqlab/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "stoqlab/parallel.hpp"

namespace stoqlab::ising {

double CouplingSpec::at(const Point& x, const Point& y) const {
  const int dist = lattice::l1_distance(x, y);
  if (dist == 0) return 0.0;
  if (nearest_neighbor) return dist == 1 ? J : 0.0;
  return J / std::pow(static_cast<double>(dist), alpha);
}

double FieldSpec::at(const Point& x) const {
  Point origin;
  origin.dim = x.dim;
  const int dist = lattice::l1_distance(x, origin);
  if (static_cast<double>(dist) < truncation_R) return 0.0;
  if (dist == 0) return h_star;
  return h_star / std::pow(static_cast<double>(dist), delta);
}

System::System(Region box, int outside_spin, CouplingSpec cs, FieldSpec fs, int cutoff)
    : box_(std::move(box)), outside_(outside_spin), cs_(cs), fs_(fs), cutoff_(cutoff),
      n_(box_.size()) {
  pair_.assign(n_ * n_, 0.0);
  neighbors_.resize(n_);
  boundary_.assign(n_, 0.0);
  field_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const double coupling = cs_.at(box_[i], box_[j]);
      pair_[i * n_ + j] = coupling;
      if (coupling != 0.0) neighbors_[i].push_back({static_cast<int>(j), coupling});
    }
    field_[i] = fs_.at(box_[i]);
    double s = 0.0;
    for (const Point& y : lattice::ball(box_[i], cs_.nearest_neighbor ? 1 : cutoff_)) {
      if (!box_.contains(y)) s += cs_.at(box_[i], y);
    }
    boundary_[i] = s;
  }
  if (cs_.nearest_neighbor) {
    tail_per_site_ = 0.0;
  } else {
    const int d = box_.empty() ? 1 : box_.dim();
    const double e = std::exp(1.0);
    tail_per_site_ = cs_.J * std::exp(-1.0) * std::pow(2.0 * e + 1.0, d) *
                     std::pow(static_cast<double>(cutoff_), d - cs_.alpha) / (cs_.alpha - d);
  }
}

double System::energy(const SpinConfig& sigma) const {
  std::vector<std::int8_t> spins(n_);
  for (std::size_t i = 0; i < n_; ++i) spins[i] = static_cast<std::int8_t>(sigma.at(box_[i]));
  return energy_state(spins);
}

double System::energy_state(const std::vector<std::int8_t>& spins) const {
  double h = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double si = spins[i];
    for (const auto& [j, coupling] : neighbors_[i]) {
      if (static_cast<std::size_t>(j) > i) h -= coupling * si * spins[static_cast<std::size_t>(j)];
    }
    h -= si * (static_cast<double>(outside_) * boundary_[i] + field_[i]);
  }
  return h;
}

double System::flip_delta_state(const std::vector<std::int8_t>& spins, std::size_t i) const {
  double local = static_cast<double>(outside_) * boundary_[i] + field_[i];
  for (const auto& [j, coupling] : neighbors_[i]) {
    local += coupling * spins[static_cast<std::size_t>(j)];
  }
  return 2.0 * static_cast<double>(spins[i]) * local;
}

double System::energy_mask(std::uint64_t mask) const {
  double h = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double si = ((mask >> i) & 1) ? 1.0 : -1.0;
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double sj = ((mask >> j) & 1) ? 1.0 : -1.0;
      h -= pair_[i * n_ + j] * si * sj;
    }
    h -= si * (static_cast<double>(outside_) * boundary_[i] + field_[i]);
  }
  return h;
}

double System::flip_delta(std::uint64_t mask, std::size_t i) const {
  const double si = ((mask >> i) & 1) ? 1.0 : -1.0;
  double local = static_cast<double>(outside_) * boundary_[i] + field_[i];
  for (std::size_t j = 0; j < n_; ++j) {
    if (j == i) continue;
    local += pair_[i * n_ + j] * (((mask >> j) & 1) ? 1.0 : -1.0);
  }
  return 2.0 * si * local;
}

double hamiltonian(const SpinConfig& sigma, int omega_outside, const CouplingSpec& cs,
                   const FieldSpec& fs, int cutoff) {
  System sys(sigma.domain, omega_outside, cs, fs, cutoff);
  return sys.energy(sigma);
}

EnergyBracket surface_energy(const Region& r, const CouplingSpec& cs, int cutoff) {
  EnergyBracket out;
  if (r.empty()) return out;
  System sys(r, +1, cs, FieldSpec{}, cutoff);
  for (std::size_t i = 0; i < r.size(); ++i) out.lower += sys.boundary_sum(i);
  out.upper = out.lower + static_cast<double>(r.size()) * sys.tail_bound_per_site();
  return out;
}

double field_sum(const Region& r, const FieldSpec& fs) {
  double s = 0.0;
  for (const Point& p : r) s += fs.at(p);
  return s;
}

bool field_bound_check(const Region& r, const FieldSpec& fs) {
  if (r.empty()) return true;
  const int d = r.dim();
  const double c5 = contours::constants::field_c5(d, fs.delta, fs.h_star);
  return field_sum(r, fs) <=
         c5 * std::pow(static_cast<double>(r.size()), 1.0 - fs.delta / d) + 1e-12;
}

namespace {

// energies for all 2^n masks, walked in Gray order chunk by chunk so the
// enumeration parallelizes without depending on the thread count
std::vector<double> all_energies(const System& sys) {
  const std::size_t n = sys.size();
  if (n > 20) throw std::runtime_error("gibbs_exact: enumeration budget is 2^20");
  const std::int64_t total = std::int64_t{1} << n;
  std::vector<double> energy(static_cast<std::size_t>(total));
  const int chunks = total >= 256 ? 256 : 1;
  const std::int64_t per = total / chunks;
  parallel_for(chunks, [&](std::int64_t c) {
    const std::int64_t lo = c * per;
    const std::int64_t hi = (c + 1 == chunks) ? total : lo + per;
    std::uint64_t gray = static_cast<std::uint64_t>(lo) ^ (static_cast<std::uint64_t>(lo) >> 1);
    double e = sys.energy_mask(gray);
    energy[static_cast<std::size_t>(gray)] = e;
    for (std::int64_t k = lo + 1; k < hi; ++k) {
      const std::uint64_t g2 = static_cast<std::uint64_t>(k) ^ (static_cast<std::uint64_t>(k) >> 1);
      const std::size_t bit = static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(k)));
      e += sys.flip_delta(gray, bit);
      gray = g2;
      energy[static_cast<std::size_t>(gray)] = e;
    }
  });
  return energy;
}

}  // namespace

GibbsTable gibbs_exact(const Region& box, int omega, double beta, const CouplingSpec& cs,
                       const FieldSpec& fs, int cutoff) {
  System sys(box, omega, cs, fs, cutoff);
  const std::vector<double> energy = all_energies(sys);
  const double e_min = *std::min_element(energy.begin(), energy.end());
  GibbsTable table;
  table.probability.resize(energy.size());
  const double z = chunked_sum<double>(
      static_cast<std::int64_t>(energy.size()),
      [&](std::int64_t i) { return std::exp(-beta * (energy[static_cast<std::size_t>(i)] - e_min)); });
  for (std::size_t i = 0; i < energy.size(); ++i) {
    table.probability[i] = std::exp(-beta * (energy[i] - e_min)) / z;
  }
  table.log_partition = std::log(z) - beta * e_min;
  return table;
}

namespace {

SpinConfig mask_config(const Region& box, std::uint64_t mask, int outside) {
  SpinConfig sigma = SpinConfig::constant(box, -1, static_cast<std::int8_t>(outside));
  for (std::size_t i = 0; i < box.size(); ++i) {
    if ((mask >> i) & 1) sigma.values[i] = +1;
  }
  return sigma;
}

}  // namespace

double dlr_residual(const Region& box, const Region& sub, int omega, double beta,
                    const CouplingSpec& cs, const FieldSpec& fs, const Observable& f, int cutoff) {
  if (!lattice::region_subset(sub, box)) throw std::invalid_argument("dlr_residual: sub not in box");
  const GibbsTable outer = gibbs_exact(box, omega, beta, cs, fs, cutoff);
  const std::size_t n = box.size();
  const Region rest = lattice::region_difference(box, sub);

  double direct = 0.0;
  double nested = 0.0;
  // cache of inner conditional averages per outside-of-sub assignment
  std::map<std::uint64_t, double> inner_cache;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const SpinConfig sigma = mask_config(box, mask, omega);
    direct += outer.probability[mask] * f(sigma);
    std::uint64_t rest_key = 0;
    for (std::size_t k = 0; k < rest.size(); ++k) {
      if (sigma.at(rest[k]) > 0) rest_key |= (std::uint64_t{1} << k);
    }
    auto it = inner_cache.find(rest_key);
    if (it == inner_cache.end()) {
      // exact conditional Gibbs average on `sub` given the rest of the box
      double zc = 0.0, num = 0.0;
      for (std::uint64_t sm = 0; sm < (std::uint64_t{1} << sub.size()); ++sm) {
        SpinConfig tau = sigma;
        for (std::size_t k = 0; k < sub.size(); ++k) {
          const std::ptrdiff_t di = tau.domain.index_of(sub[k]);
          tau.values[static_cast<std::size_t>(di)] = ((sm >> k) & 1) ? +1 : -1;
        }
        const double w = std::exp(-beta * hamiltonian(tau, omega, cs, fs, cutoff));
        zc += w;
        num += w * f(tau);
      }
      it = inner_cache.emplace(rest_key, num / zc).first;
    }
    nested += outer.probability[mask] * it->second;
  }
  return std::abs(nested - direct);
}

double contour_energy_gap(const SpinConfig& sigma, const Contour& gamma, const CouplingSpec& cs,
                          int cutoff) {
  const FieldSpec no_field{0.0, 1.0, 0.0};
  const SpinConfig tau = contours::erase_contours(sigma, {gamma});
  return hamiltonian(sigma, -1, cs, no_field, cutoff) -
         hamiltonian(tau, -1, cs, no_field, cutoff);
}

std::optional<bool> contour_gap_bound_check(double gap, const Contour& gamma,
                                            const CouplingSpec& cs, const PartitionParams& p,
                                            int d, int cutoff) {
  namespace cc = contours::constants;
  if (p.M < cc::threshold_M(d, cs.alpha, cs.J, p.a, p.r)) return std::nullopt;
  const double c2 = cc::gap_c2(d, cs.alpha, cs.J, p.M, p.a, p.r);
  const double c3 = cc::gap_c3(d, cs.alpha, cs.J, p.M, p.a, p.r);
  const double c4 = cc::gap_c4(d, cs.alpha, cs.J, p.M, p.a, p.r);
  const double rhs = c2 * static_cast<double>(gamma.size()) +
                     c3 * surface_energy(gamma.interior_plus, cs, cutoff).lower +
                     c4 * surface_energy(gamma.support(), cs, cutoff).lower;
  return gap >= rhs - 1e-9;
}

PeierlsResult peierls_probability(const Region& box, double beta, const CouplingSpec& cs,
                                  const FieldSpec& fs, const PartitionParams& p, int cutoff) {
  PeierlsResult result;
  const System sys(box, -1, cs, fs, cutoff);
  Point origin;
  origin.dim = box.dim();
  if (!box.contains(origin)) throw std::invalid_argument("peierls: box must contain the origin");

  // conditioning forces sigma = -1 on every radius-1 ball around the inner
  // boundary; the remaining sites are free
  const Region inner = lattice::boundaries(box).inner;
  std::set<Point> forced;
  for (const Point& x : inner) {
    for (const Point& y : lattice::ball(x, 1)) {
      if (box.contains(y)) forced.insert(y);
    }
  }
  std::vector<std::size_t> free_sites;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!forced.count(box[i])) free_sites.push_back(i);
  }
  const std::size_t nf = free_sites.size();
  if (nf > 24) throw std::runtime_error("peierls: conditioned enumeration budget exceeded");

  struct ConfigInfo {
    std::uint64_t mask = 0;  // full-box mask
    double energy = 0.0;
    std::vector<std::size_t> contour_ids;  // external minus-contours
  };
  std::vector<ConfigInfo> configs;
  std::vector<Region> contour_supports;
  std::vector<Region> contour_volumes;
  std::vector<double> contour_min_gap;
  std::map<std::vector<Point>, std::size_t> contour_index;

  const std::ptrdiff_t origin_idx = box.index_of(origin);
  double z_total = 0.0;
  double z_plus = 0.0;
  // reference energy for stable exponentials
  const double e0 = sys.energy_mask(0);

  for (std::uint64_t fm = 0; fm < (std::uint64_t{1} << nf); ++fm) {
    ConfigInfo info;
    for (std::size_t k = 0; k < nf; ++k) {
      if ((fm >> k) & 1) info.mask |= (std::uint64_t{1} << free_sites[k]);
    }
    info.energy = sys.energy_mask(info.mask);
    const double w = std::exp(-beta * (info.energy - e0));
    z_total += w;
    if ((info.mask >> origin_idx) & 1) z_plus += w;

    const SpinConfig sigma = mask_config(box, info.mask, -1);
    const Region bdry = contours::boundary(sigma);
    if (!bdry.empty()) {
      const auto parts = contours::build_partition(bdry, p);
      const auto family = contours::label_contours(sigma, parts);
      const auto externals = contours::external_indices(family);
      for (std::size_t idx : externals) {
        const Contour& gamma = family[idx];
        if (gamma.exterior_label != -1) continue;
        auto [it, inserted] =
            contour_index.emplace(gamma.support().points(), contour_supports.size());
        if (inserted) {
          contour_supports.push_back(gamma.support());
          contour_volumes.push_back(gamma.volume);
          contour_min_gap.push_back(std::numeric_limits<double>::infinity());
        }
        const std::size_t cid = it->second;
        info.contour_ids.push_back(cid);
        const SpinConfig tau = contours::erase_contours(sigma, {gamma});
        const double gap = info.energy - sys.energy(tau);
        contour_min_gap[cid] = std::min(contour_min_gap[cid], gap);
      }
    }
    configs.push_back(std::move(info));
  }

  result.n_conditioned = static_cast<std::int64_t>(configs.size());
  result.exact = z_plus / z_total;

  // union bound: sum over contours whose volume contains the origin of
  // 2^{|gamma|} e^{-beta mingap} Z^-(box \ sp) / Z^-(box)
  for (std::size_t cid = 0; cid < contour_supports.size(); ++cid) {
    if (!contour_volumes[cid].contains(origin)) continue;
    ++result.n_contours;
    double z_restricted = 0.0;
    for (const ConfigInfo& info : configs) {
      bool allowed = true;
      for (std::size_t other : info.contour_ids) {
        if (!lattice::regions_disjoint(contour_volumes[other], contour_supports[cid])) {
          allowed = false;
          break;
        }
      }
      if (allowed) z_restricted += std::exp(-beta * (info.energy - e0));
    }
    result.contour_bound += std::pow(2.0, static_cast<double>(contour_supports[cid].size())) *
                            std::exp(-beta * contour_min_gap[cid]) * z_restricted / z_total;
  }
  return result;
}

double metropolis_acceptance(const System& sys, std::uint64_t mask, std::size_t site,
                             double beta) {
  const double delta = sys.flip_delta(mask, site);
  return delta <= 0.0 ? 1.0 : std::exp(-beta * delta);
}

SpinConfig metropolis_sample(const Region& box, int omega, double beta, const CouplingSpec& cs,
                             const FieldSpec& fs, std::int64_t steps, std::uint64_t seed) {
  System sys(box, omega, cs, fs, cs.nearest_neighbor ? 1 : 24);
  RngStream rng(seed);
  const std::size_t n = box.size();
  std::vector<std::int8_t> spins(n);
  for (std::size_t i = 0; i < n; ++i) spins[i] = rng.next_bernoulli(0.5) ? 1 : -1;
  for (std::int64_t t = 0; t < steps; ++t) {
    const std::size_t site = static_cast<std::size_t>(rng.next_int(static_cast<int>(n)));
    const double delta = sys.flip_delta_state(spins, site);
    if (delta <= 0.0 || rng.next_uniform() < std::exp(-beta * delta)) {
      spins[site] = static_cast<std::int8_t>(-spins[site]);
    }
  }
  SpinConfig sigma = SpinConfig::constant(box, -1, static_cast<std::int8_t>(omega));
  sigma.values = spins;
  return sigma;
}

}  // namespace stoqlab::ising
