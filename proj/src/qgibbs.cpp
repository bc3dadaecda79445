#include "stoqlab/qgibbs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "stoqlab/parallel.hpp"

namespace stoqlab::qgibbs {

namespace {

double sign_of(std::uint64_t mask, std::uint64_t bits) {
  return (std::popcount(mask & bits) & 1) ? -1.0 : 1.0;
}

bool region_less(const Region& a, const Region& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct McAcc {
  Complex sum{0.0, 0.0};
  double sum_sq = 0.0;
  McAcc& operator+=(const McAcc& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    return *this;
  }
};

template <class Term>  // Term(i, RngStream&) -> Complex
Estimate run_mc(std::int64_t n, std::uint64_t seed, std::uint64_t stream_offset, double scale,
                Term term) {
  // accumulate around a pilot sample so constant estimators report exactly
  // zero variance instead of cancellation noise
  Complex pilot;
  {
    RngStream rng(seed, stream_offset);
    pilot = term(0, rng);
  }
  const McAcc acc = chunked_sum<McAcc>(n, [&](std::int64_t i) {
    RngStream rng(seed, stream_offset + static_cast<std::uint64_t>(i));
    const Complex d = term(i, rng) - pilot;
    return McAcc{d, std::norm(d)};
  });
  Estimate est;
  est.n_samples = n;
  est.seed = seed;
  const Complex mean_shift = acc.sum / static_cast<double>(n);
  est.value = scale * (pilot + mean_shift);
  if (n > 1) {
    const double var = std::max(
        0.0, (acc.sum_sq / n - std::norm(mean_shift)) * (static_cast<double>(n) / (n - 1)));
    est.stderr_ = scale * std::sqrt(var / static_cast<double>(n));
  }
  return est;
}

}  // namespace

Region JumpTerm::localization() const {
  Region loc;
  for (const auto& [a, c] : coeffs) {
    (void)c;
    loc = lattice::region_union(loc, a);
  }
  return loc;
}

Region JumpTerm::b_prime() const { return lattice::region_union(b, localization()); }

Complex JumpTerm::evaluate(const std::function<int(const Point&)>& spin) const {
  Complex out{0.0, 0.0};
  for (const auto& [a, c] : coeffs) {
    double s = 1.0;
    for (const Point& p : a) s *= static_cast<double>(spin(p));
    out += c * s;
  }
  return out;
}

void Interaction::validate() const {
  for (const auto& [a, j] : classical) {
    (void)j;
    if (!a.empty() && lattice::diameter(a) > range)
      throw std::invalid_argument("Interaction: classical term beyond the range");
  }
  for (const JumpTerm& term : jumps) {
    if (term.b.empty()) throw std::invalid_argument("Interaction: empty flip set");
    const Region bp = term.b_prime();
    if (lattice::diameter(bp) > range)
      throw std::invalid_argument("Interaction: jump term beyond the range");
    for (const auto& [a, c] : term.coeffs) {
      const std::size_t overlap = lattice::region_intersection(a, term.b).size();
      if (overlap % 2 == 0) {
        if (std::abs(c.imag()) > 1e-12)
          throw std::invalid_argument("Interaction: even-overlap coefficient must be real");
      } else {
        if (std::abs(c.real()) > 1e-12)
          throw std::invalid_argument("Interaction: odd-overlap coefficient must be imaginary");
      }
    }
  }
}

Interaction tfim(const Region& sites, double coupling, double field) {
  Interaction phi;
  phi.range = 1;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      if (lattice::l1_distance(sites[i], sites[j]) == 1) {
        phi.classical.push_back({Region({sites[i], sites[j]}), coupling});
      }
    }
    JumpTerm term;
    term.b = Region({sites[i]});
    term.coeffs.push_back({Region{}, Complex{field, 0.0}});
    phi.jumps.push_back(std::move(term));
  }
  return phi;
}

Interaction heisenberg_type(const Region& sites, const HeisenbergCouplings& c) {
  Interaction phi;
  phi.range = 1;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Region site({sites[i]});
    if (c.h != 0.0) phi.classical.push_back({site, c.h});
    JumpTerm on_site;
    on_site.b = site;
    if (c.eps != 0.0) on_site.coeffs.push_back({Region{}, Complex{c.eps, 0.0}});
    if (c.rho != 0.0) on_site.coeffs.push_back({site, Complex{0.0, c.rho}});
    if (!on_site.coeffs.empty()) phi.jumps.push_back(std::move(on_site));
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      if (lattice::l1_distance(sites[i], sites[j]) != 1) continue;
      const Region pair({sites[i], sites[j]});
      if (c.j3 != 0.0) phi.classical.push_back({pair, c.j3});
      JumpTerm bond;
      bond.b = pair;
      if (c.j1 != 0.0) bond.coeffs.push_back({Region{}, Complex{c.j1, 0.0}});
      if (c.j2 != 0.0) bond.coeffs.push_back({pair, Complex{-c.j2, 0.0}});
      if (!bond.coeffs.empty()) phi.jumps.push_back(std::move(bond));
    }
  }
  return phi;
}

std::uint64_t mask_of(const Region& frame, const Region& subset) {
  std::uint64_t m = 0;
  for (const Point& p : subset) {
    const std::ptrdiff_t i = frame.index_of(p);
    if (i < 0) throw std::invalid_argument("mask_of: point outside the frame");
    m |= (std::uint64_t{1} << i);
  }
  return m;
}

std::vector<double> h0_table(const Interaction& phi, const Region& lam) {
  const std::size_t n = lam.size();
  if (n > 22) throw std::invalid_argument("h0_table: volume too large");
  std::vector<std::pair<std::uint64_t, double>> terms;
  for (const auto& [a, j] : phi.classical) {
    if (lattice::region_subset(a, lam)) terms.push_back({mask_of(lam, a), j});
  }
  std::vector<double> h0(std::size_t{1} << n, 0.0);
  for (std::uint64_t mask = 0; mask < h0.size(); ++mask) {
    double e = 0.0;
    for (const auto& [bits, j] : terms) e -= j * sign_of(mask, bits);
    h0[mask] = e;
  }
  return h0;
}

SplitHamiltonian split_hamiltonian(const Interaction& phi, const Region& lam) {
  SplitHamiltonian out;
  out.h0 = h0_table(phi, lam);
  for (const JumpTerm& term : phi.jumps) {
    if (lattice::region_subset(term.b, lam)) out.jump_terms.push_back(term);
  }
  return out;
}

AlgebraElement hamiltonian_element(const Interaction& phi, const Region& lam) {
  const SpecPtr spec = groupoid::make_spec(lam, 2);
  const std::vector<double> h0 = h0_table(phi, lam);
  std::vector<Complex> diag(h0.begin(), h0.end());
  AlgebraElement h = groupoid::classical(spec, diag);
  for (const JumpTerm& term : phi.jumps) {
    if (!lattice::region_subset(term.b, lam)) continue;
    if (!lattice::region_subset(term.localization(), lam))
      throw std::invalid_argument("hamiltonian_element: jump term reads outside the volume");
    const std::uint64_t flip = mask_of(lam, term.b);
    std::vector<std::pair<std::uint64_t, Complex>> coeffs;
    for (const auto& [a, c] : term.coeffs) coeffs.push_back({mask_of(lam, a), c});
    // (f_B sigma_B^{(1)})(sigma, g) = f_B(g sigma) [g = flip_B]
    for (std::uint64_t sigma = 0; sigma < spec->order(); ++sigma) {
      Complex fb{0.0, 0.0};
      for (const auto& [bits, c] : coeffs) fb += c * sign_of(sigma ^ flip, bits);
      h.at(flip, sigma) -= fb;
    }
  }
  return h;
}

AlgebraElement classical_bc_hamiltonian(const Interaction& phi, const Region& lam,
                                        const SpinConfig& omega) {
  const SpecPtr spec = groupoid::make_spec(lam, 2);
  AlgebraElement h(spec);
  for (const auto& [a, j] : phi.classical) {
    const Region inside = lattice::region_intersection(a, lam);
    if (inside.empty()) continue;
    double outside_product = 1.0;
    for (const Point& p : a) {
      if (!lam.contains(p)) outside_product *= static_cast<double>(omega.at(p));
    }
    const std::uint64_t bits = mask_of(lam, inside);
    for (std::uint64_t sigma = 0; sigma < spec->order(); ++sigma) {
      h.at(0, sigma) -= j * outside_product * sign_of(sigma, bits);
    }
  }
  for (const JumpTerm& term : phi.jumps) {
    if (!lattice::region_subset(term.b, lam)) continue;  // flips outside are dropped by ev
    const std::uint64_t flip = mask_of(lam, term.b);
    for (std::uint64_t sigma = 0; sigma < spec->order(); ++sigma) {
      const std::uint64_t post = sigma ^ flip;
      Complex fb{0.0, 0.0};
      for (const auto& [a, c] : term.coeffs) {
        double s = 1.0;
        for (const Point& p : a) {
          if (lam.contains(p)) {
            s *= ((post >> lam.index_of(p)) & 1) ? -1.0 : 1.0;
          } else {
            s *= static_cast<double>(omega.at(p));
          }
        }
        fb += c * s;
      }
      h.at(flip, sigma) -= fb;
    }
  }
  return h;
}

AlgebraElement exact_density_of(const AlgebraElement& hamiltonian, double beta) {
  const linalg::CMatrix m = groupoid::regular_representation(hamiltonian);
  return groupoid::element_from_matrix(hamiltonian.spec(), linalg::expm(m.scaled(-beta)));
}

AlgebraElement exact_density(const Interaction& phi, const Region& lam, double beta) {
  return exact_density_of(hamiltonian_element(phi, lam), beta);
}

AlgebraElement trotter_density(const Interaction& phi, const Region& lam, double beta, int n,
                               bool allow_large_step) {
  if (n < 1) throw std::invalid_argument("trotter_density: n >= 1 required");
  if (beta / n >= 1.0 && !allow_large_step)
    throw std::invalid_argument("trotter_density: beta/n must stay below 1");
  const SpecPtr spec = groupoid::make_spec(lam, 2);
  const std::vector<double> h0 = h0_table(phi, lam);
  std::vector<Complex> diag(spec->order());
  for (std::size_t sigma = 0; sigma < spec->order(); ++sigma) {
    diag[sigma] = -(beta / (n + 1.0)) * h0[sigma];
  }
  const AlgebraElement half_step = groupoid::exp_classical(spec, diag);

  AlgebraElement v(spec);
  for (const JumpTerm& term : phi.jumps) {
    if (!lattice::region_subset(term.b, lam)) continue;
    if (!lattice::region_subset(term.localization(), lam))
      throw std::invalid_argument("trotter_density: jump term reads outside the volume");
    const std::uint64_t flip = mask_of(lam, term.b);
    std::vector<std::pair<std::uint64_t, Complex>> coeffs;
    for (const auto& [a, c] : term.coeffs) coeffs.push_back({mask_of(lam, a), c});
    for (std::uint64_t sigma = 0; sigma < spec->order(); ++sigma) {
      Complex fb{0.0, 0.0};
      for (const auto& [bits, c] : coeffs) fb += c * sign_of(sigma ^ flip, bits);
      v.at(flip, sigma) += fb;
    }
  }

  AlgebraElement mixer = groupoid::identity(spec).scaled(1.0 - beta / n);
  mixer += v.scaled(beta / n);
  const AlgebraElement step = groupoid::convolve(half_step, mixer);

  AlgebraElement result = half_step;
  for (int k = 0; k < n; ++k) result = groupoid::convolve(step, result);
  return result.scaled(std::exp(beta));
}

// ---- paths ------------------------------------------------------------------

void JumpPath::validate() const {
  double prev = 0.0;
  for (const Jump& j : jumps) {
    if (!(j.t > prev) || !(j.t < 1.0))
      throw std::invalid_argument("JumpPath: times must be strictly increasing in (0,1)");
    if (j.b.empty() || !lattice::region_subset(j.b, domain))
      throw std::invalid_argument("JumpPath: jump set outside the domain");
    prev = j.t;
  }
}

std::uint64_t JumpPath::config_at(double t) const {
  std::uint64_t mask = initial;
  for (const Jump& j : jumps) {
    if (j.t > t) break;
    mask ^= mask_of(domain, j.b);
  }
  return mask;
}

std::uint64_t JumpPath::final_config() const {
  std::uint64_t mask = initial;
  for (const Jump& j : jumps) mask ^= mask_of(domain, j.b);
  return mask;
}

JumpPath concat_paths(const JumpPath& p, const JumpPath& q, double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("concat_paths: c in (0,1) required");
  if (!(p.domain == q.domain) || p.final_config() != q.initial)
    throw std::invalid_argument("concat_paths: endpoint mismatch");
  JumpPath out;
  out.domain = p.domain;
  out.initial = p.initial;
  for (const Jump& j : p.jumps) out.jumps.push_back({c * j.t, j.b});
  for (const Jump& j : q.jumps) out.jumps.push_back({c + (1.0 - c) * j.t, j.b});
  return out;
}

JumpPath reverse_path(const JumpPath& p) {
  JumpPath out;
  out.domain = p.domain;
  out.initial = p.final_config();
  for (auto it = p.jumps.rbegin(); it != p.jumps.rend(); ++it) {
    out.jumps.push_back({1.0 - it->t, it->b});
  }
  return out;
}

BoundaryPath concat_paths(const BoundaryPath& p, const BoundaryPath& q, double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("concat_paths: c in (0,1) required");
  BoundaryPath out = p;
  out.jumps.clear();
  for (const Jump& j : p.jumps) out.jumps.push_back({c * j.t, j.b});
  for (const Jump& j : q.jumps) out.jumps.push_back({c + (1.0 - c) * j.t, j.b});
  return out;
}

BoundaryPath reverse_path(const BoundaryPath& p) {
  BoundaryPath out = p;
  out.jumps.clear();
  for (auto it = p.jumps.rbegin(); it != p.jumps.rend(); ++it) {
    out.jumps.push_back({1.0 - it->t, it->b});
  }
  // the reverse starts from the final outside configuration
  SpinConfig omega = p.omega;
  for (const Jump& j : p.jumps) {
    for (const Point& x : j.b) {
      const std::ptrdiff_t i = omega.domain.index_of(x);
      if (i >= 0) omega.values[static_cast<std::size_t>(i)] =
          static_cast<std::int8_t>(-omega.values[static_cast<std::size_t>(i)]);
    }
  }
  out.omega = std::move(omega);
  return out;
}

bool paths_equal(const JumpPath& p, const JumpPath& q, double time_tol) {
  if (!(p.domain == q.domain) || p.initial != q.initial || p.jumps.size() != q.jumps.size())
    return false;
  for (std::size_t k = 0; k < p.jumps.size(); ++k) {
    if (!(p.jumps[k].b == q.jumps[k].b)) return false;
    if (std::abs(p.jumps[k].t - q.jumps[k].t) > time_tol) return false;
  }
  return true;
}

namespace {

double config_metric(const Region& domain, std::uint64_t a, std::uint64_t b) {
  // d_1 with sphere-averaged weights 2^{-|x|-1}
  Point origin;
  origin.dim = domain.dim();
  std::map<int, std::pair<int, double>> spheres;  // radius -> (count, mismatch sum)
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const int r = lattice::l1_distance(domain[i], origin);
    auto& [count, sum] = spheres[r];
    ++count;
    if (((a >> i) & 1) != ((b >> i) & 1)) sum += 2.0 / std::pow(2.0, r + 1);
  }
  double total = 0.0;
  for (const auto& [r, cs] : spheres) {
    (void)r;
    total += cs.second / static_cast<double>(cs.first);
  }
  return total;
}

}  // namespace

double path_metric(const JumpPath& p, const JumpPath& q) {
  if (!(p.domain == q.domain)) throw std::invalid_argument("path_metric: different domains");
  const std::size_t jp = p.jumps.size();
  const std::size_t jq = q.jumps.size();
  if (jp != jq) return 1.0;
  if (jp == 0) return config_metric(p.domain, p.initial, q.initial);
  double sum = 0.0;
  for (std::size_t k = 0; k < jp; ++k) {
    const double tk = p.jumps[k].t;
    const double sk = q.jumps[k].t;
    sum += std::abs(sk - tk) + config_metric(p.domain, p.config_at(tk), q.config_at(sk));
  }
  return sum / (2.0 * (static_cast<double>(jp) + 1.0));
}

std::vector<Jump> sample_path(const Region& lam_r, double beta,
                              const std::vector<Region>& jump_sets, RngStream& rng) {
  (void)lam_r;
  std::vector<Jump> marks;
  for (const Region& b : jump_sets) {
    const int count = rng.next_poisson(beta);
    for (int k = 0; k < count; ++k) marks.push_back({rng.next_uniform(), b});
  }
  std::stable_sort(marks.begin(), marks.end(), [](const Jump& x, const Jump& y) {
    if (x.t != y.t) return x.t < y.t;
    return region_less(x.b, y.b);
  });
  return marks;
}

BoundaryPath boundary_condition_of(const Interaction& phi, const Region& lam,
                                   const std::vector<Jump>& marks, SpinConfig omega) {
  BoundaryPath bc;
  bc.lambda = lam;
  bc.omega = std::move(omega);
  for (const Jump& mark : marks) {
    const JumpTerm* term = nullptr;
    for (const JumpTerm& t : phi.jumps) {
      if (t.b == mark.b) {
        term = &t;
        break;
      }
    }
    const Region b_prime = (term != nullptr) ? term->b_prime() : mark.b;
    if (!lattice::region_subset(b_prime, lam)) bc.jumps.push_back(mark);
  }
  return bc;
}

// ---- free-volume sampler ----------------------------------------------------

PppSampler::PppSampler(const Interaction& phi, Region lam) : lam_(std::move(lam)) {
  if (lam_.size() > 40) throw std::invalid_argument("PppSampler: volume too large");
  std::vector<const JumpTerm*> terms;
  for (const JumpTerm& term : phi.jumps) {
    if (lattice::region_subset(term.b_prime(), lam_)) terms.push_back(&term);
  }
  std::sort(terms.begin(), terms.end(),
            [](const JumpTerm* a, const JumpTerm* b) { return region_less(a->b, b->b); });
  for (const JumpTerm* term : terms) {
    CompiledJump cj;
    cj.flip = mask_of(lam_, term->b);
    for (const auto& [a, c] : term->coeffs) cj.coeffs.push_back({mask_of(lam_, a), c});
    sets_.push_back(std::move(cj));
    set_regions_.push_back(term->b);
  }
  for (const auto& [a, j] : phi.classical) {
    if (lattice::region_subset(a, lam_)) h0_terms_.push_back({mask_of(lam_, a), j});
  }
}

double PppSampler::h0(std::uint64_t mask) const {
  double e = 0.0;
  for (const auto& [bits, j] : h0_terms_) e -= j * sign_of(mask, bits);
  return e;
}

double PppSampler::h0_max_abs() const {
  double m = 0.0;
  for (const auto& [bits, j] : h0_terms_) {
    (void)bits;
    m += std::abs(j);
  }
  return m;
}

double PppSampler::v_max_abs() const {
  double m = 0.0;
  for (const CompiledJump& cj : sets_) {
    double s = 0.0;
    for (const auto& [bits, c] : cj.coeffs) {
      (void)bits;
      s += std::abs(c);
    }
    m = std::max(m, s);
  }
  return m;
}

PppSampler::Draw PppSampler::draw(std::uint64_t sigma_mask, double beta, RngStream& rng) const {
  // merged marks: (time, set index), Poisson(beta) per set
  std::vector<std::pair<double, int>> marks;
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    const int count = rng.next_poisson(beta);
    for (int k = 0; k < count; ++k) marks.push_back({rng.next_uniform(), static_cast<int>(s)});
  }
  std::stable_sort(marks.begin(), marks.end());

  Draw out;
  out.n_marks = static_cast<int>(marks.size());
  std::uint64_t mask = sigma_mask;
  double exponent = 0.0;
  Complex product{1.0, 0.0};
  double prev = 0.0;
  for (const auto& [t, s] : marks) {
    exponent += (t - prev) * h0(mask);
    const CompiledJump& cj = sets_[static_cast<std::size_t>(s)];
    mask ^= cj.flip;
    Complex fb{0.0, 0.0};
    for (const auto& [bits, c] : cj.coeffs) fb += c * sign_of(mask, bits);
    product *= fb;
    prev = t;
  }
  exponent += (1.0 - prev) * h0(mask);
  out.weight = product * std::exp(-beta * exponent);
  out.g_total = mask ^ sigma_mask;
  return out;
}

Complex PppSampler::path_weight(std::uint64_t sigma_mask, std::uint64_t g_mask,
                                const std::vector<Jump>& marks, double beta) const {
  std::uint64_t mask = sigma_mask;
  double exponent = 0.0;
  Complex product{1.0, 0.0};
  double prev = 0.0;
  for (const Jump& mark : marks) {
    exponent += (mark.t - prev) * h0(mask);
    // locate the compiled set
    const std::ptrdiff_t idx =
        std::find_if(set_regions_.begin(), set_regions_.end(),
                     [&](const Region& r) { return r == mark.b; }) -
        set_regions_.begin();
    if (idx == static_cast<std::ptrdiff_t>(set_regions_.size()))
      throw std::invalid_argument("path_weight: mark set is not a jump set of the interaction");
    const CompiledJump& cj = sets_[static_cast<std::size_t>(idx)];
    mask ^= cj.flip;
    Complex fb{0.0, 0.0};
    for (const auto& [bits, c] : cj.coeffs) fb += c * sign_of(mask, bits);
    product *= fb;
    prev = mark.t;
  }
  exponent += (1.0 - prev) * h0(mask);
  if ((mask ^ sigma_mask) != g_mask) return Complex{0.0, 0.0};
  return product * std::exp(-beta * exponent);
}

Estimate ppp_density_mc(const Interaction& phi, const Region& lam, double beta,
                        std::uint64_t sigma_mask, std::uint64_t g_mask, std::int64_t n_samples,
                        std::uint64_t seed) {
  const PppSampler sampler(phi, lam);
  const double scale = std::exp(beta * sampler.n_jump_sets());
  return run_mc(n_samples, seed, 0, scale, [&](std::int64_t, RngStream& rng) {
    const PppSampler::Draw d = sampler.draw(sigma_mask, beta, rng);
    return d.g_total == g_mask ? d.weight : Complex{0.0, 0.0};
  });
}

SeriesResult ppp_density_series(const Interaction& phi, const Region& lam, double beta,
                                std::uint64_t sigma_mask, std::uint64_t g_mask, int max_order,
                                int quad_nodes) {
  const PppSampler sampler(phi, lam);
  const int n_sets = sampler.n_jump_sets();
  SeriesResult out;

  // Gauss-Legendre nodes on [0,1]
  std::vector<double> nodes(static_cast<std::size_t>(quad_nodes));
  std::vector<double> weights(static_cast<std::size_t>(quad_nodes));
  for (int i = 0; i < quad_nodes; ++i) {
    // Newton iteration from the Chebyshev initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (quad_nodes + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= quad_nodes; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = quad_nodes * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= quad_nodes; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = quad_nodes * (x * p1 - p0) / (x * x - 1.0);
    nodes[static_cast<std::size_t>(quad_nodes - 1 - i)] = 0.5 * (x + 1.0);
    weights[static_cast<std::size_t>(quad_nodes - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }

  // order 0
  if (g_mask == 0) out.value += std::exp(-beta * sampler.h0(sigma_mask));

  double log_factorial = 0.0;
  for (int order = 1; order <= max_order; ++order) {
    log_factorial += std::log(static_cast<double>(order));
    double work = std::pow(static_cast<double>(quad_nodes), order) *
                  std::pow(static_cast<double>(std::max(1, n_sets)), order);
    if (work > 5e7) throw std::runtime_error("ppp_density_series: quadrature budget exceeded");
    // tensor quadrature over the cube with time-sorted evaluation
    std::vector<int> t_idx(static_cast<std::size_t>(order), 0);
    std::vector<int> s_idx(static_cast<std::size_t>(order), 0);
    Complex order_sum{0.0, 0.0};
    while (true) {
      double wq = 1.0;
      std::vector<double> times(static_cast<std::size_t>(order));
      for (int k = 0; k < order; ++k) {
        times[static_cast<std::size_t>(k)] = nodes[static_cast<std::size_t>(t_idx[static_cast<std::size_t>(k)])];
        wq *= weights[static_cast<std::size_t>(t_idx[static_cast<std::size_t>(k)])];
      }
      std::sort(times.begin(), times.end());
      // sum over jump-set sequences attached to the sorted times
      std::fill(s_idx.begin(), s_idx.end(), 0);
      Complex seq_sum{0.0, 0.0};
      while (true) {
        std::vector<Jump> marks(static_cast<std::size_t>(order));
        for (int k = 0; k < order; ++k) {
          marks[static_cast<std::size_t>(k)] = {
              times[static_cast<std::size_t>(k)],
              sampler.jump_sets()[static_cast<std::size_t>(s_idx[static_cast<std::size_t>(k)])]};
        }
        seq_sum += sampler.path_weight(sigma_mask, g_mask, marks, beta);
        int axis = order - 1;
        while (axis >= 0 && ++s_idx[static_cast<std::size_t>(axis)] == n_sets) {
          s_idx[static_cast<std::size_t>(axis)] = 0;
          --axis;
        }
        if (axis < 0) break;
      }
      order_sum += wq * seq_sum;
      int axis = order - 1;
      while (axis >= 0 && ++t_idx[static_cast<std::size_t>(axis)] == quad_nodes) {
        t_idx[static_cast<std::size_t>(axis)] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
    out.value += std::pow(beta, order) * std::exp(-log_factorial) * order_sum;
  }

  // tail: sum_{n > max_order} (beta |V| #B)^n / n! e^{beta |H0|}
  const double x = beta * sampler.v_max_abs() * static_cast<double>(std::max(1, n_sets));
  double partial = 1.0, term = 1.0;
  for (int k = 1; k <= max_order; ++k) {
    term *= x / k;
    partial += term;
  }
  out.tail_bound = std::exp(beta * sampler.h0_max_abs()) * std::max(0.0, std::exp(x) - partial);
  return out;
}

// ---- boundary sampler ---------------------------------------------------------

BoundarySampler::BoundarySampler(const Interaction& phi, Region lam, BoundaryPath bc)
    : lam_(std::move(lam)), bc_(std::move(bc)), interior_(Interaction{}, Region{}), phi_(&phi) {
  // halo of range R around the volume
  std::vector<Point> halo_pts;
  for (const Point& p : lam_) {
    for (const Point& q : lattice::ball(p, phi.range)) halo_pts.push_back(q);
  }
  lam_r_ = Region(std::move(halo_pts));
  lambda_bits_ = mask_of(lam_r_, lam_);

  // interior process: jump terms fully localized inside the volume
  Interaction interior_phi;
  interior_phi.range = phi.range;
  for (const JumpTerm& term : phi.jumps) {
    if (lattice::region_subset(term.b_prime(), lam_)) interior_phi.jumps.push_back(term);
  }
  // classical part of the interior sampler is unused; the merged walk uses
  // the cross terms below
  interior_ = PppSampler(interior_phi, lam_r_);

  for (const auto& [a, j] : phi.classical) {
    if (!lattice::regions_disjoint(a, lam_)) h0w_terms_.push_back({mask_of(lam_r_, a), j});
  }

  double prev = 0.0;
  for (const Jump& mark : bc_.jumps) {
    if (!(mark.t > prev) || !(mark.t < 1.0))
      throw std::invalid_argument("BoundarySampler: boundary times must increase in (0,1)");
    prev = mark.t;
    const JumpTerm* term = nullptr;
    for (const JumpTerm& t : phi.jumps) {
      if (t.b == mark.b) {
        term = &t;
        break;
      }
    }
    BoundaryMark bm;
    bm.t = mark.t;
    bm.flip = mask_of(lam_r_, mark.b);
    if (term != nullptr) {
      if (lattice::region_subset(term->b_prime(), lam_))
        throw std::invalid_argument("BoundarySampler: boundary mark is an interior set");
      bm.weighted = !lattice::regions_disjoint(term->b_prime(), lam_);
      bm.term = term;
    } else {
      // a jump the interaction cannot realize: its factor is identically
      // zero whenever it touches the volume
      bm.weighted = !lattice::regions_disjoint(mark.b, lam_);
      bm.term = nullptr;
    }
    bc_marks_.push_back(bm);
    bc_flip_full_ ^= bm.flip;
  }

  initial_outside_ = 0;
  for (std::size_t i = 0; i < lam_r_.size(); ++i) {
    if (lam_.contains(lam_r_[i])) continue;
    if (bc_.omega.at(lam_r_[i]) < 0) initial_outside_ |= (std::uint64_t{1} << i);
  }
}

double BoundarySampler::h0w(std::uint64_t halo_mask) const {
  double e = 0.0;
  for (const auto& [bits, j] : h0w_terms_) e -= j * sign_of(halo_mask, bits);
  return e;
}

std::uint64_t BoundarySampler::boundary_flip_on_lambda() const {
  return bc_flip_full_ & lambda_bits_;
}

Complex BoundarySampler::merged_weight(std::uint64_t sigma_lambda_mask,
                                       const std::vector<Jump>& interior_marks, double beta,
                                       std::uint64_t* g_lambda_out) const {
  struct Mark {
    double t;
    std::uint64_t flip;
    bool weighted;
    const JumpTerm* term;
    const PppSampler::CompiledJump* compiled;
  };
  std::vector<Mark> merged;
  merged.reserve(interior_marks.size() + bc_marks_.size());
  for (const Jump& j : interior_marks) {
    const auto& regions = interior_.jump_sets();
    const std::ptrdiff_t idx =
        std::find_if(regions.begin(), regions.end(), [&](const Region& r) { return r == j.b; }) -
        regions.begin();
    if (idx == static_cast<std::ptrdiff_t>(regions.size()))
      throw std::invalid_argument("merged_weight: unknown interior mark");
    merged.push_back({j.t, interior_.sets_[static_cast<std::size_t>(idx)].flip, true, nullptr,
                      &interior_.sets_[static_cast<std::size_t>(idx)]});
  }
  for (const BoundaryMark& bm : bc_marks_) {
    merged.push_back({bm.t, bm.flip, bm.weighted, bm.term, nullptr});
  }
  std::stable_sort(merged.begin(), merged.end(), [](const Mark& x, const Mark& y) {
    if (x.t != y.t) return x.t < y.t;
    return x.flip < y.flip;
  });

  // embed the lambda configuration into the halo
  std::uint64_t mask = initial_outside_;
  {
    std::size_t bit = 0;
    for (std::size_t i = 0; i < lam_r_.size(); ++i) {
      if ((lambda_bits_ >> i) & 1) {
        if ((sigma_lambda_mask >> bit) & 1) mask |= (std::uint64_t{1} << i);
        ++bit;
      }
    }
  }
  const std::uint64_t initial = mask;

  double exponent = 0.0;
  Complex product{1.0, 0.0};
  double prev = 0.0;
  for (const Mark& m : merged) {
    exponent += (m.t - prev) * h0w(mask);
    mask ^= m.flip;
    if (m.weighted) {
      Complex fb{0.0, 0.0};
      if (m.compiled != nullptr) {
        for (const auto& [bits, c] : m.compiled->coeffs) fb += c * sign_of(mask, bits);
      } else if (m.term != nullptr) {
        for (const auto& [a, c] : m.term->coeffs) {
          fb += c * sign_of(mask, mask_of(lam_r_, a));
        }
      }
      product *= fb;  // stays zero for unrealizable jumps
    }
    prev = m.t;
  }
  exponent += (1.0 - prev) * h0w(mask);

  // net flip restricted to lambda, re-indexed to lambda bit order
  const std::uint64_t g_halo = (mask ^ initial) & lambda_bits_;
  std::uint64_t g_lambda = 0;
  {
    std::size_t bit = 0;
    for (std::size_t i = 0; i < lam_r_.size(); ++i) {
      if ((lambda_bits_ >> i) & 1) {
        if ((g_halo >> i) & 1) g_lambda |= (std::uint64_t{1} << bit);
        ++bit;
      }
    }
  }
  if (g_lambda_out != nullptr) *g_lambda_out = g_lambda;
  return product * std::exp(-beta * exponent);
}

BoundarySampler::Draw BoundarySampler::draw(std::uint64_t sigma_lambda_mask, double beta,
                                            RngStream& rng) const {
  std::vector<Jump> marks;
  for (std::size_t s = 0; s < interior_.jump_sets().size(); ++s) {
    const int count = rng.next_poisson(beta);
    for (int k = 0; k < count; ++k)
      marks.push_back({rng.next_uniform(), interior_.jump_sets()[s]});
  }
  std::stable_sort(marks.begin(), marks.end(), [](const Jump& x, const Jump& y) {
    if (x.t != y.t) return x.t < y.t;
    return region_less(x.b, y.b);
  });
  Draw out;
  out.weight = merged_weight(sigma_lambda_mask, marks, beta, &out.g_on_lambda);
  return out;
}

Estimate boundary_density_mc(const Interaction& phi, const Region& lam, double beta,
                             const BoundaryPath& bc, std::uint64_t sigma_mask,
                             std::uint64_t g_mask, std::int64_t n_samples, std::uint64_t seed,
                             TermAudit* audit) {
  const BoundarySampler sampler(phi, lam, bc);
  const double scale = std::exp(beta * sampler.n_interior_sets());
  struct AuditAcc {
    double min_real = std::numeric_limits<double>::infinity();
    double max_imag = 0.0;
    std::int64_t n = 0;
    AuditAcc& operator+=(const AuditAcc& o) {
      min_real = std::min(min_real, o.min_real);
      max_imag = std::max(max_imag, o.max_imag);
      n += o.n;
      return *this;
    }
  };
  AuditAcc audit_acc;
  const Estimate est = run_mc(n_samples, seed, 0, scale, [&](std::int64_t, RngStream& rng) {
    const BoundarySampler::Draw d = sampler.draw(sigma_mask, beta, rng);
    if (audit != nullptr) {
#pragma omp critical(stoqlab_boundary_audit)
      {
        audit_acc.min_real = std::min(audit_acc.min_real, d.weight.real());
        audit_acc.max_imag = std::max(audit_acc.max_imag, std::abs(d.weight.imag()));
        ++audit_acc.n;
      }
    }
    return d.g_on_lambda == g_mask ? d.weight : Complex{0.0, 0.0};
  });
  if (audit != nullptr) {
    audit->min_real = audit_acc.min_real;
    audit->max_imag_abs = audit_acc.max_imag;
    audit->n_terms = audit_acc.n;
  }
  return est;
}

Estimate path_partition_function(const Interaction& phi, const Region& lam, double beta,
                                 const BoundaryPath& bc, std::int64_t n_samples,
                                 std::uint64_t seed, TermAudit* audit) {
  const BoundarySampler sampler(phi, lam, bc);
  const double scale = std::exp(beta * sampler.n_interior_sets());
  const std::uint64_t g_target = sampler.boundary_flip_on_lambda();
  const std::size_t n_configs = std::size_t{1} << lam.size();
  Estimate total;
  total.n_samples = n_samples;
  total.seed = seed;
  double var_sum = 0.0;
  double min_real = std::numeric_limits<double>::infinity();
  double max_imag = 0.0;
  std::int64_t n_terms = 0;
  for (std::size_t sigma = 0; sigma < n_configs; ++sigma) {
    double local_min = std::numeric_limits<double>::infinity();
    double local_imag = 0.0;
    const Estimate est =
        run_mc(n_samples, seed, sigma * static_cast<std::uint64_t>(n_samples) * 2, scale,
               [&](std::int64_t, RngStream& rng) {
                 const BoundarySampler::Draw d = sampler.draw(sigma, beta, rng);
                 if (audit != nullptr) {
#pragma omp critical(stoqlab_pathz_audit)
                   {
                     local_min = std::min(local_min, d.weight.real());
                     local_imag = std::max(local_imag, std::abs(d.weight.imag()));
                   }
                 }
                 return d.g_on_lambda == g_target ? d.weight : Complex{0.0, 0.0};
               });
    total.value += est.value;
    var_sum += est.stderr_ * est.stderr_;
    min_real = std::min(min_real, local_min);
    max_imag = std::max(max_imag, local_imag);
    n_terms += n_samples;
  }
  total.stderr_ = std::sqrt(var_sum);
  if (audit != nullptr) {
    audit->min_real = min_real;
    audit->max_imag_abs = max_imag;
    audit->n_terms = n_terms;
  }
  return total;
}

namespace {

// local element evaluated at a composed arrow of the larger system: zero
// unless the composed group element is trivial outside the element's sites
struct LocalEvaluator {
  const AlgebraElement* f = nullptr;
  std::vector<std::ptrdiff_t> site_in_frame;  // f-site -> frame index, -1 if absent
  std::uint64_t frame_bits_of_f = 0;

  LocalEvaluator(const AlgebraElement& element, const Region& frame) : f(&element) {
    const Region& sites = element.spec()->sites();
    for (const Point& p : sites) {
      const std::ptrdiff_t i = frame.index_of(p);
      site_in_frame.push_back(i);
      if (i >= 0) frame_bits_of_f |= (std::uint64_t{1} << i);
    }
  }

  // config_mask and group_mask over the frame (bit set = spin -1 / flipped);
  // outside_value supplies spins for f-sites beyond the frame
  Complex eval(std::uint64_t config_mask, std::uint64_t group_mask, int outside_value) const {
    if ((group_mask & ~frame_bits_of_f) != 0) return Complex{0.0, 0.0};
    std::size_t sigma = 0, g = 0;
    for (std::size_t k = 0; k < site_in_frame.size(); ++k) {
      const std::ptrdiff_t i = site_in_frame[k];
      const bool minus = (i >= 0) ? ((config_mask >> i) & 1) : (outside_value < 0);
      const bool flip = (i >= 0) ? ((group_mask >> i) & 1) : false;
      if (minus) sigma |= (std::size_t{1} << k);
      if (flip) g |= (std::size_t{1} << k);
    }
    return f->at(g, sigma);
  }
};

}  // namespace

Estimate path_gibbs(const Interaction& phi, const Region& lam, double beta,
                    const BoundaryPath& bc, const AlgebraElement& f, std::int64_t n_samples,
                    std::uint64_t seed) {
  const BoundarySampler sampler(phi, lam, bc);
  const Region& halo = sampler.halo();
  const std::uint64_t g_target = sampler.boundary_flip_on_lambda();
  const std::size_t n_configs = std::size_t{1} << lam.size();
  const LocalEvaluator evaluator(f, halo);

  // final outside configuration of the boundary path, over halo bits
  std::uint64_t outside_final = 0;
  {
    for (std::size_t i = 0; i < halo.size(); ++i) {
      if (lam.contains(halo[i])) continue;
      int v = bc.omega.at(halo[i]);
      if ((sampler.boundary_flip_full() >> i) & 1) v = -v;
      if (v < 0) outside_final |= (std::uint64_t{1} << i);
    }
  }
  const std::uint64_t lam_bits = sampler.lambda_mask_bits();

  struct RatioAcc {
    double sx = 0.0, sz = 0.0, sxx = 0.0, szz = 0.0, sxz = 0.0;
    RatioAcc& operator+=(const RatioAcc& o) {
      sx += o.sx;
      sz += o.sz;
      sxx += o.sxx;
      szz += o.szz;
      sxz += o.sxz;
      return *this;
    }
  };

  double num = 0.0, den = 0.0, var_num = 0.0, var_den = 0.0, cov = 0.0;
  for (std::size_t sigma = 0; sigma < n_configs; ++sigma) {
    const RatioAcc acc = chunked_sum<RatioAcc>(n_samples, [&](std::int64_t i) {
      RngStream rng(seed, sigma * static_cast<std::uint64_t>(n_samples) * 2 +
                              static_cast<std::uint64_t>(i));
      const BoundarySampler::Draw d = sampler.draw(sigma, beta, rng);
      const double w = d.weight.real();  // observables below are real-valued uses
      const double z = (d.g_on_lambda == g_target) ? w : 0.0;
      // f at the composed arrow: eta = g_tot sigma inside lambda, the final
      // boundary configuration outside; group = g_tot composed with the
      // boundary flips
      std::uint64_t eta_halo = outside_final;
      std::uint64_t g_halo = sampler.boundary_flip_full() & ~lam_bits;
      {
        std::size_t bit = 0;
        for (std::size_t hi = 0; hi < halo.size(); ++hi) {
          if ((lam_bits >> hi) & 1) {
            const bool minus = (((sigma ^ d.g_on_lambda) >> bit) & 1) != 0;
            if (minus) eta_halo |= (std::uint64_t{1} << hi);
            bool flip = ((d.g_on_lambda >> bit) & 1) != 0;
            if ((sampler.boundary_flip_full() >> hi) & 1) flip = !flip;
            if (flip) g_halo |= (std::uint64_t{1} << hi);
            ++bit;
          }
        }
      }
      const double x = w * evaluator.eval(eta_halo, g_halo, bc.omega.outside).real();
      RatioAcc a;
      a.sx = x;
      a.sz = z;
      a.sxx = x * x;
      a.szz = z * z;
      a.sxz = x * z;
      return a;
    });
    const double n = static_cast<double>(n_samples);
    num += acc.sx / n;
    den += acc.sz / n;
    var_num += std::max(0.0, acc.sxx / n - (acc.sx / n) * (acc.sx / n)) / n;
    var_den += std::max(0.0, acc.szz / n - (acc.sz / n) * (acc.sz / n)) / n;
    cov += (acc.sxz / n - (acc.sx / n) * (acc.sz / n)) / n;
  }

  const double z_err = std::sqrt(var_den);
  if (!(std::abs(den) > 5.0 * z_err))
    throw std::runtime_error("path_gibbs: partition function indistinguishable from zero");
  Estimate est;
  est.n_samples = n_samples;
  est.seed = seed;
  const double ratio = num / den;
  est.value = ratio;
  est.stderr_ = std::sqrt(std::max(
      0.0, (var_num - 2.0 * ratio * cov + ratio * ratio * var_den) / (den * den)));
  return est;
}

// ---- consistency ---------------------------------------------------------------

namespace {

// exact inner evaluation: the density operator of a small volume given a
// fixed boundary condition, as a time-ordered product of interval
// exponentials and mark operators
class InnerChain {
 public:
  InnerChain(const Interaction& phi, const Region& delta, const Region& universe)
      : phi_(&phi), delta_(delta), universe_(universe), spec_(groupoid::make_spec(delta, 2)) {
    for (const JumpTerm& term : phi.jumps) {
      if (lattice::region_subset(term.b_prime(), delta_)) {
        interior_.push_back(&term);
      }
    }
    for (const auto& [a, j] : phi.classical) {
      if (!lattice::regions_disjoint(a, delta_)) cross_terms_.push_back({a, j});
    }
  }

  const SpecPtr& spec() const { return spec_; }

  // generator fiber for a frozen outside configuration (mask over universe)
  const linalg::CMatrix& generator(std::uint64_t outside_mask, std::vector<double>& values,
                                   linalg::CMatrix& vectors) {
    auto it = cache_.find(outside_mask);
    if (it == cache_.end()) {
      AlgebraElement gen(spec_);
      for (std::uint64_t sigma = 0; sigma < spec_->order(); ++sigma) {
        double e = 0.0;
        for (const auto& [a, j] : cross_terms_) {
          double s = 1.0;
          for (const Point& p : a) {
            const std::ptrdiff_t di = delta_.index_of(p);
            if (di >= 0) {
              s *= ((sigma >> di) & 1) ? -1.0 : 1.0;
            } else {
              const std::ptrdiff_t ui = universe_.index_of(p);
              s *= ((outside_mask >> ui) & 1) ? -1.0 : 1.0;
            }
          }
          e -= j * s;
        }
        gen.at(0, sigma) = -e;  // weight carries e^{-beta int H}
      }
      for (const JumpTerm* term : interior_) {
        const std::uint64_t flip = mask_of(delta_, term->b);
        for (std::uint64_t sigma = 0; sigma < spec_->order(); ++sigma) {
          Complex fb{0.0, 0.0};
          for (const auto& [a, c] : term->coeffs) {
            fb += c * sign_of(sigma ^ flip, mask_of(delta_, a));
          }
          gen.at(flip, sigma) += fb;
        }
      }
      Entry entry;
      entry.fiber = groupoid::regular_representation(gen);
      linalg::hermitian_eigensystem(entry.fiber, entry.values, entry.vectors);
      it = cache_.emplace(outside_mask, std::move(entry)).first;
    }
    values = it->second.values;
    vectors = it->second.vectors;
    return it->second.fiber;
  }

  linalg::CMatrix interval(double beta_dt, std::uint64_t outside_mask) {
    std::vector<double> values;
    linalg::CMatrix q;
    generator(outside_mask, values, q);
    const std::size_t n = q.size();
    linalg::CMatrix k(n);
    // Q diag(e^{beta dt lambda}) Q^H
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Complex acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
          acc += q.at(i, m) * std::exp(beta_dt * values[m]) * std::conj(q.at(j, m));
        }
        k.at(i, j) = acc;
      }
    }
    return k;
  }

  // mark operator: flips b inside delta and multiplies by f_B at the
  // post-jump full configuration
  linalg::CMatrix mark_operator(const JumpTerm& term, std::uint64_t post_outside_mask) {
    AlgebraElement p(spec_);
    const Region b_in = lattice::region_intersection(term.b, delta_);
    const std::uint64_t flip = mask_of(delta_, b_in);
    for (std::uint64_t sigma = 0; sigma < spec_->order(); ++sigma) {
      const std::uint64_t post = sigma ^ flip;
      Complex fb{0.0, 0.0};
      for (const auto& [a, c] : term.coeffs) {
        double s = 1.0;
        for (const Point& pt : a) {
          const std::ptrdiff_t di = delta_.index_of(pt);
          if (di >= 0) {
            s *= ((post >> di) & 1) ? -1.0 : 1.0;
          } else {
            const std::ptrdiff_t ui = universe_.index_of(pt);
            s *= ((post_outside_mask >> ui) & 1) ? -1.0 : 1.0;
          }
        }
        fb += c * s;
      }
      p.at(flip, sigma) += fb;
    }
    return groupoid::regular_representation(p);
  }

 private:
  struct Entry {
    linalg::CMatrix fiber;
    std::vector<double> values;
    linalg::CMatrix vectors;
  };
  const Interaction* phi_;
  Region delta_;
  Region universe_;
  SpecPtr spec_;
  std::vector<const JumpTerm*> interior_;
  std::vector<std::pair<Region, double>> cross_terms_;
  std::map<std::uint64_t, Entry> cache_;
};

}  // namespace

Estimate consistency_check_mc(const Interaction& phi, const Region& lam, const Region& delta,
                              double beta, const AlgebraElement& f, std::int64_t n_samples,
                              std::uint64_t seed) {
  if (!lattice::region_subset(delta, lam))
    throw std::invalid_argument("consistency_check_mc: delta must sit inside lambda");
  if (!classify(phi).stoquastic)
    throw std::invalid_argument("consistency_check_mc: stoquastic interaction required");

  const LocalEvaluator evaluator(f, lam);
  const std::size_t n_lam = lam.size();

  // ---- direct stage: mu_Lambda(f) with the free Hamiltonian ----
  const PppSampler direct(phi, lam);
  double b_num = 0.0, b_den = 0.0, b_var_num = 0.0, b_var_den = 0.0, b_cov = 0.0;
  for (std::uint64_t sigma = 0; sigma < (std::uint64_t{1} << n_lam); ++sigma) {
    struct Acc {
      double sx = 0.0, sz = 0.0, sxx = 0.0, szz = 0.0, sxz = 0.0;
      Acc& operator+=(const Acc& o) {
        sx += o.sx;
        sz += o.sz;
        sxx += o.sxx;
        szz += o.szz;
        sxz += o.sxz;
        return *this;
      }
    };
    const Acc acc = chunked_sum<Acc>(n_samples, [&](std::int64_t i) {
      RngStream rng(seed, sigma * static_cast<std::uint64_t>(n_samples) * 4 +
                              static_cast<std::uint64_t>(i));
      const PppSampler::Draw d = direct.draw(sigma, beta, rng);
      const double w = d.weight.real();
      const double z = (d.g_total == 0) ? w : 0.0;
      const double x =
          w * evaluator.eval(sigma ^ d.g_total, d.g_total, /*outside*/ -1).real();
      Acc a;
      a.sx = x;
      a.sz = z;
      a.sxx = x * x;
      a.szz = z * z;
      a.sxz = x * z;
      return a;
    });
    const double n = static_cast<double>(n_samples);
    b_num += acc.sx / n;
    b_den += acc.sz / n;
    b_var_num += std::max(0.0, acc.sxx / n - (acc.sx / n) * (acc.sx / n)) / n;
    b_var_den += std::max(0.0, acc.szz / n - (acc.sz / n) * (acc.sz / n)) / n;
    b_cov += (acc.sxz / n - (acc.sx / n) * (acc.sz / n)) / n;
  }
  const double est_b = b_num / b_den;
  const double se_b = std::sqrt(std::max(
      0.0, (b_var_num - 2.0 * est_b * b_cov + est_b * est_b * b_var_den) / (b_den * b_den)));

  // ---- two-stage: outer samples on lambda minus delta, exact inner chains ----
  const Region outer_region = lattice::region_difference(lam, delta);
  const std::size_t n_out = outer_region.size();

  // outer process: interaction jump sets inside lambda that touch the outside
  // of delta
  struct OuterSet {
    const JumpTerm* term;
    std::uint64_t flip_outer = 0;  // flip restricted to the outer region
    std::uint64_t flip_lam = 0;    // full flip over lambda
    bool crosses_delta = false;    // B' meets delta: handled by the inner chain
  };
  std::vector<OuterSet> outer_sets;
  for (const JumpTerm& term : phi.jumps) {
    if (!lattice::region_subset(term.b_prime(), lam)) continue;
    if (lattice::region_subset(term.b_prime(), delta)) continue;
    OuterSet os;
    os.term = &term;
    os.flip_outer = mask_of(outer_region, lattice::region_intersection(term.b, outer_region));
    os.flip_lam = mask_of(lam, term.b);
    os.crosses_delta = !lattice::regions_disjoint(term.b_prime(), delta);
    outer_sets.push_back(os);
  }
  std::sort(outer_sets.begin(), outer_sets.end(),
            [](const OuterSet& a, const OuterSet& b) { return region_less(a.term->b, b.term->b); });

  // classical terms not touching delta, over the outer region
  std::vector<std::pair<std::uint64_t, double>> w_terms;
  for (const auto& [a, j] : phi.classical) {
    if (!lattice::region_subset(a, lam)) continue;
    if (!lattice::regions_disjoint(a, delta)) continue;
    w_terms.push_back({mask_of(outer_region, a), j});
  }
  auto w_outer = [&](std::uint64_t mask) {
    double e = 0.0;
    for (const auto& [bits, j] : w_terms) e -= j * sign_of(mask, bits);
    return e;
  };

  InnerChain chain(phi, delta, lam);
  const AlgebraElement unit = groupoid::identity(chain.spec());
  const LocalEvaluator unit_eval(unit, lam);

  struct OuterMark {
    double t;
    const OuterSet* set;
  };

  double a_num = 0.0, a_den = 0.0, a_var_num = 0.0, a_var_den = 0.0, a_cov = 0.0;
  for (std::uint64_t sigma_out = 0; sigma_out < (std::uint64_t{1} << n_out); ++sigma_out) {
    double sx = 0.0, sz = 0.0, sxx = 0.0, szz = 0.0, sxz = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
      RngStream rng(seed + 0x5bd1e995,
                    sigma_out * static_cast<std::uint64_t>(n_samples) * 4 +
                        static_cast<std::uint64_t>(i));
      std::vector<OuterMark> marks;
      for (const OuterSet& os : outer_sets) {
        const int count = rng.next_poisson(beta);
        for (int k = 0; k < count; ++k) marks.push_back({rng.next_uniform(), &os});
      }
      std::stable_sort(marks.begin(), marks.end(), [](const OuterMark& x, const OuterMark& y) {
        if (x.t != y.t) return x.t < y.t;
        return region_less(x.set->term->b, y.set->term->b);
      });

      // outer walk; the inner chain advances through the same time grid
      std::uint64_t mask_out = sigma_out;
      double exponent = 0.0;
      double product = 1.0;
      double prev = 0.0;
      std::uint64_t g_bc_full = 0;  // over lambda bits
      linalg::CMatrix acc_chain;
      bool chain_started = false;
      auto outer_to_lam = [&](std::uint64_t m) {
        std::uint64_t out = 0;
        for (std::size_t k = 0; k < n_out; ++k) {
          if ((m >> k) & 1) out |= (std::uint64_t{1} << lam.index_of(outer_region[k]));
        }
        return out;
      };
      for (const OuterMark& m : marks) {
        exponent += (m.t - prev) * w_outer(mask_out);
        const linalg::CMatrix k = chain.interval(beta * (m.t - prev), outer_to_lam(mask_out));
        acc_chain = chain_started ? (k * acc_chain) : k;
        chain_started = true;
        mask_out ^= m.set->flip_outer;
        g_bc_full ^= m.set->flip_lam;
        if (m.set->crosses_delta) {
          acc_chain = chain.mark_operator(*m.set->term, outer_to_lam(mask_out)) * acc_chain;
        } else {
          // f_B reads only the outer configuration here; stoquastic, so real
          Complex fb{0.0, 0.0};
          for (const auto& [a, c] : m.set->term->coeffs)
            fb += c * sign_of(mask_out, mask_of(outer_region, a));
          product *= fb.real();
        }
        prev = m.t;
      }
      exponent += (1.0 - prev) * w_outer(mask_out);
      {
        const linalg::CMatrix k = chain.interval(beta * (1.0 - prev), outer_to_lam(mask_out));
        acc_chain = chain_started ? (k * acc_chain) : k;
      }
      const double w_out = product * std::exp(-beta * exponent);

      // inner density over all start configurations and buckets
      const AlgebraElement inner = groupoid::element_from_matrix(chain.spec(), acc_chain);
      // assemble N_delta(f) and N_delta(1): config on lambda = (eta_delta,
      // outer final), group = compose(bucket, g_bc_full)
      const std::uint64_t outer_final_lam = outer_to_lam(mask_out);
      double nf = 0.0, n1 = 0.0;
      for (std::uint64_t sigma_d = 0; sigma_d < chain.spec()->order(); ++sigma_d) {
        for (std::uint64_t b = 0; b < chain.spec()->order(); ++b) {
          const double d_val = inner.at(b, sigma_d).real();
          if (d_val == 0.0) continue;
          // eta on lambda: delta sites from b sigma_d, outer sites final
          std::uint64_t eta_lam = outer_final_lam;
          std::uint64_t b_in_lam = 0;
          {
            const std::uint64_t eta_d = sigma_d ^ b;
            for (std::size_t k = 0; k < delta.size(); ++k) {
              const std::size_t li = static_cast<std::size_t>(lam.index_of(delta[k]));
              if ((eta_d >> k) & 1) eta_lam |= (std::uint64_t{1} << li);
              if ((b >> k) & 1) b_in_lam |= (std::uint64_t{1} << li);
            }
          }
          const std::uint64_t composed = b_in_lam ^ g_bc_full;
          nf += d_val * evaluator.eval(eta_lam, composed, -1).real();
          n1 += d_val * unit_eval.eval(eta_lam, composed, -1).real();
        }
      }
      const double x = w_out * nf;
      const double z = w_out * n1;
      sx += x;
      sz += z;
      sxx += x * x;
      szz += z * z;
      sxz += x * z;
    }
    const double n = static_cast<double>(n_samples);
    a_num += sx / n;
    a_den += sz / n;
    a_var_num += std::max(0.0, sxx / n - (sx / n) * (sx / n)) / n;
    a_var_den += std::max(0.0, szz / n - (sz / n) * (sz / n)) / n;
    a_cov += (sxz / n - (sx / n) * (sz / n)) / n;
  }
  const double est_a = a_num / a_den;
  const double se_a = std::sqrt(std::max(
      0.0, (a_var_num - 2.0 * est_a * a_cov + est_a * est_a * a_var_den) / (a_den * a_den)));

  Estimate out;
  out.value = est_a - est_b;
  out.stderr_ = std::sqrt(se_a * se_a + se_b * se_b);
  out.n_samples = n_samples;
  out.seed = seed;
  return out;
}

Classification classify(const Interaction& phi) {
  Classification out;
  out.stoquastic = true;
  for (const JumpTerm& term : phi.jumps) {
    const Region loc = term.localization();
    const std::size_t n = loc.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Complex fb{0.0, 0.0};
      for (const auto& [a, c] : term.coeffs) {
        fb += c * sign_of(mask, mask_of(loc, a));
      }
      if (std::abs(fb.imag()) > 1e-12 || fb.real() < -1e-12) {
        out.stoquastic = false;
        break;
      }
    }
    if (!out.stoquastic) break;
  }
  out.admissible_known = out.stoquastic;
  return out;
}

}  // namespace stoqlab::qgibbs
