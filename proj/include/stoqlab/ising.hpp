#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "stoqlab/contours.hpp"
#include "stoqlab/lattice.hpp"
#include "stoqlab/rng.hpp"

namespace stoqlab::ising {

using contours::Contour;
using contours::PartitionParams;
using contours::SpinConfig;
using lattice::Point;
using lattice::Region;

struct CouplingSpec {
  double J = 1.0;
  double alpha = 3.0;           // decay exponent, > d
  bool nearest_neighbor = false;  // J on |x-y| = 1 only

  double at(const Point& x, const Point& y) const;
};

struct FieldSpec {
  double h_star = 0.0;
  double delta = 1.0;
  double truncation_R = 0.0;  // zero field inside |x| < R; 0 = untruncated

  double at(const Point& x) const;
};

struct EnergyBracket {
  double lower = 0.0;
  double upper = 0.0;
};

// Finite box with fixed outside spin; pair couplings inside the box are kept
// exactly, the coupling to the complement is truncated at l1 radius `cutoff`
// per site with an analytic tail bound.
class System {
 public:
  System(Region box, int outside_spin, CouplingSpec cs, FieldSpec fs, int cutoff);

  const Region& box() const { return box_; }
  int outside_spin() const { return outside_; }
  std::size_t size() const { return box_.size(); }
  double tail_bound_per_site() const { return tail_per_site_; }

  double energy(const SpinConfig& sigma) const;
  double energy_state(const std::vector<std::int8_t>& spins) const;
  double energy_mask(std::uint64_t mask) const;  // bit i set = spin +1 at box[i]
  // energy change of flipping site i
  double flip_delta(std::uint64_t mask, std::size_t i) const;
  double flip_delta_state(const std::vector<std::int8_t>& spins, std::size_t i) const;

  double pair(std::size_t i, std::size_t j) const { return pair_[i * n_ + j]; }
  double site_field(std::size_t i) const { return field_[i]; }
  double boundary_sum(std::size_t i) const { return boundary_[i]; }

 private:
  Region box_;
  int outside_;
  CouplingSpec cs_;
  FieldSpec fs_;
  int cutoff_;
  std::size_t n_;
  double tail_per_site_;
  std::vector<double> pair_;      // n x n coupling table
  std::vector<std::vector<std::pair<int, double>>> neighbors_;  // nonzero couplings per site
  std::vector<double> boundary_;  // sum of couplings to the truncated complement
  std::vector<double> field_;
};

double hamiltonian(const SpinConfig& sigma, int omega_outside, const CouplingSpec& cs,
                   const FieldSpec& fs, int cutoff);

// F_Lambda = sum of couplings across the boundary; bracket collapses for
// nearest-neighbor couplings where F = J |edge boundary| exactly.
EnergyBracket surface_energy(const Region& r, const CouplingSpec& cs, int cutoff);

double field_sum(const Region& r, const FieldSpec& fs);
// sum_x h_x <= c5 |r|^{1 - delta/d} with the closed-form c5 (delta < d)
bool field_bound_check(const Region& r, const FieldSpec& fs);

struct GibbsTable {
  std::vector<double> probability;  // indexed by spin bitmask
  double log_partition = 0.0;
};
// exact enumeration; budget 2^{|box|} <= 2^20
GibbsTable gibbs_exact(const Region& box, int omega, double beta, const CouplingSpec& cs,
                       const FieldSpec& fs, int cutoff);

using Observable = std::function<double(const SpinConfig&)>;

// |mu_box(mu_sub(f)) - mu_box(f)|, both sides by exact enumeration
double dlr_residual(const Region& box, const Region& sub, int omega, double beta,
                    const CouplingSpec& cs, const FieldSpec& fs, const Observable& f, int cutoff);

// H^-(sigma) - H^-(tau_gamma(sigma)) at zero field
double contour_energy_gap(const SpinConfig& sigma, const Contour& gamma, const CouplingSpec& cs,
                          int cutoff);
// gap >= c2|gamma| + c3 F_{I+}.lower + c4 F_{sp}.lower; nullopt when M is
// below the threshold that validates the constants
std::optional<bool> contour_gap_bound_check(double gap, const Contour& gamma,
                                            const CouplingSpec& cs, const PartitionParams& p,
                                            int d, int cutoff);

struct PeierlsResult {
  double exact = 0.0;           // nu^-(sigma_0 = +1), exact enumeration
  double contour_bound = 0.0;   // union bound with per-contour ratio weights
  std::int64_t n_conditioned = 0;
  std::int64_t n_contours = 0;
};
// Conditioned measure nu^-: all inner-boundary sites -correct. The bound
// enumerates external minus-contours with the origin in their volume and sums
// 2^{|gamma|} e^{-beta mingap} Z^-(box minus sp) / Z^-(box).
PeierlsResult peierls_probability(const Region& box, double beta, const CouplingSpec& cs,
                                  const FieldSpec& fs, const PartitionParams& p, int cutoff);

// single-site Metropolis chain; deterministic given seed
SpinConfig metropolis_sample(const Region& box, int omega, double beta, const CouplingSpec& cs,
                             const FieldSpec& fs, std::int64_t steps, std::uint64_t seed);
// acceptance probability used by the chain, exposed for the balance test
double metropolis_acceptance(const System& sys, std::uint64_t mask, std::size_t site, double beta);

}  // namespace stoqlab::ising
