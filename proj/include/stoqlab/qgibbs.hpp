#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "stoqlab/contours.hpp"
#include "stoqlab/groupoid.hpp"
#include "stoqlab/rng.hpp"
#include "stoqlab/stats.hpp"

namespace stoqlab::qgibbs {

using contours::SpinConfig;
using groupoid::AlgebraElement;
using groupoid::Complex;
using groupoid::SpecPtr;
using lattice::Point;
using lattice::Region;

// Short-range q = 2 interaction split into a classical part and quantum jump
// terms: H = -sum_A J_A sigma_A^(3) - sum_B f_B sigma_B^(1), with each
// f_B = sum_A c_{A,B} sigma_A^(3).
struct JumpTerm {
  Region b;  // nonempty flip set
  std::vector<std::pair<Region, Complex>> coeffs;
  Region localization() const;  // union of the coefficient sets
  Region b_prime() const;       // b together with the localization
  // f_B at a configuration (sites looked up through the callable, +-1)
  Complex evaluate(const std::function<int(const Point&)>& spin) const;
};

struct Interaction {
  std::vector<std::pair<Region, double>> classical;  // (A, J_A)
  std::vector<JumpTerm> jumps;
  int range = 1;

  // self-adjointness: c_{A,B} real for even |A cap B|, imaginary for odd;
  // locality: diam(A cup B) within range
  void validate() const;
};

// canonical test models
Interaction tfim(const Region& sites, double coupling, double field);  // nearest-neighbor
struct HeisenbergCouplings {
  double j1 = 0.0, j2 = 0.0, j3 = 0.0;  // sigma^1, sigma^2, sigma^3 pair terms
  double eps = 0.0, rho = 0.0, h = 0.0;  // on-site sigma^1, sigma^2, sigma^3
};
Interaction heisenberg_type(const Region& sites, const HeisenbergCouplings& c);

struct SplitHamiltonian {
  std::vector<double> h0;        // -sum_{A in Lambda} J_A sigma_A, per config mask
  std::vector<JumpTerm> jump_terms;  // the f_B with B in Lambda
};
SplitHamiltonian split_hamiltonian(const Interaction& phi, const Region& lam);

// H_Lambda as a groupoid element (empty boundary); requires every term to be
// localized inside lam
AlgebraElement hamiltonian_element(const Interaction& phi, const Region& lam);
// (Id (x) ev_omega)(H + W): classical terms partially evaluated, quantum
// terms with flips outside lam dropped
AlgebraElement classical_bc_hamiltonian(const Interaction& phi, const Region& lam,
                                        const SpinConfig& omega);

// e^{-beta H} through the regular representation and the matrix exponential
AlgebraElement exact_density(const Interaction& phi, const Region& lam, double beta);
AlgebraElement exact_density_of(const AlgebraElement& hamiltonian, double beta);
// the displayed Lie-Trotter product at finite n, assembled by convolution
AlgebraElement trotter_density(const Interaction& phi, const Region& lam, double beta, int n,
                               bool allow_large_step = false);

// ---- paths ----------------------------------------------------------------

struct Jump {
  double t = 0.0;
  Region b;
};

struct JumpPath {
  Region domain;                 // sites the path lives on
  std::uint64_t initial = 0;     // config mask at t = 0 (bit set = spin -1)
  std::vector<Jump> jumps;       // strictly increasing times in (0,1)

  void validate() const;
  std::uint64_t config_at(double t) const;  // cadlag trajectory
  std::uint64_t final_config() const;
};

// Canonical representative of the Lambda^c-equivalence class: the marks whose
// B' meets the complement of lambda, plus the outside configuration.
struct BoundaryPath {
  Region lambda;            // the volume the condition is for
  std::vector<Jump> jumps;  // strictly increasing times
  SpinConfig omega;         // configuration on the complement (with default)
};
BoundaryPath boundary_condition_of(const Interaction& phi, const Region& lam,
                                   const std::vector<Jump>& marks, SpinConfig omega);

JumpPath concat_paths(const JumpPath& p, const JumpPath& q, double c);
JumpPath reverse_path(const JumpPath& p);
BoundaryPath concat_paths(const BoundaryPath& p, const BoundaryPath& q, double c);
BoundaryPath reverse_path(const BoundaryPath& p);
bool paths_equal(const JumpPath& p, const JumpPath& q, double time_tol = 1e-12);

// d_2: initial-configuration distance for jump-free pairs, order-paired time
// and configuration averages for equal jump counts, 1 otherwise
double path_metric(const JumpPath& p, const JumpPath& q);

// independent Poisson marks of intensity beta per jump set, merged and
// sorted by (time, set)
std::vector<Jump> sample_path(const Region& lam_r, double beta,
                              const std::vector<Region>& jump_sets, RngStream& rng);

// ---- Monte Carlo estimators -----------------------------------------------

// Fixed volume with the free (empty boundary) Hamiltonian.
class PppSampler {
 public:
  PppSampler(const Interaction& phi, Region lam);

  const Region& volume() const { return lam_; }
  int n_jump_sets() const { return static_cast<int>(sets_.size()); }
  double h0(std::uint64_t mask) const;
  double h0_max_abs() const;
  double v_max_abs() const;  // max over B of sup |f_B|

  struct Draw {
    std::uint64_t g_total = 0;
    Complex weight{0.0, 0.0};
    int n_marks = 0;
  };
  Draw draw(std::uint64_t sigma_mask, double beta, RngStream& rng) const;
  // deterministic weight of a fixed mark sequence against a given arrow
  Complex path_weight(std::uint64_t sigma_mask, std::uint64_t g_mask,
                      const std::vector<Jump>& marks, double beta) const;
  const std::vector<Region>& jump_sets() const { return set_regions_; }

 private:
  friend class BoundarySampler;
  struct CompiledJump {
    std::uint64_t flip = 0;
    std::vector<std::pair<std::uint64_t, Complex>> coeffs;
  };
  Region lam_;
  std::vector<CompiledJump> sets_;
  std::vector<Region> set_regions_;
  std::vector<std::pair<std::uint64_t, double>> h0_terms_;
};

Estimate ppp_density_mc(const Interaction& phi, const Region& lam, double beta,
                        std::uint64_t sigma_mask, std::uint64_t g_mask, std::int64_t n_samples,
                        std::uint64_t seed);

struct SeriesResult {
  Complex value{0.0, 0.0};
  double tail_bound = 0.0;
};
SeriesResult ppp_density_series(const Interaction& phi, const Region& lam, double beta,
                                std::uint64_t sigma_mask, std::uint64_t g_mask, int max_order,
                                int quad_nodes = 24);

// Fixed volume inside its range-R halo with a path boundary condition.
class BoundarySampler {
 public:
  BoundarySampler(const Interaction& phi, Region lam, BoundaryPath bc);

  const Region& volume() const { return lam_; }
  const Region& halo() const { return lam_r_; }
  int n_interior_sets() const { return static_cast<int>(interior_.n_jump_sets()); }
  // group element the boundary path applies, over the halo sites
  std::uint64_t boundary_flip_full() const { return bc_flip_full_; }
  std::uint64_t boundary_flip_on_lambda() const;

  struct Draw {
    std::uint64_t g_on_lambda = 0;  // net flip restricted to lambda
    Complex weight{0.0, 0.0};
  };
  Draw draw(std::uint64_t sigma_lambda_mask, double beta, RngStream& rng) const;
  Complex merged_weight(std::uint64_t sigma_lambda_mask, const std::vector<Jump>& interior_marks,
                        double beta, std::uint64_t* g_lambda_out) const;

  std::uint64_t lambda_mask_bits() const { return lambda_bits_; }
  const PppSampler& interior() const { return interior_; }

 private:
  Region lam_;
  Region lam_r_;
  BoundaryPath bc_;
  PppSampler interior_;  // compiled over the halo; restricted to B' in lambda
  std::vector<PppSampler::CompiledJump> interior_sets_;
  std::vector<Region> interior_regions_;
  struct BoundaryMark {
    double t = 0.0;
    std::uint64_t flip = 0;
    bool weighted = false;  // B' meets lambda, so its f factor belongs here
    const JumpTerm* term = nullptr;
  };
  std::vector<BoundaryMark> bc_marks_;
  std::vector<std::pair<std::uint64_t, double>> h0w_terms_;  // A with A cap lambda nonempty
  std::uint64_t lambda_bits_ = 0;
  std::uint64_t bc_flip_full_ = 0;
  std::uint64_t initial_outside_ = 0;  // omega on the halo, as mask bits
  const Interaction* phi_ = nullptr;

  double h0w(std::uint64_t halo_mask) const;
};

// termwise audit used by the stoquastic positivity criterion
struct TermAudit {
  double min_real = 0.0;
  double max_imag_abs = 0.0;
  std::int64_t n_terms = 0;
};

Estimate boundary_density_mc(const Interaction& phi, const Region& lam, double beta,
                             const BoundaryPath& bc, std::uint64_t sigma_mask,
                             std::uint64_t g_mask, std::int64_t n_samples, std::uint64_t seed,
                             TermAudit* audit = nullptr);

Estimate path_partition_function(const Interaction& phi, const Region& lam, double beta,
                                 const BoundaryPath& bc, std::int64_t n_samples,
                                 std::uint64_t seed, TermAudit* audit = nullptr);

// Finite volume path Gibbs functional; the numerator and the partition
// function share every draw, so the identity observable gives exactly one.
Estimate path_gibbs(const Interaction& phi, const Region& lam, double beta,
                    const BoundaryPath& bc, const AlgebraElement& f, std::int64_t n_samples,
                    std::uint64_t seed);

// Two-stage consistency residual at an empty outer boundary for stoquastic
// interactions: outer samples induce path boundary conditions for delta, the
// inner stage is evaluated exactly by time-ordered matrix products.
Estimate consistency_check_mc(const Interaction& phi, const Region& lam, const Region& delta,
                              double beta, const AlgebraElement& f, std::int64_t n_samples,
                              std::uint64_t seed);

struct Classification {
  bool stoquastic = false;
  bool admissible_known = false;  // true means admissible = yes (by stoquasticity)
};
Classification classify(const Interaction& phi);

// helpers shared with the CLI and tests
std::uint64_t mask_of(const Region& frame, const Region& subset);
std::vector<double> h0_table(const Interaction& phi, const Region& lam);

}  // namespace stoqlab::qgibbs
