#pragma once

// Non-Hermitian eigenanalysis of the effective Hamiltonian per quantum-number
// sector: eigenmode extraction with angular-momentum labeling, decay-rate
// grouping, and numerical dark-state detection via null spaces.

#include "fermidark/fock.hpp"
#include "fermidark/liouvillian.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fermidark {

struct EigenMode {
  double energy = 0.0;  // epsilon_k: Re(lambda_k)
  double decay = 0.0;   // gamma_k = -2 Im(lambda_k), >= 0 up to tolerance
  Eigen::VectorXcd vector;  // right eigenvector, unit norm
  int n_excited = 0;
  std::optional<int> twice_m;          // absent when the sector mixes M
  std::optional<HalfInt> f;            // absent when <F^2> fails to snap
  std::optional<HalfInt> f_g;          // ground-manifold label when resolved
  double f_residual = 0.0;             // |<F^2> - F(F+1)| of the snap
};

struct DecayGroup {
  double decay = 0.0;
  int multiplicity = 0;
  std::vector<HalfInt> f_values;  // one entry per (2F+1) block in the group
  bool f_consistent = false;      // multiplicity == sum of (2F+1)
};

struct DarkCount {
  int n_excited = 0;
  int twice_m = 0;
  int count = 0;
};

struct SpectrumReport {
  LevelStructure level_structure{HalfInt::whole(0), HalfInt::whole(0),
                                 StructureClass::MultiSquare};
  int n = 0;
  double u_onsite = 0.0;
  std::vector<EigenMode> modes;
  std::vector<DecayGroup> groups;
  std::vector<DarkCount> dark_counts;

  int total_darks() const;
  int darks_at(int n_excited) const;
};

// Right eigenmodes of a sector-restricted effective Hamiltonian. Degenerate
// eigenvalue groups are rotated into a simultaneous eigenbasis of F^2 (then
// Fg^2 within each F subspace) so labels are deterministic; <F^2> must snap to
// F(F+1) within 1e-6 or the mode is reported F-unresolved.
std::vector<EigenMode> eigenmodes(const Eigen::MatrixXcd& h_eff_sector,
                                  const SectorBasis& sector_basis);

// gamma_k = Tr[L_rec(|k><k|)] = 2 Sum_k w_k ||J_k v||^2; equals -2 Im(lambda).
double decay_rate_via_recycling(const Eigen::VectorXcd& mode,
                                const GeneratorSet& gens);

// Orthonormal dark vectors (columns) of the constrained (n_e, M) sector:
// the common null space of every lowering operator D-_{i,q}, found by
// singular-value thresholding at 1e-10 * sigma_max.
Eigen::MatrixXcd find_dark_states(const SectorBasis& sector_basis);

// Groups modes by decay rate (relative tolerance 1e-7, merging with a warning
// when groups are closer than the tolerance) and checks that each group's
// size decomposes into (2F+1) blocks.
SpectrumReport classify(std::vector<EigenMode> modes,
                        const SectorBasis& basis,
                        double u_onsite);

// Full single-site pipeline: per-(n_e, M) eigenmodes of H_eff with onsite
// coefficient u (lattice axis aligned with the quantization axis, so M is
// conserved), dark counts from null spaces, decay-rate grouping.
SpectrumReport full_spectrum(const LevelStructure& ls, int n, double u_onsite);

// Independent-decay reference: the decay rate of the Fock state `w` when
// every interference term is switched off (I restricted to i = j, q = q',
// and no cross terms between distinct transitions):
// rate = gamma * Sum_{q,m} (C^q_m)^2 n_e(m+q) (1 - n_g(m)).
double pauli_blocked_rate(const SectorBasis& basis, FockWord w);

}  // namespace fermidark
