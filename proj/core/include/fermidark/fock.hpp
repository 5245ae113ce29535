#pragma once

// Antisymmetric Fock-space machinery for n fermions distributed over the
// internal sublevels of one or more trap sites, together with the
// second-quantized operators used throughout the library: single-particle
// transfer operators, polarization-resolved lowering operators, and the
// collective angular-momentum operators F^2, F_z, Fg^2.
//
// Canonical level ordering (all fermionic signs are defined relative to it):
// within each site, ground sublevels ascending in m, then excited sublevels
// ascending in m; sites concatenated in index order. Operators acting on
// different sites are treated as commuting: atoms pinned to distinct sites are
// distinguishable by position, so no cross-site exchange sign is introduced.

#include "fermidark/angular.hpp"
#include "fermidark/halfint.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace fermidark {

enum class Orbital : std::uint8_t { g = 0, e = 1 };

struct SingleParticleLevel {
  Orbital orbital = Orbital::g;
  HalfInt m;

  friend auto operator<=>(const SingleParticleLevel&,
                          const SingleParticleLevel&) = default;
};

// One antisymmetric basis state: a bitset over the canonical level ordering.
// 64 bits bounds levels_per_site * site_count; the largest supported single
// site (f = 9/2 on both manifolds) uses 20 bits.
using FockWord = std::uint64_t;

struct SectorConstraints {
  std::optional<int> n_excited;  // total number of excited-orbital fermions
  std::optional<int> twice_total_m;  // twice the total magnetic number
};

class SectorBasis {
 public:
  // Enumerates every antisymmetric state of `n` fermions per site over
  // `site_count` sites that satisfies the constraints. The list is sorted by
  // bitset value, so indices are deterministic. An empty sector is a valid
  // (zero-state) basis.
  static SectorBasis build(const LevelStructure& ls, int n, int site_count = 1,
                           SectorConstraints constraints = {});

  const LevelStructure& level_structure() const { return ls_; }
  int n_per_site() const { return n_; }
  int site_count() const { return site_count_; }
  const SectorConstraints& constraints() const { return constraints_; }
  int levels_per_site() const { return ls_.levels_per_site(); }

  std::size_t size() const { return states_.size(); }
  FockWord state(std::size_t idx) const { return states_[idx]; }
  const std::vector<FockWord>& states() const { return states_; }

  // Position of a level in the canonical ordering (bit index within a site is
  // site-independent; the global index offsets by site * levels_per_site).
  int level_index(int site, SingleParticleLevel lvl) const;
  SingleParticleLevel level_at(int global_index) const;
  int site_of(int global_index) const { return global_index / levels_per_site(); }

  // Binary search in the sorted state list; -1 if absent.
  long index_of(FockWord w) const;

  int excitation_count(FockWord w) const;
  int twice_total_m(FockWord w) const;

 private:
  LevelStructure ls_{HalfInt::whole(0), HalfInt::whole(0),
                     StructureClass::MultiSquare};
  int n_ = 0;
  int site_count_ = 1;
  SectorConstraints constraints_{};
  std::vector<FockWord> states_;
};

// Sparse matrix between two sector bases (basis_in -> basis_out). Duplicate
// (row, col) entries are merged on construction of the triplet list.
class SparseOperator {
 public:
  struct Entry {
    long row;
    long col;
    std::complex<double> value;
  };

  SparseOperator() = default;
  SparseOperator(const SectorBasis* basis_out, const SectorBasis* basis_in,
                 std::vector<Entry> entries);

  const SectorBasis* basis_out() const { return basis_out_; }
  const SectorBasis* basis_in() const { return basis_in_; }
  const std::vector<Entry>& entries() const { return entries_; }

  long rows() const;
  long cols() const;

  Eigen::MatrixXcd dense() const;
  SparseOperator adjoint() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

 private:
  const SectorBasis* basis_out_ = nullptr;
  const SectorBasis* basis_in_ = nullptr;
  std::vector<Entry> entries_;
};

// Matrix of c†_{a_m} c_{b_n} at `site`, with the fermionic sign given by the
// parity of occupied levels between the two bit positions. The square overload
// stays within `basis`, silently dropping images that violate its constraints
// (used for drive Hamiltonians, which conserve the sector only blockwise); the
// rectangular overload maps basis_in -> basis_out and throws if an image
// satisfies basis_out's constraints but is missing from it.
SparseOperator sigma(int site, SingleParticleLevel a_m, SingleParticleLevel b_n,
                     const SectorBasis& basis);
SparseOperator sigma(int site, SingleParticleLevel a_m, SingleParticleLevel b_n,
                     const SectorBasis& basis_out, const SectorBasis& basis_in);

// D^-_{i,q} = sum_m C^q_m sigma^{(i)}_{g_m e_{m+q}}: removes one excitation and
// lowers the total magnetic number by q. The square overload acts within an
// unconstrained basis; the rectangular overload maps the (n_e, M) sector into
// the (n_e - 1, M - q) sector.
SparseOperator lowering_operator(int site, int q, const SectorBasis& basis);
SparseOperator lowering_operator(int site, int q, const SectorBasis& basis_out,
                                 const SectorBasis& basis_in);

struct TotalFOperators {
  Eigen::MatrixXcd f2;   // F^2 = F_x^2 + F_y^2 + F_z^2 over both orbitals
  Eigen::MatrixXcd fz;   // F_z
  Eigen::MatrixXcd fg2;  // F^2 restricted to the ground orbital
};

// Dense matrices of the collective angular-momentum operators on a single-site
// basis (constrained bases allowed: the operators are built on the enclosing
// M-closed space and sliced, so F^2 is exact even on an (n_e, M) slice).
TotalFOperators total_f_operators(const SectorBasis& basis);

// One member of the simultaneous eigenbasis of (n_e, F^2, F_z, Fg^2).
struct CoupledVector {
  Eigen::VectorXcd coeffs;  // in the given basis' state ordering
  int n_excited = 0;
  HalfInt f;       // total F
  HalfInt m;       // total M
  HalfInt f_g;     // ground-manifold angular momentum label
  int residual_multiplicity = 1;  // >1 when (n_e,F,M,Fg) does not resolve
};

// Simultaneous eigenbasis of (n_e, F^2, F_z, Fg^2) for a single-site sector.
// Deterministic up to a global phase per vector; degeneracies beyond the four
// labels are reported via residual_multiplicity, never an error.
std::vector<CoupledVector> coupled_basis(const SectorBasis& basis);

}  // namespace fermidark
