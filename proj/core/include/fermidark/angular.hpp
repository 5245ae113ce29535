#pragma once

#include <utility>
#include <vector>

#include "fermidark/halfint.hpp"

namespace fermidark {

// Classification of a g(f_g) <-> e(f_e) internal level structure by the
// offset of the excited-state spin: f_e = f_g - 1 ("multi-Lambda"),
// f_e = f_g ("multi-square"), f_e = f_g + 1 ("multi-V").
enum class StructureClass { MultiLambda, MultiSquare, MultiV };

const char* to_string(StructureClass c);

// Ground/excited level pair with its structure class. Root object for all
// basis construction and transition algebra.
struct LevelStructure {
  HalfInt f_g;
  HalfInt f_e;
  StructureClass cls;

  // Validates f_g, f_e >= 0 and |f_e - f_g| <= 1 (dipole-allowed pair);
  // throws std::domain_error otherwise.
  static LevelStructure make(HalfInt f_g, HalfInt f_e);

  int g_count() const { return f_g.twice() + 1; }
  int e_count() const { return f_e.twice() + 1; }
  int levels_per_site() const { return g_count() + e_count(); }
};

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
// phase convention (this convention is fixed globally for the library).
// Evaluated from the Racah sum with exact big-integer rational arithmetic
// (value = sign * sqrt(p/q)), then rounded once to double; downstream
// cancellations therefore hold to machine precision.
//
// Returns 0 when M != m1 + m2, when the triangle rule fails, or when any
// projection is out of range. Throws std::domain_error when a (j, m) pair is
// malformed (parity mismatch between 2j and 2m, or j < 0).
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                      HalfInt J, HalfInt M);

// Dipole transition coefficient C^q_m = <f_g m; 1 q | f_e m+q> for photon
// polarization q in {-1, 0, +1}: the amplitude of the decay e_{m+q} -> g_m.
// Returns 0 when |m+q| > f_e. Throws std::domain_error for q outside
// {-1,0,+1} or |m| > f_g.
double cq(const LevelStructure& ls, int q, HalfInt m);

// Multiset of total angular momenta {(F, multiplicity)} describing the
// decomposition of some sector into rotation multiplets.
struct MultipletSet {
  std::vector<std::pair<HalfInt, int>> entries;  // ascending in F

  long total_dimension() const;                  // sum of (2F+1) * mult
  int multiplicity_of(HalfInt F) const;          // 0 when F absent
};

// Allowed total angular momenta of n identical fermions occupying the 2f+1
// sublevels of a single orbital. Enumerates the Pauli-allowed occupation
// patterns, histograms the total projection M, and peels multiplets off the
// M-degeneracy profile from the top.
// Throws std::domain_error when n > 2f+1 (no state exists) or n < 0.
MultipletSet identical_fermion_multiplets(HalfInt f, int n);

// Couples every multiplet (F1, mult) in `a` to an additional spin f2 by the
// standard addition rule F in {|F1-f2|, ..., F1+f2}, merging multiplicities.
MultipletSet couple_sectors(const MultipletSet& a, HalfInt f2);

}  // namespace fermidark
