#pragma once

// Analytic dark-state pipeline: multiplet enumeration per excitation sector,
// decay-channel counting under the linear-independence rule, dark-count
// prediction (states minus channels, floored at zero), the stretched-state
// shortcut for n = 3, and explicit dark superpositions in the coupled basis.

#include "fermidark/angular.hpp"
#include "fermidark/fock.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fermidark {

// One source multiplet of the (n, n_e) sector: g-subset momentum F_g coupled
// with e-subset momentum F_e to total F.
struct MultipletLabel {
  HalfInt f_g;  // total momentum of the n - n_e ground fermions
  HalfInt f_e;  // total momentum of the n_e excited fermions
  HalfInt f;    // total F
  int multiplicity = 1;
};

struct CensusFamily {
  HalfInt f;      // total F shared by the family
  int states = 0;    // multiplets available at (n, n_e) with this F
  int channels = 0;  // independent decay equations into (n, n_e - 1)
  int darks = 0;     // max(0, states - channels)
};

struct CensusCell {
  int twice_m = 0;
  int states = 0;    // Sum over families with F >= |M| of multiplet counts
  int channels = 0;  // Sum over families of min(states_F, channels_F)
  int darks = 0;     // Sum over families of max(0, states_F - channels_F)
};

struct SectorCensus {
  LevelStructure level_structure{HalfInt::whole(0), HalfInt::whole(0),
                                 StructureClass::MultiSquare};
  int n = 0;
  int n_excited = 0;
  std::vector<MultipletLabel> multiplets;  // source multiplets of the sector
  std::vector<CensusFamily> families;      // per-F bookkeeping
  std::vector<CensusCell> cells;           // per-M table, ascending M

  int total_darks() const;
  int total_states() const;
};

// Census of the (n, n_e) sector: sources from coupling the Pauli-allowed
// g-subset and e-subset multiplets, targets at n_e - 1, channels counted per
// total F under the selection rules dF in {0, +-1} with 0 -> 0 forbidden.
// Distinct-F sources are assumed independent (the rule is a lower bound on
// darks; verify_census cross-checks it numerically).
SectorCensus census(const LevelStructure& ls, int n, int n_excited);

// The n = 4 sectors run through the same machinery (two-stage pair coupling);
// kept as a named entry point for the double-excited bookkeeping.
SectorCensus census_n4(const LevelStructure& ls, int n_excited);

// Always-dark stretched multiplets for n = 3 (empty for MultiLambda, and for
// structures too small to hold 3 ground fermions).
struct StretchedMultiplet {
  HalfInt f_g;
  HalfInt f;
};
std::vector<StretchedMultiplet> stretched_dark_rule(const LevelStructure& ls);

// Dark superposition over the coupled-basis states sharing (n_e, F, M):
// the null vector of the stacked lowering operators restricted to that span.
struct DarkVector {
  bool is_dark = false;          // false = the span is bright (no null vector)
  Eigen::VectorXcd coefficients; // over the selected coupled states, unit norm
  std::vector<CoupledVector> span;  // the coupled states, in deterministic order
  int n_excited = 0;
  HalfInt f;
  HalfInt m;
  double residual = 0.0;  // max ||D-_q v|| over q
};

DarkVector solve_superposition(const LevelStructure& ls, int n, int n_excited,
                               HalfInt f, HalfInt m);

// Census prediction vs numerical null-space dimension, per (n_e, M).
struct CensusCheckRow {
  int n_excited = 0;
  int twice_m = 0;
  int predicted = 0;
  int numerical = 0;
  bool match = false;
};

struct CensusVerification {
  std::vector<CensusCheckRow> rows;
  bool all_match = true;
  std::vector<std::string> discrepancies;  // human-readable flags, one per cell
};

// Runs census across every n_e in [1, n] and compares against
// spectrum::find_dark_states dimension per (n_e, M). A mismatch is reported
// as a flagged discrepancy (the analytic rule is an estimate), never thrown.
CensusVerification verify_census(const LevelStructure& ls, int n);

}  // namespace fermidark
