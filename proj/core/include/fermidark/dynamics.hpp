#pragma once

// Time integration of the driven master equation and the named preparation
// experiments (Raman and Zeeman schemes), plus the multi-site product-dark
// stationarity check.

#include "fermidark/fock.hpp"
#include "fermidark/liouvillian.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fermidark {

enum class Scheme { FreeDecay, Raman, Zeeman, MultiSiteCheck };

struct ExperimentConfig {
  LevelStructure level_structure{HalfInt::whole(1), HalfInt::whole(1),
                                 StructureClass::MultiSquare};
  int n = 2;
  Scheme scheme = Scheme::FreeDecay;
  std::optional<RamanDriveSpec> raman;
  std::optional<ZeemanDriveSpec> zeeman;
  std::string initial_state;            // parse_state syntax (see below)
  std::vector<std::string> tracked;     // extra tracked states; defaults added
  double u_onsite = 0.0;
  double t_max = 1.0;                   // units of 1/gamma
  int samples = 200;
  std::optional<double> dt_override;    // integrator step, units of 1/gamma
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> populations;  // [name index][sample]
  double trace_drift = 0.0;      // max |tr rho - 1| over samples
  double positivity_floor = 0.0; // min eigenvalue of rho over samples
  double dt = 0.0;               // step actually used

  const std::vector<double>& population(const std::string& name) const;
  double max_population(const std::string& name) const;
};

// A named observable: population = Re tr(P rho) with P either a pure-state
// projector (vector set) or a basis-diagonal projector (indices set).
struct TrackedState {
  std::string name;
  Eigen::VectorXcd vector;        // pure state, used when size() > 0
  std::vector<long> indices;      // else: diagonal projector on these states
};

// Fixed-step RK4 on the density matrix. The step is
//   dt = min(0.01, 0.01 / ||h_drive||_2, 0.001 / max|diag shift|)
// unless overridden; convergence is checked by the test suite via step
// halving. Sampling times are the uniform grid over [0, t_max]; dt is rounded
// down so an integer number of steps lands exactly on each sample. Throws
// std::runtime_error if the step underflows, and refuses bases whose squared
// dimension exceeds 2^26.
TimeSeries integrate(const Eigen::MatrixXcd& rho0, const GeneratorSet& gens,
                     const std::vector<TrackedState>& tracked, double t_max,
                     int samples, std::optional<double> dt_override = {});

// Parses an initial/tracked state descriptor on a single-site basis:
//   "G"         all-ground n = 2 pair |g_{-f} g_{+f}>  (shorthand for G_f)
//   "G_{m}"     |g_{-m} g_{+m}>, m a half-integer literal, n = 2 only
//   "S"         symmetric bright partner (f_g = f_e = 1/2, n = 2 only)
//   "D_{m}"     the unique dark state at (n_e = 1, M = m); error if the
//               sector has no dark state or more than one
//   "ee"        diagonal projector on the n_e = 2 subspace
//   "ne=k"      diagonal projector on the n_e = k subspace
//   "fock:a,b"  explicit occupied levels, e.g. "fock:g-5/2,g-1/2"
Eigen::VectorXcd parse_state(const std::string& descriptor,
                             const SectorBasis& basis);
TrackedState make_tracked(const std::string& descriptor,
                          const SectorBasis& basis);

// Named experiment runners. Both build the single-site generators with the
// configured onsite coefficient, add the scheme's drive, pick the default
// tracked set {initial, S (when defined), target dark state, ee}, and
// integrate. Exploits the conserved-ladder block structure when the drive
// polarization is a pure spherical component and the interaction tensor is
// q-diagonal; falls back to the dense integrator otherwise.
TimeSeries run_raman(const ExperimentConfig& config);
TimeSeries run_zeeman(const ExperimentConfig& config);
TimeSeries run_free_decay(const ExperimentConfig& config);
TimeSeries run_experiment(const ExperimentConfig& config);

// Product-dark-state stationarity across an array: per-site states (by
// parse_state descriptor, "D_{m}" / "G_{m}" / "fock:...") are tensored, the
// full-array Lindblad map is applied once, and the residuals reported.
struct MultisiteReport {
  double lindblad_residual = 0.0;  // ||L(|psi><psi|)||_F
  double h_residual = 0.0;         // ||Re(H_eff) |psi>|| (coherent part)
  double decay_rate = 0.0;         // Tr L_rec, equals 2 sum_k w_k ||J_k psi||^2
  bool stationary = false;         // both residuals below 1e-9
};

MultisiteReport multisite_dark_check(const SiteArray& sites,
                                     const LevelStructure& ls, int n_per_site,
                                     const std::vector<std::string>& states);

}  // namespace fermidark
