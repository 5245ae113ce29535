#pragma once

// Master-equation generators: the effective non-Hermitian Hamiltonian, the
// recycling (jump) structure, the full Lindblad right-hand side, and the
// driving Hamiltonians (single laser, Raman-effective, Zeeman).
//
// Units: energies and rates in units of gamma, positions in units of 1/k0,
// and hbar = 1 throughout.

#include "fermidark/dipolar.hpp"
#include "fermidark/fock.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace fermidark {

struct DriveSpec {
  double rabi = 0.0;                 // Omega
  Eigen::Vector3cd polarization = Eigen::Vector3cd::UnitZ();  // unit norm
  double detuning = 0.0;             // Delta (not applied by the bare laser
                                     // term; see zeeman_hamiltonian)
  double phase = 0.0;                // phi
  Eigen::Vector3d k_L = Eigen::Vector3d::Zero();  // laser wavevector, units k0
};

struct RamanDriveSpec {
  HalfInt f_s;                       // intermediate manifold spin
  double omega1 = 0.0, omega2 = 0.0; // leg Rabi frequencies
  Eigen::Vector3cd pol1 = Eigen::Vector3cd::UnitZ();
  Eigen::Vector3cd pol2 = Eigen::Vector3cd::UnitZ();
  double delta = 1.0;                // intermediate-state detuning
  double phase1 = 0.0, phase2 = 0.0;
};

struct ZeemanDriveSpec {
  double delta_z = 0.0;  // Zeeman splitting between adjacent excited sublevels
  double delta = 0.0;    // laser detuning
  double rabi = 0.0;
  Eigen::Vector3cd polarization = Eigen::Vector3cd::UnitZ();
};

// One collective jump channel: recycling contributes 2 * weight * J rho J†.
struct JumpOperator {
  double weight = 0.0;
  Eigen::MatrixXcd matrix;
};

struct GeneratorSet {
  Eigen::MatrixXcd h_eff;    // non-Hermitian, drives excluded
  Eigen::MatrixXcd h_drive;  // Hermitian (zero matrix when undriven)
  std::vector<JumpOperator> jumps;
  const SectorBasis* basis = nullptr;

  Eigen::MatrixXcd h_total() const { return h_eff + h_drive; }
};

// H_eff = -Sum_{i,j,q,q'} (R + iI)^{ij}_{qq'} D+_{i,q} D-_{j,q'} on `basis`.
// The basis must span complete (n_e, M) content for the products to act
// within it (an unconstrained basis always works; constrained bases must be
// closed under D+_q D-_q' for the nonzero tensor components).
Eigen::MatrixXcd build_h_eff(const SectorBasis& basis,
                             const InteractionTensor& tensor);

// Jump channels of the recycling term. When I is diagonal over (i, q) the
// channels are the bare lowering operators with the diagonal weights;
// otherwise I is eigendecomposed and channels with weight below
// 1e-12 * max-weight are dropped.
std::vector<JumpOperator> build_jump_operators(const SectorBasis& basis,
                                               const InteractionTensor& tensor);

GeneratorSet make_generators(const SectorBasis& basis,
                             const InteractionTensor& tensor,
                             Eigen::MatrixXcd h_drive = {});

// d rho / dt = -i (H rho - rho H†) + 2 Sum_k w_k J_k rho J_k†,
// with H = h_eff + h_drive. Trace-free and Hermiticity-preserving.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const GeneratorSet& gens);

// H_L = -Sum_{i,m,n} [Omega_{e_m g_n} e^{i k_L . r_i} sigma^{(i)}_{e_m g_n}
//                     + h.c.],
// Omega_{e_m g_n} = Omega e^{i phi} C^{m-n}_n (e*_{m-n} . eps_L).
// Spherical components are taken about the z axis of the frame the
// polarization is expressed in. Positions in units of 1/k0; one position per
// site (defaults to the origin for a single site).
Eigen::MatrixXcd single_laser_hamiltonian(
    const SectorBasis& basis, const DriveSpec& drive,
    const std::vector<Eigen::Vector3d>& site_positions = {});

// H_Raman = +Sum_{m,n} [Omega^eff_{mn} sigma_{e_m g_n} + h.c.] with
// Omega^eff_{mn} = Sum_k conj(Omega^(2)_{s_k e_m}) Omega^(1)_{s_k g_n} / Delta
// after adiabatic elimination of the intermediate f_s manifold. Warns on
// stderr (and returns a zero matrix) when no dipole-allowed path exists, and
// warns when |Delta| is not large against the leg Rabi frequencies.
Eigen::MatrixXcd raman_hamiltonian(const SectorBasis& basis,
                                   const RamanDriveSpec& drive);

// Laser part identical in form to single_laser_hamiltonian, plus the diagonal
// excited-state term Sum_{i,m} (m delta_z - delta) sigma^{(i)}_{e_m e_m}.
Eigen::MatrixXcd zeeman_hamiltonian(const SectorBasis& basis,
                                    const ZeemanDriveSpec& drive);

}  // namespace fermidark
