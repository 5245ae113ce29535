#pragma once

// Electromagnetic interaction coefficients: the vacuum dyadic Green's tensor,
// the polarization-projected coefficient maps R and I, and the onsite trap
// coefficients (axially symmetric trap integral, depth scaling law, maxima).
//
// Conventions: the spontaneous-emission rate gamma is the unit of energy;
// positions are measured in units of 1/k0. Spherical basis vectors are
// unit-norm: e_0 = axis, e_± = ∓(e_x ± i e_y)/√2, so Σ_q e_q ⊗ e_q* = 1.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace fermidark {

struct TransitionSpec {
  double gamma = 1.0;  // spontaneous-emission rate (energy unit)
  double k0 = 1.0;     // transition wavenumber (inverse-length unit)
};

struct TrapGeometry {
  double ell_perp = 0.0;  // radial 1/e width of the Wannier density
  double ell_z = 0.0;     // axial width, along lattice_axis
  Eigen::Vector3d lattice_axis = Eigen::Vector3d::UnitZ();

  // Builds widths from lattice depths: ell_n^2 = lambda_L^2 / (8 pi^2 sqrt(nu_n)).
  static TrapGeometry from_depths(double lambda_L, double nu_z, double nu_perp,
                                  Eigen::Vector3d lattice_axis =
                                      Eigen::Vector3d::UnitZ());
};

struct SiteArray {
  std::vector<Eigen::Vector3d> positions;  // in units of 1/k0
  Eigen::Vector3d quantization_axis = Eigen::Vector3d::UnitZ();
};

// Unit-norm spherical basis adapted to `axis` (returned columns: e_-1, e_0,
// e_+1). The transverse frame is completed deterministically: the reference
// vector is world-z unless |axis.z| > 0.9, in which case world-x.
struct SphericalBasis {
  Eigen::Vector3cd e(int q) const;  // q in {-1, 0, +1}
  Eigen::Vector3d ex, ey, ez;       // right-handed orthonormal frame, ez = axis

  static SphericalBasis around(const Eigen::Vector3d& axis);
};

// Vacuum dyadic Green's tensor at physical separation r (not scaled by k0),
// in units of gamma. Throws std::domain_error at r = 0.
Eigen::Matrix3cd green_tensor(const Eigen::Vector3d& r, const TransitionSpec& spec);

// Onsite integral U(k0, ell): the motional average of Re G over the Wannier
// density of an axially symmetric trap,
//   U = 1/(24 sqrt(pi) k0^3) * Integral_{-1}^{1} dx (3x^2-1) /
//       [(ell_z^2 - ell_perp^2) x^2 + ell_perp^2]^{3/2}.
double onsite_U(const TrapGeometry& geom, const TransitionSpec& spec);

// Onsite coefficient tensors: ReG = (3 gamma / 4) U (1 - 3 e_L ⊗ e_L),
// ImG = (gamma / 2) * Identity.
struct OnsiteTensors {
  Eigen::Matrix3d re_g;
  Eigen::Matrix3d im_g;
};
OnsiteTensors onsite_tensors(const TrapGeometry& geom, const TransitionSpec& spec);

// Closed-form depth scaling: U = (lambda0/lambda_L)^3 (nu_z nu_perp)^{3/8}
// * Utilde(s) with s = shape_ratio = ell_z / ell_perp = (nu_perp / nu_z)^{1/4}.
double u_scaling(double lambda0, double lambda_L, double nu_z, double nu_perp,
                 double shape_ratio);

// Shape function Utilde(s) of the scaling law (dimensionless).
double onsite_u_shape(double shape_ratio);

// Maxima of |U| over the trap anisotropy.
struct OnsiteMaxima {
  double ratio_perp_over_z;   // argmax at fixed ell_z (pancake side), U > 0
  double u_at_perp_max;       // U at that maximum for ell_z = ell_z_ref
  double ratio_z_over_perp;   // argmax at fixed ell_perp (cigar side), U < 0
  double u_at_z_max;          // U at that maximum for ell_perp = ell_perp_ref
  double depth_ratio_pancake; // nu_z/nu_perp at the pancake maximum (= ratio^4)
  double depth_ratio_cigar;   // nu_perp/nu_z at the cigar maximum (= ratio^4)
};
OnsiteMaxima onsite_maxima(double fixed_width = 0.1,
                           const TransitionSpec& spec = {});

// Polarization-projected coefficient maps over an array of sites:
//   R[(i,q),(j,q')] = e_q* . Re G^{ij} . e_q',
//   I[(i,q),(j,q')] = e_q* . Im G^{ij} . e_q',
// stored as 3N x 3N complex matrices with flat index site*3 + (q+1). Both are
// Hermitian; I is positive semidefinite. Off-site blocks use the point-dipole
// Green's tensor at r_i - r_j; onsite blocks use the trap-averaged tensors
// (onsite_U_override bypasses the geometry integral when set).
struct InteractionTensor {
  Eigen::MatrixXcd R;
  Eigen::MatrixXcd I;
  int site_count = 0;

  std::complex<double> r(int i, int q, int j, int qp) const {
    return R(i * 3 + q + 1, j * 3 + qp + 1);
  }
  std::complex<double> imag(int i, int q, int j, int qp) const {
    return I(i * 3 + q + 1, j * 3 + qp + 1);
  }
};

InteractionTensor interaction_tensor(const SiteArray& sites,
                                     const TrapGeometry& geom,
                                     const TransitionSpec& spec,
                                     std::optional<double> onsite_U_override = {});

}  // namespace fermidark
