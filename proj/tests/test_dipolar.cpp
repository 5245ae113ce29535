#include "doctest.h"

#include "fermidark/dipolar.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

using namespace fermidark;

TEST_CASE("spherical basis adapted to an axis") {
  for (const Eigen::Vector3d& axis :
       {Eigen::Vector3d::UnitZ().eval(), Eigen::Vector3d::UnitX().eval(),
        Eigen::Vector3d(0.3, -0.4, 0.5).normalized().eval()}) {
    const auto sb = SphericalBasis::around(axis);
    CHECK((sb.ez - axis).norm() < 1e-14);
    // Right-handed orthonormal Cartesian frame.
    CHECK(std::abs(sb.ex.norm() - 1.0) < 1e-14);
    CHECK(std::abs(sb.ex.dot(sb.ey)) < 1e-14);
    CHECK((sb.ex.cross(sb.ey) - sb.ez).norm() < 1e-13);

    // Unit spherical vectors, mutually orthogonal, resolving the identity.
    Eigen::Matrix3cd completeness = Eigen::Matrix3cd::Zero();
    for (int q = -1; q <= 1; ++q) {
      CHECK(std::abs(sb.e(q).norm() - 1.0) < 1e-14);
      for (int qp = -1; qp < q; ++qp)
        CHECK(std::abs(sb.e(q).dot(sb.e(qp))) < 1e-14);
      completeness += sb.e(q) * sb.e(q).adjoint();
    }
    CHECK((completeness - Eigen::Matrix3cd::Identity()).norm() < 1e-13);
    CHECK((sb.e(0) - axis.cast<std::complex<double>>()).norm() < 1e-14);
  }
}

TEST_CASE("vacuum Green tensor limits and symmetry") {
  const TransitionSpec spec{1.0, 1.0};

  // The imaginary part tends to (gamma/2) * Identity at small separation.
  const Eigen::Vector3d tiny(1e-4, 5e-5, -7e-5);
  const Eigen::Matrix3cd g_small = green_tensor(tiny, spec);
  CHECK((g_small.imag() - 0.5 * Eigen::Matrix3d::Identity()).norm() < 1e-6);

  // Symmetric complex matrix, even under r -> -r.
  const Eigen::Vector3d r(0.8, -0.3, 1.2);
  const Eigen::Matrix3cd g = green_tensor(r, spec);
  CHECK((g - g.transpose()).norm() < 1e-14);
  CHECK((g - green_tensor(-r, spec)).norm() < 1e-14);

  // Far field decays like 1/r along the leading dyad.
  const Eigen::Vector3d far = 200.0 * Eigen::Vector3d(1, 0, 0);
  CHECK(green_tensor(far, spec).norm() < 1e-2);

  CHECK_THROWS_AS((void)green_tensor(Eigen::Vector3d::Zero(), spec),
                  std::domain_error);
}

TEST_CASE("onsite trap integral") {
  const TransitionSpec spec{1.0, 1.0};

  // Isotropic trap: exact zero.
  CHECK(std::abs(onsite_U(TrapGeometry{0.1, 0.1}, spec)) < 1e-12);

  // Frozen reference value (pancake of the opposite aspect is negative).
  CHECK(onsite_U(TrapGeometry{0.07, 0.13}, spec) ==
        doctest::Approx(-32.21995764562562).epsilon(1e-12));
  CHECK(onsite_U(TrapGeometry{0.13, 0.07}, spec) > 0.0);

  // Onsite tensors: ImG = (gamma/2) Id; ReG traceless along the lattice axis.
  const auto t = onsite_tensors(TrapGeometry{0.13, 0.07}, spec);
  CHECK((t.im_g - 0.5 * Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(std::abs(t.re_g.trace()) < 1e-10);

  CHECK_THROWS_AS((void)onsite_U(TrapGeometry{0.0, 0.1}, spec),
                  std::domain_error);
}

TEST_CASE("onsite maxima and depth ratios") {
  const auto mx = onsite_maxima();
  CHECK(mx.ratio_perp_over_z == doctest::Approx(1.6630185).epsilon(2e-4));
  CHECK(mx.ratio_z_over_perp == doctest::Approx(2.1814013).epsilon(2e-4));
  CHECK(mx.depth_ratio_pancake == doctest::Approx(7.64871).epsilon(3e-4));
  CHECK(mx.depth_ratio_cigar == doctest::Approx(22.64343).epsilon(3e-4));
  CHECK(mx.u_at_perp_max > 0.0);
  CHECK(mx.u_at_z_max < 0.0);
  CHECK(std::abs(mx.u_at_z_max) > std::abs(mx.u_at_perp_max));
  // Depth ratios are the fourth power of the width ratios.
  CHECK(mx.depth_ratio_pancake ==
        doctest::Approx(std::pow(mx.ratio_perp_over_z, 4)).epsilon(1e-10));
  CHECK(mx.depth_ratio_cigar ==
        doctest::Approx(std::pow(mx.ratio_z_over_perp, 4)).epsilon(1e-10));
}

TEST_CASE("onsite depth scaling law") {
  // Frozen reference values.
  CHECK(u_scaling(1.0, 1.0, 100.0, 13.17, 0.0) ==
        doctest::Approx(0.647151709304632).epsilon(1e-12));
  CHECK(u_scaling(1.0, 1.0, 13.17, 100.0, 0.0) ==
        doctest::Approx(-0.9311343332516892).epsilon(1e-12));

  // Scaling exponent in the depth product at fixed anisotropy: 3/8 exactly.
  const double s = std::pow(13.17 / 100.0, 0.25);
  const double u1 = u_scaling(1.0, 1.0, 100.0, 13.17, s);
  const double u2 = u_scaling(1.0, 1.0, 900.0, 9.0 * 13.17, s);
  const double slope = std::log(u2 / u1) / std::log(81.0);  // product x 81
  CHECK(slope == doctest::Approx(3.0 / 8.0).epsilon(1e-12));

  // Cubic wavelength prefactor.
  CHECK(u_scaling(2.0, 1.0, 100.0, 13.17, s) ==
        doctest::Approx(8.0 * u1).epsilon(1e-12));

  // Consistency with the direct trap integral.
  const double lambda_L = 1.0;
  const auto geom = TrapGeometry::from_depths(lambda_L, 100.0, 13.17);
  const TransitionSpec spec{1.0, 2.0 * M_PI / 1.0};
  CHECK(onsite_U(geom, spec) == doctest::Approx(u1).epsilon(1e-10));
}

TEST_CASE("interaction tensor structure") {
  const TransitionSpec spec{1.0, 1.0};

  // Single site, onsite override: algebraic single-site values.
  SiteArray one;
  one.positions = {Eigen::Vector3d::Zero()};
  const double U = 2.0;
  const auto t1 = interaction_tensor(one, TrapGeometry{}, spec, U);
  CHECK(t1.site_count == 1);
  CHECK((t1.I - 0.5 * Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-14);
  // ReG = (3/4) U (1 - 3 ez ez): spherical diagonal (0.75U, -1.5U, 0.75U).
  CHECK(std::abs(t1.r(0, -1, 0, -1) - 0.75 * U) < 1e-12);
  CHECK(std::abs(t1.r(0, 0, 0, 0) + 1.5 * U) < 1e-12);
  CHECK(std::abs(t1.r(0, 1, 0, 1) - 0.75 * U) < 1e-12);
  CHECK(std::abs(t1.r(0, 1, 0, -1)) < 1e-12);

  // Two sites: Hermitian R and I, positive semidefinite I.
  SiteArray two;
  two.positions = {Eigen::Vector3d::Zero(), Eigen::Vector3d(1.3, 0.4, -0.7)};
  two.quantization_axis = Eigen::Vector3d(0.2, 0.1, 1.0).normalized();
  const auto t2 = interaction_tensor(two, TrapGeometry{}, spec, 0.5);
  CHECK(t2.R.rows() == 6);
  CHECK((t2.R - t2.R.adjoint()).norm() < 1e-12);
  CHECK((t2.I - t2.I.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t2.I);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  // Coincident distinct sites are rejected.
  SiteArray bad;
  bad.positions = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  CHECK_THROWS_AS((void)interaction_tensor(bad, TrapGeometry{}, spec, 0.0),
                  std::domain_error);
}
