#include "fermidark/dipolar.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace fermidark {

namespace {
constexpr double kPi = 3.14159265358979323846;
using Complex = std::complex<double>;
}  // namespace

TrapGeometry TrapGeometry::from_depths(double lambda_L, double nu_z,
                                       double nu_perp,
                                       Eigen::Vector3d lattice_axis) {
  if (lambda_L <= 0 || nu_z <= 0 || nu_perp <= 0)
    throw std::domain_error("TrapGeometry::from_depths: all inputs must be > 0");
  TrapGeometry g;
  g.ell_z = lambda_L / std::sqrt(8.0 * kPi * kPi * std::sqrt(nu_z));
  g.ell_perp = lambda_L / std::sqrt(8.0 * kPi * kPi * std::sqrt(nu_perp));
  g.lattice_axis = lattice_axis.normalized();
  return g;
}

SphericalBasis SphericalBasis::around(const Eigen::Vector3d& axis) {
  const double norm = axis.norm();
  if (norm <= 0) throw std::domain_error("SphericalBasis: zero axis");
  SphericalBasis b;
  b.ez = axis / norm;
  const Eigen::Vector3d ref = std::abs(b.ez.z()) < 0.9
                                  ? Eigen::Vector3d::UnitZ()
                                  : Eigen::Vector3d::UnitX();
  b.ex = (ref - ref.dot(b.ez) * b.ez).normalized();
  b.ey = b.ez.cross(b.ex);
  return b;
}

Eigen::Vector3cd SphericalBasis::e(int q) const {
  const Eigen::Vector3cd x = ex.cast<Complex>();
  const Eigen::Vector3cd y = ey.cast<Complex>();
  switch (q) {
    case 0:
      return ez.cast<Complex>();
    case +1:
      return -(x + Complex(0, 1) * y) / std::sqrt(2.0);
    case -1:
      return (x - Complex(0, 1) * y) / std::sqrt(2.0);
    default:
      throw std::domain_error("SphericalBasis::e: q must be -1, 0, or +1");
  }
}

Eigen::Matrix3cd green_tensor(const Eigen::Vector3d& r,
                              const TransitionSpec& spec) {
  const double dist = r.norm();
  if (dist <= 0)
    throw std::domain_error("green_tensor: r = 0 (onsite handled separately)");
  const double x = spec.k0 * dist;
  const Eigen::Vector3d rhat = r / dist;
  const Eigen::Matrix3d rr = rhat * rhat.transpose();
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  const Complex eix = std::exp(Complex(0, x));
  Eigen::Matrix3cd g =
      (id - rr).cast<Complex>() * (eix / x) +
      (id - 3.0 * rr).cast<Complex>() * (Complex(0, 1) * eix / (x * x) -
                                         eix / (x * x * x));
  return 0.75 * spec.gamma * g;
}

namespace {

// Anisotropy integral J(s) = Integral_{-1}^{1} (3x^2-1)/[(s^2-1)x^2+1]^{3/2} dx
// (the onsite integrand with ell_perp scaled out).
double anisotropy_integral(double s2_minus_1) {
  auto f = [s2_minus_1](double x) {
    const double base = s2_minus_1 * x * x + 1.0;
    return (3.0 * x * x - 1.0) / (base * std::sqrt(base));
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, -1.0, 1.0, 15, 1e-14);
}

}  // namespace

double onsite_U(const TrapGeometry& geom, const TransitionSpec& spec) {
  if (geom.ell_z <= 0 || geom.ell_perp <= 0)
    throw std::domain_error("onsite_U: trap widths must be > 0");
  const double lp2 = geom.ell_perp * geom.ell_perp;
  const double lz2 = geom.ell_z * geom.ell_z;
  // 1/(24 sqrt(pi) k0^3) Int (3x^2-1)/[(lz^2-lp^2)x^2+lp^2]^{3/2}
  //   = J(s) / (24 sqrt(pi) k0^3 lp^3) with s = lz/lp.
  const double j = anisotropy_integral((lz2 - lp2) / lp2);
  const double k0 = spec.k0;
  return j / (24.0 * std::sqrt(kPi) * k0 * k0 * k0 * lp2 * geom.ell_perp);
}

OnsiteTensors onsite_tensors(const TrapGeometry& geom,
                             const TransitionSpec& spec) {
  const double u = onsite_U(geom, spec);
  const Eigen::Vector3d axis = geom.lattice_axis.normalized();
  OnsiteTensors t;
  t.re_g = 0.75 * spec.gamma * u *
           (Eigen::Matrix3d::Identity() - 3.0 * axis * axis.transpose());
  t.im_g = 0.5 * spec.gamma * Eigen::Matrix3d::Identity();
  return t;
}

double onsite_u_shape(double shape_ratio) {
  if (shape_ratio <= 0)
    throw std::domain_error("onsite_u_shape: shape_ratio must be > 0");
  const double s = shape_ratio;
  return std::sqrt(2.0) * s * std::sqrt(s) *
         anisotropy_integral(s * s - 1.0) / (12.0 * std::sqrt(kPi));
}

double u_scaling(double lambda0, double lambda_L, double nu_z, double nu_perp,
                 double shape_ratio) {
  if (lambda0 <= 0 || lambda_L <= 0 || nu_z <= 0 || nu_perp <= 0)
    throw std::domain_error("u_scaling: all inputs must be > 0");
  // shape_ratio <= 0 requests the harmonic-trap value ell_z/ell_perp
  // implied by the depths.
  if (shape_ratio <= 0) shape_ratio = std::pow(nu_perp / nu_z, 0.25);
  const double prefactor = std::pow(lambda0 / lambda_L, 3.0) *
                           std::pow(nu_z * nu_perp, 0.375);
  return prefactor * onsite_u_shape(shape_ratio);
}

OnsiteMaxima onsite_maxima(double fixed_width, const TransitionSpec& spec) {
  if (fixed_width <= 0)
    throw std::domain_error("onsite_maxima: fixed_width must be > 0");
  constexpr int kBits = 45;

  // Pancake side: ell_z fixed, maximize U > 0 over ratio = ell_perp / ell_z.
  auto neg_u_pancake = [&](double ratio) {
    TrapGeometry g;
    g.ell_z = fixed_width;
    g.ell_perp = ratio * fixed_width;
    return -onsite_U(g, spec);
  };
  // Cigar side: ell_perp fixed, |U| maximal with U < 0 over ell_z / ell_perp.
  auto u_cigar = [&](double ratio) {
    TrapGeometry g;
    g.ell_perp = fixed_width;
    g.ell_z = ratio * fixed_width;
    return onsite_U(g, spec);
  };

  const auto [r_pan, neg_u_pan] =
      boost::math::tools::brent_find_minima(neg_u_pancake, 1.0, 10.0, kBits);
  const auto [r_cig, u_cig] =
      boost::math::tools::brent_find_minima(u_cigar, 1.0, 10.0, kBits);

  OnsiteMaxima m;
  m.ratio_perp_over_z = r_pan;
  m.u_at_perp_max = -neg_u_pan;
  m.ratio_z_over_perp = r_cig;
  m.u_at_z_max = u_cig;
  m.depth_ratio_pancake = std::pow(r_pan, 4.0);
  m.depth_ratio_cigar = std::pow(r_cig, 4.0);
  return m;
}

InteractionTensor interaction_tensor(const SiteArray& sites,
                                     const TrapGeometry& geom,
                                     const TransitionSpec& spec,
                                     std::optional<double> onsite_U_override) {
  const int n = static_cast<int>(sites.positions.size());
  if (n < 1) throw std::domain_error("interaction_tensor: no sites");

  const SphericalBasis sph = SphericalBasis::around(sites.quantization_axis);
  Eigen::Vector3cd e[3] = {sph.e(-1), sph.e(0), sph.e(+1)};

  double u = 0.0;
  if (onsite_U_override) {
    u = *onsite_U_override;
  } else if (geom.ell_z > 0 && geom.ell_perp > 0) {
    u = onsite_U(geom, spec);
  }
  const Eigen::Vector3d axis = geom.lattice_axis.normalized();
  const Eigen::Matrix3d re_onsite =
      0.75 * spec.gamma * u *
      (Eigen::Matrix3d::Identity() - 3.0 * axis * axis.transpose());
  const Eigen::Matrix3d im_onsite =
      0.5 * spec.gamma * Eigen::Matrix3d::Identity();

  InteractionTensor t;
  t.site_count = n;
  t.R = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
  t.I = Eigen::MatrixXcd::Zero(3 * n, 3 * n);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Eigen::Matrix3cd re, im;
      if (i == j) {
        re = re_onsite.cast<Complex>();
        im = im_onsite.cast<Complex>();
      } else {
        const Eigen::Vector3d dr =
            (sites.positions[static_cast<std::size_t>(i)] -
             sites.positions[static_cast<std::size_t>(j)]) /
            spec.k0;
        if (dr.norm() <= 0)
          throw std::domain_error("interaction_tensor: coincident sites");
        const Eigen::Matrix3cd g = green_tensor(dr, spec);
        re = g.real().cast<Complex>();
        im = g.imag().cast<Complex>();
      }
      for (int q = -1; q <= 1; ++q) {
        for (int qp = -1; qp <= 1; ++qp) {
          const Complex rv = e[q + 1].dot(re * e[qp + 1]);
          const Complex iv = e[q + 1].dot(im * e[qp + 1]);
          t.R(i * 3 + q + 1, j * 3 + qp + 1) = rv;
          t.I(i * 3 + q + 1, j * 3 + qp + 1) = iv;
        }
      }
    }
  }
  return t;
}

}  // namespace fermidark
