#include "fermidark/liouvillian.hpp"

#include "fermidark/angular.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>

namespace fermidark {

namespace {

using Complex = std::complex<double>;

// Lowering operators for every (site, q), dense, flat index site*3 + (q+1).
// On a fully unconstrained basis the square (drop) form is exact; for
// constrained bases the caller goes through intermediate sector bases.
std::vector<Eigen::MatrixXcd> dense_lowering_all(const SectorBasis& basis) {
  std::vector<Eigen::MatrixXcd> d;
  d.reserve(static_cast<std::size_t>(3 * basis.site_count()));
  for (int site = 0; site < basis.site_count(); ++site)
    for (int q = -1; q <= 1; ++q)
      d.push_back(lowering_operator(site, q, basis).dense());
  return d;
}

bool is_unconstrained(const SectorBasis& b) {
  return !b.constraints().n_excited && !b.constraints().twice_total_m;
}

double max_offdiagonal_q(const Eigen::MatrixXcd& m, int sites) {
  double worst = 0.0;
  for (int i = 0; i < sites; ++i)
    for (int j = 0; j < sites; ++j)
      for (int q = -1; q <= 1; ++q)
        for (int qp = -1; qp <= 1; ++qp)
          if (q != qp)
            worst = std::max(worst, std::abs(m(i * 3 + q + 1, j * 3 + qp + 1)));
  return worst;
}

}  // namespace

Eigen::MatrixXcd build_h_eff(const SectorBasis& basis,
                             const InteractionTensor& tensor) {
  if (tensor.site_count != basis.site_count())
    throw std::invalid_argument("build_h_eff: tensor/basis site count mismatch");
  const int sites = basis.site_count();
  const long dim = static_cast<long>(basis.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const Eigen::MatrixXcd g = tensor.R + Complex(0, 1) * tensor.I;

  const bool m_constrained = basis.constraints().twice_total_m.has_value();
  if (m_constrained) {
    // An M-restricted sector is invariant only when the tensor is diagonal in
    // q; the intermediate (one fewer excitation, M - q) sector is explicit.
    const double offdiag = max_offdiagonal_q(g, sites);
    if (offdiag > 1e-15 * std::max(1.0, g.cwiseAbs().maxCoeff()))
      throw std::domain_error(
          "build_h_eff: M-restricted basis requires a q-diagonal interaction "
          "tensor (aligned lattice axis or U = 0)");
    for (int q = -1; q <= 1; ++q) {
      SectorConstraints mid_c = basis.constraints();
      if (mid_c.n_excited) mid_c.n_excited = *mid_c.n_excited - 1;
      mid_c.twice_total_m = *mid_c.twice_total_m - 2 * q;
      if (mid_c.n_excited && *mid_c.n_excited < 0) continue;
      const SectorBasis mid =
          SectorBasis::build(basis.level_structure(), basis.n_per_site(),
                             basis.site_count(), mid_c);
      std::vector<Eigen::MatrixXcd> low(static_cast<std::size_t>(sites));
      for (int i = 0; i < sites; ++i)
        low[static_cast<std::size_t>(i)] =
            lowering_operator(i, q, mid, basis).dense();
      for (int i = 0; i < sites; ++i)
        for (int j = 0; j < sites; ++j)
          h.noalias() -= g(i * 3 + q + 1, j * 3 + q + 1) *
                         (low[static_cast<std::size_t>(i)].adjoint() *
                          low[static_cast<std::size_t>(j)]);
    }
    return h;
  }

  // M unconstrained: one intermediate space serves every q.
  std::vector<Eigen::MatrixXcd> low;
  low.reserve(static_cast<std::size_t>(3 * sites));
  if (is_unconstrained(basis)) {
    low = dense_lowering_all(basis);
  } else {
    SectorConstraints mid_c = basis.constraints();
    if (mid_c.n_excited) mid_c.n_excited = *mid_c.n_excited - 1;
    const SectorBasis mid =
        (mid_c.n_excited && *mid_c.n_excited < 0)
            ? SectorBasis::build(basis.level_structure(), basis.n_per_site(),
                                 basis.site_count(),
                                 SectorConstraints{-1, {}})
            : SectorBasis::build(basis.level_structure(), basis.n_per_site(),
                                 basis.site_count(), mid_c);
    for (int site = 0; site < sites; ++site)
      for (int q = -1; q <= 1; ++q)
        low.push_back(lowering_operator(site, q, mid, basis).dense());
  }
  for (int a = 0; a < 3 * sites; ++a)
    for (int b = 0; b < 3 * sites; ++b) {
      if (g(a, b) == Complex(0, 0)) continue;
      h.noalias() -= g(a, b) * (low[static_cast<std::size_t>(a)].adjoint() *
                                low[static_cast<std::size_t>(b)]);
    }
  return h;
}

std::vector<JumpOperator> build_jump_operators(const SectorBasis& basis,
                                               const InteractionTensor& tensor) {
  if (tensor.site_count != basis.site_count())
    throw std::invalid_argument(
        "build_jump_operators: tensor/basis site count mismatch");
  const int dim = 3 * basis.site_count();
  const std::vector<Eigen::MatrixXcd> low = dense_lowering_all(basis);

  std::vector<JumpOperator> jumps;
  const double max_diag = tensor.I.diagonal().cwiseAbs().maxCoeff();

  double offdiag = 0.0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      if (a != b) offdiag = std::max(offdiag, std::abs(tensor.I(a, b)));

  if (offdiag <= 1e-14 * std::max(1.0, max_diag)) {
    // Diagonal I: the bare lowering operators are the jump channels.
    for (int a = 0; a < dim; ++a) {
      const double w = tensor.I(a, a).real();
      if (w > 1e-12 * max_diag)
        jumps.push_back({w, low[static_cast<std::size_t>(a)]});
    }
    return jumps;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(tensor.I);
  const double w_max = es.eigenvalues().cwiseAbs().maxCoeff();
  for (int k = 0; k < dim; ++k) {
    const double w = es.eigenvalues()(k);
    if (w <= 1e-12 * w_max) continue;
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(static_cast<long>(basis.size()),
                                                static_cast<long>(basis.size()));
    for (int b = 0; b < dim; ++b) {
      const Complex coeff = std::conj(es.eigenvectors()(b, k));
      if (std::abs(coeff) > 0)
        j.noalias() += coeff * low[static_cast<std::size_t>(b)];
    }
    jumps.push_back({w, std::move(j)});
  }
  return jumps;
}

GeneratorSet make_generators(const SectorBasis& basis,
                             const InteractionTensor& tensor,
                             Eigen::MatrixXcd h_drive) {
  GeneratorSet gens;
  gens.basis = &basis;
  gens.h_eff = build_h_eff(basis, tensor);
  const long dim = static_cast<long>(basis.size());
  gens.h_drive = h_drive.size() == 0 ? Eigen::MatrixXcd::Zero(dim, dim)
                                     : std::move(h_drive);
  if (gens.h_drive.rows() != dim || gens.h_drive.cols() != dim)
    throw std::invalid_argument("make_generators: drive dimension mismatch");
  gens.jumps = build_jump_operators(basis, tensor);
  return gens;
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                              const GeneratorSet& gens) {
  if (rho.rows() != gens.h_eff.rows() || rho.cols() != gens.h_eff.cols())
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  const Eigen::MatrixXcd h = gens.h_eff + gens.h_drive;
  Eigen::MatrixXcd rhs = Complex(0, -1) * (h * rho - rho * h.adjoint());
  for (const JumpOperator& j : gens.jumps)
    rhs.noalias() += 2.0 * j.weight * (j.matrix * rho * j.matrix.adjoint());
  return rhs;
}

Eigen::MatrixXcd single_laser_hamiltonian(
    const SectorBasis& basis, const DriveSpec& drive,
    const std::vector<Eigen::Vector3d>& site_positions) {
  const LevelStructure& ls = basis.level_structure();
  const long dim = static_cast<long>(basis.size());
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dim, dim);
  if (drive.rabi == 0.0) return t;

  if (!site_positions.empty() &&
      static_cast<int>(site_positions.size()) != basis.site_count())
    throw std::invalid_argument(
        "single_laser_hamiltonian: one position per site required");

  const SphericalBasis sph = SphericalBasis::around(Eigen::Vector3d::UnitZ());
  const Complex amp_global = drive.rabi * std::exp(Complex(0, drive.phase));

  for (int site = 0; site < basis.site_count(); ++site) {
    const Eigen::Vector3d r = site_positions.empty()
                                  ? Eigen::Vector3d::Zero()
                                  : site_positions[static_cast<std::size_t>(site)];
    const Complex phase_site = std::exp(Complex(0, drive.k_L.dot(r)));
    for (int q = -1; q <= 1; ++q) {
      const Complex pol = sph.e(q).dot(drive.polarization);  // e_q* . eps_L
      if (std::abs(pol) < 1e-15) continue;
      for (int tn = -ls.f_g.twice(); tn <= ls.f_g.twice(); tn += 2) {
        const HalfInt n = HalfInt::from_twice(tn);
        const HalfInt m = n + HalfInt::whole(q);
        if (m.abs() > ls.f_e) continue;
        const double c = cq(ls, q, n);
        if (c == 0.0) continue;
        const Eigen::MatrixXcd raise =
            sigma(site, {Orbital::e, m}, {Orbital::g, n}, basis).dense();
        t.noalias() += (amp_global * phase_site * c * pol) * raise;
      }
    }
  }
  return -(t + t.adjoint().eval());
}

Eigen::MatrixXcd raman_hamiltonian(const SectorBasis& basis,
                                   const RamanDriveSpec& drive) {
  const LevelStructure& ls = basis.level_structure();
  const long dim = static_cast<long>(basis.size());
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dim, dim);

  const int d_g = std::abs(drive.f_s.twice() - ls.f_g.twice());
  const int d_e = std::abs(drive.f_s.twice() - ls.f_e.twice());
  if (d_g > 2 || d_e > 2) {
    std::cerr << "[fermidark] warning: Raman intermediate f_s = "
              << drive.f_s.str()
              << " is not dipole-coupled to both manifolds; drive is zero\n";
    return t;
  }
  if (drive.delta == 0.0)
    throw std::domain_error("raman_hamiltonian: delta must be nonzero");
  const double leg_max = std::max(std::abs(drive.omega1), std::abs(drive.omega2));
  if (std::abs(drive.delta) < 10.0 * leg_max)
    std::cerr << "[fermidark] warning: Raman detuning |delta| = "
              << std::abs(drive.delta)
              << " is not large against the leg Rabi frequencies (max "
              << leg_max << "); adiabatic elimination may be inaccurate\n";

  const SphericalBasis sph = SphericalBasis::around(Eigen::Vector3d::UnitZ());
  const Complex a1 =
      drive.omega1 * std::exp(Complex(0, drive.phase1));
  const Complex a2 =
      drive.omega2 * std::exp(Complex(0, drive.phase2));

  bool any_path = false;
  for (int site = 0; site < basis.site_count(); ++site) {
    for (int tm = -ls.f_e.twice(); tm <= ls.f_e.twice(); tm += 2) {
      const HalfInt m = HalfInt::from_twice(tm);
      for (int tn = -ls.f_g.twice(); tn <= ls.f_g.twice(); tn += 2) {
        const HalfInt n = HalfInt::from_twice(tn);
        // Omega^eff_mn = Sum_k conj(Omega2_{s_k e_m}) Omega1_{s_k g_n} / Delta
        Complex om_eff = 0.0;
        for (int tk = -drive.f_s.twice(); tk <= drive.f_s.twice(); tk += 2) {
          const HalfInt k = HalfInt::from_twice(tk);
          const int q1 = (tk - tn) / 2;
          const int q2 = (tk - tm) / 2;
          if ((tk - tn) % 2 != 0 || std::abs(q1) > 1 || std::abs(q2) > 1)
            continue;
          const double c1 = clebsch_gordan(ls.f_g, n, HalfInt::whole(1),
                                           HalfInt::whole(q1), drive.f_s, k);
          const double c2 = clebsch_gordan(ls.f_e, m, HalfInt::whole(1),
                                           HalfInt::whole(q2), drive.f_s, k);
          if (c1 == 0.0 || c2 == 0.0) continue;
          const Complex p1 = sph.e(q1).dot(drive.pol1);
          const Complex p2 = sph.e(q2).dot(drive.pol2);
          om_eff += std::conj(a2 * c2 * p2) * (a1 * c1 * p1);
        }
        om_eff /= drive.delta;
        if (std::abs(om_eff) < 1e-15) continue;
        any_path = true;
        const Eigen::MatrixXcd raise =
            sigma(site, {Orbital::e, m}, {Orbital::g, n}, basis).dense();
        t.noalias() += om_eff * raise;
      }
    }
  }
  if (!any_path)
    std::cerr << "[fermidark] warning: no dipole-allowed Raman path for the "
                 "given polarizations; drive is zero\n";
  return t + t.adjoint().eval();
}

Eigen::MatrixXcd zeeman_hamiltonian(const SectorBasis& basis,
                                    const ZeemanDriveSpec& drive) {
  const LevelStructure& ls = basis.level_structure();
  DriveSpec laser;
  laser.rabi = drive.rabi;
  laser.polarization = drive.polarization;
  Eigen::MatrixXcd h = single_laser_hamiltonian(basis, laser);

  // Diagonal term Sum_{i,m} (m delta_z - delta) sigma^{(i)}_{e_m e_m}.
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    FockWord w = basis.state(idx);
    double shift = 0.0;
    while (w != 0) {
      const int pos = std::countr_zero(w);
      const SingleParticleLevel lvl = basis.level_at(pos);
      if (lvl.orbital == Orbital::e)
        shift += 0.5 * lvl.m.twice() * drive.delta_z - drive.delta;
      w &= w - 1;
    }
    h(static_cast<long>(idx), static_cast<long>(idx)) += shift;
  }
  return h;
}

}  // namespace fermidark
