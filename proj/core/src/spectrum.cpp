#include "fermidark/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace fermidark {

namespace {

using Complex = std::complex<double>;

int snap_twice(double expectation_of_casimir, double* residual) {
  // lambda = F(F+1) -> 2F = sqrt(4 lambda + 1) - 1.
  const double tf_real = std::sqrt(std::max(0.0, 4.0 * expectation_of_casimir + 1.0)) - 1.0;
  const int tf = static_cast<int>(std::lround(tf_real));
  const double back = 0.25 * tf * (tf + 2);
  if (residual) *residual = std::abs(expectation_of_casimir - back);
  return tf;
}

}  // namespace

int SpectrumReport::total_darks() const {
  int total = 0;
  for (const DarkCount& d : dark_counts) total += d.count;
  return total;
}

int SpectrumReport::darks_at(int n_excited) const {
  int total = 0;
  for (const DarkCount& d : dark_counts)
    if (d.n_excited == n_excited) total += d.count;
  return total;
}

std::vector<EigenMode> eigenmodes(const Eigen::MatrixXcd& h_eff_sector,
                                  const SectorBasis& sector_basis) {
  const long dim = static_cast<long>(sector_basis.size());
  if (h_eff_sector.rows() != dim || h_eff_sector.cols() != dim)
    throw std::invalid_argument("eigenmodes: matrix/basis dimension mismatch");
  std::vector<EigenMode> modes;
  if (dim == 0) return modes;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h_eff_sector);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenmodes: eigendecomposition failed");

  // Sort eigenpairs by (Re, Im) for deterministic clustering.
  std::vector<long> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0L);
  const Eigen::VectorXcd& vals = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    return std::make_pair(vals(a).real(), vals(a).imag()) <
           std::make_pair(vals(b).real(), vals(b).imag());
  });

  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;

  const TotalFOperators ops = total_f_operators(sector_basis);

  // Cluster eigenvalues into single-linkage components of the tol graph,
  // then resolve each degenerate cluster into F (and Fg) eigenvectors; any
  // rotation within an exactly degenerate eigenspace is still an eigenvector
  // of H_eff. An adjacency sweep over the sorted list is not enough: when one
  // coordinate is pure roundoff noise (all real parts ~1e-16 at U = 0), the
  // sort can interleave a well-separated eigenvalue between two copies of a
  // degenerate one and split the pair.
  std::vector<long> pos_in_order(static_cast<std::size_t>(dim));
  for (std::size_t p = 0; p < order.size(); ++p)
    pos_in_order[static_cast<std::size_t>(order[p])] = static_cast<long>(p);
  std::vector<char> assigned(static_cast<std::size_t>(dim), 0);
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (assigned[static_cast<std::size_t>(order[p])]) continue;
    std::vector<long> members{order[p]};
    assigned[static_cast<std::size_t>(order[p])] = 1;
    for (std::size_t k = 0; k < members.size(); ++k) {
      for (long j = 0; j < dim; ++j) {
        if (assigned[static_cast<std::size_t>(j)]) continue;
        if (std::abs(vals(members[k]) - vals(j)) < tol) {
          assigned[static_cast<std::size_t>(j)] = 1;
          members.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end(), [&](long a, long b) {
      return pos_in_order[static_cast<std::size_t>(a)] <
             pos_in_order[static_cast<std::size_t>(b)];
    });
    const long width = static_cast<long>(members.size());

    Complex lambda = 0.0;
    Eigen::MatrixXcd vecs(dim, width);
    for (long k = 0; k < width; ++k) {
      lambda += vals(members[static_cast<std::size_t>(k)]);
      vecs.col(k) = es.eigenvectors().col(members[static_cast<std::size_t>(k)]);
    }
    lambda /= static_cast<double>(width);

    // Orthonormalize (eigenvectors of a non-normal matrix need not be
    // orthogonal within a degenerate eigenvalue).
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(vecs);
    const Eigen::MatrixXcd q =
        qr.householderQ() * Eigen::MatrixXcd::Identity(dim, width);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esf(q.adjoint() * ops.f2 * q);
    const Eigen::VectorXd fvals = esf.eigenvalues();
    const double ftol = 1e-9 * std::max(1.0, fvals.cwiseAbs().maxCoeff());

    long fb = 0;
    while (fb < width) {
      long fe = fb + 1;
      while (fe < width && fvals(fe) - fvals(fe - 1) < ftol) ++fe;
      const long fwidth = fe - fb;
      const Eigen::MatrixXcd w = q * esf.eigenvectors().middleCols(fb, fwidth);

      double f_residual = 0.0;
      const int tF = snap_twice(fvals.segment(fb, fwidth).mean(), &f_residual);

      // Resolve the ground-manifold label inside the (lambda, F) subspace;
      // it commutes with F_z, so this never mixes distinct M.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esg(w.adjoint() * ops.fg2 * w);
      for (long k = 0; k < fwidth; ++k) {
        EigenMode mode;
        mode.energy = lambda.real();
        mode.decay = -2.0 * lambda.imag();
        mode.vector = w * esg.eigenvectors().col(k);
        mode.vector.normalize();
        // Derive n_e / M per mode from expectations (robust for bases that
        // mix sectors).
        {
          double ne_exp = 0.0, m_exp = 0.0, m2_exp = 0.0;
          for (long i = 0; i < dim; ++i) {
            const double p = std::norm(mode.vector(i));
            const FockWord word = sector_basis.state(static_cast<std::size_t>(i));
            ne_exp += p * sector_basis.excitation_count(word);
            const double tm = sector_basis.twice_total_m(word);
            m_exp += p * tm;
            m2_exp += p * tm * tm;
          }
          mode.n_excited = static_cast<int>(std::lround(ne_exp));
          if (m2_exp - m_exp * m_exp < 1e-9)
            mode.twice_m = static_cast<int>(std::lround(m_exp));
        }
        mode.f_residual = f_residual;
        if (f_residual < 1e-6) mode.f = HalfInt::from_twice(tF);
        double g_residual = 0.0;
        const int tFg = snap_twice(esg.eigenvalues()(k), &g_residual);
        if (g_residual < 1e-6) mode.f_g = HalfInt::from_twice(tFg);
        modes.push_back(std::move(mode));
      }
      fb = fe;
    }
  }
  return modes;
}

double decay_rate_via_recycling(const Eigen::VectorXcd& mode,
                                const GeneratorSet& gens) {
  double rate = 0.0;
  for (const JumpOperator& j : gens.jumps)
    rate += 2.0 * j.weight * (j.matrix * mode).squaredNorm();
  return rate / mode.squaredNorm();
}

Eigen::MatrixXcd find_dark_states(const SectorBasis& sector_basis) {
  if (!sector_basis.constraints().n_excited ||
      *sector_basis.constraints().n_excited < 1)
    throw std::domain_error(
        "find_dark_states: a sector with n_e >= 1 is required");
  const long dim = static_cast<long>(sector_basis.size());
  if (dim == 0) return Eigen::MatrixXcd(0, 0);

  const int n_e = *sector_basis.constraints().n_excited;
  const bool m_fixed = sector_basis.constraints().twice_total_m.has_value();

  // Stack every lowering operator D-_{i,q}: (n_e, M) -> (n_e - 1, M - q).
  std::vector<Eigen::MatrixXcd> blocks;
  long total_rows = 0;
  for (int site = 0; site < sector_basis.site_count(); ++site) {
    for (int q = -1; q <= 1; ++q) {
      SectorConstraints c = sector_basis.constraints();
      c.n_excited = n_e - 1;
      if (m_fixed) c.twice_total_m = *c.twice_total_m - 2 * q;
      const SectorBasis target =
          SectorBasis::build(sector_basis.level_structure(),
                             sector_basis.n_per_site(),
                             sector_basis.site_count(), c);
      Eigen::MatrixXcd d =
          lowering_operator(site, q, target, sector_basis).dense();
      total_rows += d.rows();
      blocks.push_back(std::move(d));
    }
  }

  Eigen::MatrixXcd stacked(total_rows, dim);
  long row = 0;
  for (const Eigen::MatrixXcd& b : blocks) {
    stacked.middleRows(row, b.rows()) = b;
    row += b.rows();
  }

  if (total_rows == 0) {
    // Nothing to decay into: the whole sector is dark.
    return Eigen::MatrixXcd::Identity(dim, dim);
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(sv.size() > 0 ? sv(0) : 0.0, 1e-300);
  long rank = 0;
  for (long k = 0; k < sv.size(); ++k)
    if (sv(k) > cutoff) ++rank;
  const long nullity = dim - rank;
  Eigen::MatrixXcd dark = svd.matrixV().rightCols(nullity);

  // Deterministic orthonormal representation: column-wise phase fixing after
  // Gram-Schmidt in basis order (columns of V are already orthonormal).
  for (long c = 0; c < dark.cols(); ++c) {
    long arg_max = 0;
    dark.col(c).cwiseAbs().maxCoeff(&arg_max);
    const Complex pivot = dark(arg_max, c);
    if (std::abs(pivot) > 0) dark.col(c) *= std::conj(pivot) / std::abs(pivot);
  }
  return dark;
}

SpectrumReport classify(std::vector<EigenMode> modes, const SectorBasis& basis,
                        double u_onsite) {
  SpectrumReport report;
  report.level_structure = basis.level_structure();
  report.n = basis.n_per_site();
  report.u_onsite = u_onsite;

  std::sort(modes.begin(), modes.end(), [](const EigenMode& a,
                                           const EigenMode& b) {
    return std::tie(a.decay, a.energy) < std::tie(b.decay, b.energy);
  });

  const double scale = modes.empty() ? 1.0 : std::max(1.0, modes.back().decay);
  std::size_t begin = 0;
  while (begin < modes.size()) {
    std::size_t end = begin + 1;
    while (end < modes.size() &&
           std::abs(modes[end].decay - modes[end - 1].decay) <
               1e-7 * std::max(scale, std::abs(modes[end].decay)))
      ++end;

    DecayGroup group;
    group.decay = 0.0;
    for (std::size_t k = begin; k < end; ++k) group.decay += modes[k].decay;
    group.decay /= static_cast<double>(end - begin);
    group.multiplicity = static_cast<int>(end - begin);

    // Decompose the group size into (2F+1) blocks: count modes per F label.
    std::map<int, int> per_f;  // twice-F -> mode count
    bool all_resolved = true;
    for (std::size_t k = begin; k < end; ++k) {
      if (!modes[k].f) {
        all_resolved = false;
        break;
      }
      ++per_f[modes[k].f->twice()];
    }
    if (all_resolved) {
      bool consistent = true;
      for (const auto& [tf, count] : per_f) {
        if (count % (tf + 1) != 0) {
          consistent = false;
          break;
        }
        for (int copy = 0; copy < count / (tf + 1); ++copy)
          group.f_values.push_back(HalfInt::from_twice(tf));
      }
      group.f_consistent = consistent;
      if (!consistent) group.f_values.clear();
    }
    report.groups.push_back(std::move(group));
    begin = end;
  }

  report.modes = std::move(modes);
  return report;
}

SpectrumReport full_spectrum(const LevelStructure& ls, int n, double u_onsite) {
  SiteArray single;
  single.positions = {Eigen::Vector3d::Zero()};
  single.quantization_axis = Eigen::Vector3d::UnitZ();
  TrapGeometry geom;  // axis aligned with quantization axis
  const InteractionTensor tensor =
      interaction_tensor(single, geom, TransitionSpec{}, u_onsite);

  std::vector<EigenMode> all_modes;
  std::vector<DarkCount> darks;
  const int n_max = std::min(n, ls.e_count());
  for (int n_e = 0; n_e <= n_max; ++n_e) {
    if (n - n_e > ls.g_count()) continue;  // too many ground fermions
    const SectorBasis ne_basis = SectorBasis::build(
        ls, n, 1, SectorConstraints{n_e, {}});
    // Enumerate the M values present.
    std::map<int, int> m_values;
    for (std::size_t i = 0; i < ne_basis.size(); ++i)
      ++m_values[ne_basis.twice_total_m(ne_basis.state(i))];
    for (const auto& [tm, count] : m_values) {
      const SectorBasis sector = SectorBasis::build(
          ls, n, 1, SectorConstraints{n_e, tm});
      const Eigen::MatrixXcd h = build_h_eff(sector, tensor);
      std::vector<EigenMode> sector_modes = eigenmodes(h, sector);
      for (auto& m : sector_modes) {
        m.n_excited = n_e;
        m.twice_m = tm;
        all_modes.push_back(std::move(m));
      }
      if (n_e >= 1) {
        const Eigen::MatrixXcd dark = find_dark_states(sector);
        darks.push_back({n_e, tm, static_cast<int>(dark.cols())});
      }
    }
  }

  const SectorBasis whole = SectorBasis::build(ls, n, 1, {});
  SpectrumReport report = classify(std::move(all_modes), whole, u_onsite);
  report.dark_counts = std::move(darks);
  return report;
}

double pauli_blocked_rate(const SectorBasis& basis, FockWord w) {
  const LevelStructure& ls = basis.level_structure();
  double rate = 0.0;
  for (int site = 0; site < basis.site_count(); ++site) {
    for (int q = -1; q <= 1; ++q) {
      for (int tm = -ls.f_g.twice(); tm <= ls.f_g.twice(); tm += 2) {
        const HalfInt m = HalfInt::from_twice(tm);
        const HalfInt me = m + HalfInt::whole(q);
        if (me.abs() > ls.f_e) continue;
        const double c = cq(ls, q, m);
        if (c == 0.0) continue;
        const bool e_occupied =
            w & (FockWord{1} << basis.level_index(site, {Orbital::e, me}));
        const bool g_occupied =
            w & (FockWord{1} << basis.level_index(site, {Orbital::g, m}));
        if (e_occupied && !g_occupied) rate += c * c;
      }
    }
  }
  return rate;
}

}  // namespace fermidark
