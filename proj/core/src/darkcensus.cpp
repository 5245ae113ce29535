#include "fermidark/darkcensus.hpp"

#include "fermidark/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace fermidark {

int SectorCensus::total_darks() const {
  int total = 0;
  for (const CensusCell& c : cells) total += c.darks;
  return total;
}

int SectorCensus::total_states() const {
  int total = 0;
  for (const CensusCell& c : cells) total += c.states;
  return total;
}

SectorCensus census(const LevelStructure& ls, int n, int n_excited) {
  if (n_excited < 0 || n_excited > n)
    throw std::domain_error("census: need 0 <= n_e <= n");
  if (n - n_excited > ls.g_count() || n_excited > ls.e_count())
    throw std::domain_error("census: sector exceeds the Pauli bounds");

  SectorCensus out;
  out.level_structure = ls;
  out.n = n;
  out.n_excited = n_excited;

  // Source multiplets: Pauli-allowed g-subset coupled with e-subset.
  const MultipletSet sg = identical_fermion_multiplets(ls.f_g, n - n_excited);
  const MultipletSet se = identical_fermion_multiplets(ls.f_e, n_excited);
  std::map<int, long> mu;  // twice-F -> total multiplicity at (n, n_e)
  for (const auto& [fg, mg] : sg.entries) {
    for (const auto& [fe, me] : se.entries) {
      for (int tf = std::abs(fg.twice() - fe.twice());
           tf <= fg.twice() + fe.twice(); tf += 2) {
        out.multiplets.push_back(
            {fg, fe, HalfInt::from_twice(tf), mg * me});
        mu[tf] += static_cast<long>(mg) * me;
      }
    }
  }

  // Target multiplets one excitation below (none when n_e = 0).
  std::map<int, long> target;  // twice-F' -> multiplicity at (n, n_e - 1)
  if (n_excited >= 1 && n - n_excited + 1 <= ls.g_count()) {
    const MultipletSet tg =
        identical_fermion_multiplets(ls.f_g, n - n_excited + 1);
    const MultipletSet te =
        identical_fermion_multiplets(ls.f_e, n_excited - 1);
    for (const auto& [fg, mg] : tg.entries)
      for (const auto& [fe, me] : te.entries)
        for (int tf = std::abs(fg.twice() - fe.twice());
             tf <= fg.twice() + fe.twice(); tf += 2)
          target[tf] += static_cast<long>(mg) * me;
  }

  // Channels per total F: one independent decay equation per target multiplet
  // reachable under dF in {0, +-1} with 0 -> 0 forbidden. Distinct-F source
  // families never share equations (independence assumption; the count is a
  // lower bound on darks when it fails).
  int t_fmax = 0;
  for (const auto& [tf, count] : mu) t_fmax = std::max(t_fmax, tf);
  for (const auto& [tf, count] : mu) {
    CensusFamily fam;
    fam.f = HalfInt::from_twice(tf);
    fam.states = static_cast<int>(count);
    long channels = 0;
    for (int tfp = tf - 2; tfp <= tf + 2; tfp += 2) {
      if (tfp < 0) continue;
      if (tf == 0 && tfp == 0) continue;  // 0 -> 0 forbidden
      auto it = target.find(tfp);
      if (it != target.end()) channels += it->second;
    }
    fam.channels = static_cast<int>(channels);
    fam.darks = static_cast<int>(std::max(0L, count - channels));
    out.families.push_back(fam);
  }

  // Per-M table: a multiplet with total F contributes one state to every
  // |M| <= F, so each family enters every cell with F >= |M|.
  for (int tm = -t_fmax; tm <= t_fmax; tm += 2) {
    CensusCell cell;
    cell.twice_m = tm;
    for (const CensusFamily& fam : out.families) {
      if (fam.f.twice() < std::abs(tm)) continue;
      cell.states += fam.states;
      cell.channels += std::min(fam.states, fam.channels);
      cell.darks += fam.darks;
    }
    out.cells.push_back(cell);
  }
  return out;
}

SectorCensus census_n4(const LevelStructure& ls, int n_excited) {
  return census(ls, 4, n_excited);
}

std::vector<StretchedMultiplet> stretched_dark_rule(const LevelStructure& ls) {
  std::vector<StretchedMultiplet> out;
  if (ls.cls == StructureClass::MultiLambda) return out;
  if (3 > ls.g_count()) return out;  // three ground fermions do not fit
  const int tf = ls.f_g.twice();
  const HalfInt fg_max = HalfInt::from_twice(2 * tf - 2);
  if (ls.cls == StructureClass::MultiSquare) {
    out.push_back({fg_max, HalfInt::from_twice(3 * tf - 2)});
  } else {  // MultiV
    out.push_back({fg_max, HalfInt::from_twice(3 * tf)});
    out.push_back({fg_max, HalfInt::from_twice(3 * tf - 2)});
  }
  return out;
}

DarkVector solve_superposition(const LevelStructure& ls, int n, int n_excited,
                               HalfInt f, HalfInt m) {
  if (m.abs() > f)
    throw std::domain_error("solve_superposition: |M| > F");
  const SectorBasis sector = SectorBasis::build(
      ls, n, 1, SectorConstraints{n_excited, m.twice()});
  if (sector.size() == 0)
    throw std::domain_error("solve_superposition: empty sector");

  const std::vector<CoupledVector> coupled = coupled_basis(sector);
  DarkVector result;
  result.n_excited = n_excited;
  result.f = f;
  result.m = m;
  for (const CoupledVector& cv : coupled)
    if (cv.f == f) result.span.push_back(cv);
  if (result.span.empty())
    throw std::domain_error("solve_superposition: no coupled states with the "
                            "requested (n_e, F, M)");

  const long k = static_cast<long>(result.span.size());
  const long dim = static_cast<long>(sector.size());
  Eigen::MatrixXcd span_matrix(dim, k);
  for (long c = 0; c < k; ++c)
    span_matrix.col(c) = result.span[static_cast<std::size_t>(c)].coeffs;

  // Stack the lowering operators restricted to the span.
  std::vector<Eigen::MatrixXcd> blocks;
  long rows = 0;
  for (int q = -1; q <= 1; ++q) {
    const SectorBasis target = SectorBasis::build(
        ls, n, 1, SectorConstraints{n_excited - 1, m.twice() - 2 * q});
    Eigen::MatrixXcd d = lowering_operator(0, q, target, sector).dense();
    blocks.push_back(d * span_matrix);
    rows += blocks.back().rows();
  }
  Eigen::MatrixXcd stacked(rows, k);
  long row = 0;
  for (const Eigen::MatrixXcd& b : blocks) {
    stacked.middleRows(row, b.rows()) = b;
    row += b.rows();
  }

  if (rows == 0) {
    result.is_dark = true;
    result.coefficients = Eigen::VectorXcd::Zero(k);
    result.coefficients(0) = 1.0;
    result.residual = 0.0;
    return result;
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double smin = sv.size() >= k ? sv(k - 1) : 0.0;
  if (sv.size() >= k && smin > 1e-10 * std::max(smax, 1e-300) ) {
    result.is_dark = false;  // bright span: no null vector
    return result;
  }

  Eigen::VectorXcd v = svd.matrixV().col(k - 1);
  long arg_max = 0;
  v.cwiseAbs().maxCoeff(&arg_max);
  const std::complex<double> pivot = v(arg_max);
  if (std::abs(pivot) > 0) v *= std::conj(pivot) / std::abs(pivot);
  result.coefficients = v;
  result.is_dark = true;
  double residual = 0.0;
  long r0 = 0;
  for (const Eigen::MatrixXcd& b : blocks) {
    residual = std::max(residual, (b * v).norm());
    r0 += b.rows();
  }
  result.residual = residual;
  return result;
}

CensusVerification verify_census(const LevelStructure& ls, int n) {
  CensusVerification out;
  const int ne_max = std::min(n, ls.e_count());
  for (int n_e = 1; n_e <= ne_max; ++n_e) {
    if (n - n_e > ls.g_count()) continue;
    const SectorCensus c = census(ls, n, n_e);
    for (const CensusCell& cell : c.cells) {
      const SectorBasis sector = SectorBasis::build(
          ls, n, 1, SectorConstraints{n_e, cell.twice_m});
      if (sector.size() == 0 && cell.states == 0) continue;
      const int numerical =
          static_cast<int>(find_dark_states(sector).cols());
      CensusCheckRow row;
      row.n_excited = n_e;
      row.twice_m = cell.twice_m;
      row.predicted = cell.darks;
      row.numerical = numerical;
      row.match = (row.predicted == row.numerical);
      if (!row.match) {
        out.all_match = false;
        std::ostringstream msg;
        msg << "flagged discrepancy at n_e=" << n_e << ", M="
            << HalfInt::from_twice(cell.twice_m).str() << ": census predicts "
            << row.predicted << " dark state(s), numerics find "
            << row.numerical
            << " (the independence assumption undercounts here)";
        out.discrepancies.push_back(msg.str());
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace fermidark
