#include "fermidark/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace fermidark {

namespace {

// Occupied-level parity below bit position `pos` (sign of moving an operator
// past the occupied levels that precede it in the canonical ordering).
inline int jw_sign(FockWord w, int pos) {
  const FockWord below = w & ((FockWord{1} << pos) - 1);
  return (std::popcount(below) % 2 == 0) ? 1 : -1;
}

// All n-bit combinations out of `levels` bits, ascending word value.
std::vector<FockWord> enumerate_site_words(int levels, int n) {
  std::vector<FockWord> words;
  if (n < 0 || n > levels) return words;
  if (n == 0) {
    words.push_back(0);
    return words;
  }
  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  while (true) {
    FockWord w = 0;
    for (int p : pos) w |= FockWord{1} << p;
    words.push_back(w);
    int i = n - 1;
    while (i >= 0 && pos[i] == levels - n + i) --i;
    if (i < 0) break;
    ++pos[i];
    for (int k = i + 1; k < n; ++k) pos[k] = pos[k - 1] + 1;
  }
  std::sort(words.begin(), words.end());
  return words;
}

}  // namespace

SectorBasis SectorBasis::build(const LevelStructure& ls, int n, int site_count,
                               SectorConstraints constraints) {
  if (site_count < 1) throw std::domain_error("build_sector: site_count < 1");
  const int L = ls.levels_per_site();
  if (n < 0 || n > L)
    throw std::domain_error("build_sector: n out of range for " +
                            std::to_string(L) + " levels per site");
  if (L * site_count > 64)
    throw std::domain_error("build_sector: bitset capacity (64) exceeded");

  SectorBasis basis;
  basis.ls_ = ls;
  basis.n_ = n;
  basis.site_count_ = site_count;
  basis.constraints_ = constraints;

  const std::vector<FockWord> site_words = enumerate_site_words(L, n);

  // Cross product over sites with global-constraint filtering.
  std::vector<FockWord> out;
  std::vector<std::size_t> cursor(static_cast<std::size_t>(site_count), 0);
  while (true) {
    FockWord w = 0;
    for (int s = 0; s < site_count; ++s)
      w |= site_words[cursor[static_cast<std::size_t>(s)]] << (s * L);
    bool keep = true;
    if (constraints.n_excited)
      keep = keep && basis.excitation_count(w) == *constraints.n_excited;
    if (keep && constraints.twice_total_m)
      keep = basis.twice_total_m(w) == *constraints.twice_total_m;
    if (keep) out.push_back(w);
    int s = site_count - 1;
    while (s >= 0 && ++cursor[static_cast<std::size_t>(s)] == site_words.size()) {
      cursor[static_cast<std::size_t>(s)] = 0;
      --s;
    }
    if (s < 0) break;
  }
  std::sort(out.begin(), out.end());
  basis.states_ = std::move(out);
  return basis;
}

int SectorBasis::level_index(int site, SingleParticleLevel lvl) const {
  if (site < 0 || site >= site_count_)
    throw std::domain_error("level_index: site out of range");
  const int L = levels_per_site();
  int local;
  if (lvl.orbital == Orbital::g) {
    if (lvl.m.abs() > ls_.f_g)
      throw std::domain_error("level_index: |m| > f_g for a ground level");
    local = (lvl.m.twice() + ls_.f_g.twice()) / 2;
  } else {
    if (lvl.m.abs() > ls_.f_e)
      throw std::domain_error("level_index: |m| > f_e for an excited level");
    local = ls_.g_count() + (lvl.m.twice() + ls_.f_e.twice()) / 2;
  }
  return site * L + local;
}

SingleParticleLevel SectorBasis::level_at(int global_index) const {
  const int L = levels_per_site();
  if (global_index < 0 || global_index >= L * site_count_)
    throw std::domain_error("level_at: index out of range");
  const int local = global_index % L;
  if (local < ls_.g_count())
    return {Orbital::g, HalfInt::from_twice(2 * local - ls_.f_g.twice())};
  return {Orbital::e,
          HalfInt::from_twice(2 * (local - ls_.g_count()) - ls_.f_e.twice())};
}

long SectorBasis::index_of(FockWord w) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), w);
  if (it == states_.end() || *it != w) return -1;
  return static_cast<long>(it - states_.begin());
}

int SectorBasis::excitation_count(FockWord w) const {
  const int L = levels_per_site();
  FockWord e_mask_site = ((FockWord{1} << ls_.e_count()) - 1)
                         << ls_.g_count();
  FockWord mask = 0;
  for (int s = 0; s < site_count_; ++s) mask |= e_mask_site << (s * L);
  return std::popcount(w & mask);
}

int SectorBasis::twice_total_m(FockWord w) const {
  int total = 0;
  while (w != 0) {
    const int pos = std::countr_zero(w);
    total += level_at(pos).m.twice();
    w &= w - 1;
  }
  return total;
}

SparseOperator::SparseOperator(const SectorBasis* basis_out,
                               const SectorBasis* basis_in,
                               std::vector<Entry> entries)
    : basis_out_(basis_out), basis_in_(basis_in) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  for (const Entry& e : entries) {
    if (!entries_.empty() && entries_.back().row == e.row &&
        entries_.back().col == e.col) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
}

long SparseOperator::rows() const {
  return basis_out_ ? static_cast<long>(basis_out_->size()) : 0;
}

long SparseOperator::cols() const {
  return basis_in_ ? static_cast<long>(basis_in_->size()) : 0;
}

Eigen::MatrixXcd SparseOperator::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows(), cols());
  for (const Entry& e : entries_) m(e.row, e.col) += e.value;
  return m;
}

SparseOperator SparseOperator::adjoint() const {
  std::vector<Entry> flipped;
  flipped.reserve(entries_.size());
  for (const Entry& e : entries_)
    flipped.push_back({e.col, e.row, std::conj(e.value)});
  return SparseOperator(basis_in_, basis_out_, std::move(flipped));
}

Eigen::VectorXcd SparseOperator::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != cols())
    throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(rows());
  for (const Entry& e : entries_) out(e.row) += e.value * v(e.col);
  return out;
}

namespace {

enum class MissingImagePolicy { Drop, Throw };

SparseOperator sigma_impl(int site, SingleParticleLevel a_m,
                          SingleParticleLevel b_n, const SectorBasis& basis_out,
                          const SectorBasis& basis_in,
                          MissingImagePolicy policy) {
  const int pa = basis_in.level_index(site, a_m);
  const int pb = basis_in.level_index(site, b_n);
  std::vector<SparseOperator::Entry> entries;
  for (std::size_t col = 0; col < basis_in.size(); ++col) {
    const FockWord w = basis_in.state(col);
    if ((w & (FockWord{1} << pb)) == 0) continue;  // c_b annihilates
    const int s1 = jw_sign(w, pb);
    const FockWord w1 = w & ~(FockWord{1} << pb);
    if (w1 & (FockWord{1} << pa)) continue;  // c†_a on occupied level
    const int s2 = jw_sign(w1, pa);
    const FockWord w2 = w1 | (FockWord{1} << pa);
    const long row = basis_out.index_of(w2);
    if (row < 0) {
      if (policy == MissingImagePolicy::Throw) {
        const auto& c = basis_out.constraints();
        const bool fits =
            (!c.n_excited || basis_out.excitation_count(w2) == *c.n_excited) &&
            (!c.twice_total_m ||
             basis_out.twice_total_m(w2) == *c.twice_total_m);
        if (fits)
          throw std::logic_error(
              "sigma: image state satisfies the target constraints but is "
              "missing from the target basis");
      }
      continue;
    }
    entries.push_back({row, static_cast<long>(col),
                       std::complex<double>(s1 * s2, 0.0)});
  }
  return SparseOperator(&basis_out, &basis_in, std::move(entries));
}

}  // namespace

SparseOperator sigma(int site, SingleParticleLevel a_m, SingleParticleLevel b_n,
                     const SectorBasis& basis) {
  return sigma_impl(site, a_m, b_n, basis, basis, MissingImagePolicy::Drop);
}

SparseOperator sigma(int site, SingleParticleLevel a_m, SingleParticleLevel b_n,
                     const SectorBasis& basis_out, const SectorBasis& basis_in) {
  return sigma_impl(site, a_m, b_n, basis_out, basis_in,
                    MissingImagePolicy::Throw);
}

namespace {

SparseOperator lowering_impl(int site, int q, const SectorBasis& basis_out,
                             const SectorBasis& basis_in,
                             MissingImagePolicy policy) {
  if (q < -1 || q > 1)
    throw std::domain_error("lowering_operator: q must be -1, 0, or +1");
  const LevelStructure& ls = basis_in.level_structure();
  std::vector<SparseOperator::Entry> entries;
  for (int tm = -ls.f_g.twice(); tm <= ls.f_g.twice(); tm += 2) {
    const HalfInt m = HalfInt::from_twice(tm);
    const HalfInt me = m + HalfInt::whole(q);
    if (me.abs() > ls.f_e) continue;
    const double c = cq(ls, q, m);
    if (c == 0.0) continue;
    SparseOperator part =
        sigma_impl(site, {Orbital::g, m}, {Orbital::e, me}, basis_out,
                   basis_in, policy);
    for (const auto& e : part.entries())
      entries.push_back({e.row, e.col, c * e.value});
  }
  return SparseOperator(&basis_out, &basis_in, std::move(entries));
}

}  // namespace

SparseOperator lowering_operator(int site, int q, const SectorBasis& basis) {
  return lowering_impl(site, q, basis, basis, MissingImagePolicy::Drop);
}

SparseOperator lowering_operator(int site, int q, const SectorBasis& basis_out,
                                 const SectorBasis& basis_in) {
  return lowering_impl(site, q, basis_out, basis_in, MissingImagePolicy::Throw);
}

namespace {

// F_plus and F_z as sparse one-body operators on `basis`, optionally
// restricted to one orbital.
struct LadderOps {
  SparseOperator f_plus;
  Eigen::VectorXd fz_diag;  // F_z is diagonal in the Fock basis
};

LadderOps one_body_ladder(const SectorBasis& basis,
                          std::optional<Orbital> orbital_filter) {
  const LevelStructure& ls = basis.level_structure();
  std::vector<SparseOperator::Entry> entries;
  for (int site = 0; site < basis.site_count(); ++site) {
    for (Orbital orb : {Orbital::g, Orbital::e}) {
      if (orbital_filter && orb != *orbital_filter) continue;
      const HalfInt f = (orb == Orbital::g) ? ls.f_g : ls.f_e;
      for (int tm = -f.twice(); tm + 2 <= f.twice(); tm += 2) {
        // <f, m+1 | f_+ | f, m> = sqrt(f(f+1) - m(m+1))
        const double amp = std::sqrt(0.25 * (f.twice() * (f.twice() + 2) -
                                             tm * (tm + 2)));
        const HalfInt m = HalfInt::from_twice(tm);
        SparseOperator part =
            sigma_impl(site, {orb, m + HalfInt::whole(1)}, {orb, m}, basis,
                       basis, MissingImagePolicy::Drop);
        for (const auto& e : part.entries())
          entries.push_back({e.row, e.col, amp * e.value});
      }
    }
  }
  LadderOps ops{SparseOperator(&basis, &basis, std::move(entries)),
                Eigen::VectorXd::Zero(static_cast<long>(basis.size()))};
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    FockWord w = basis.state(idx);
    double tz = 0.0;
    while (w != 0) {
      const int pos = std::countr_zero(w);
      const SingleParticleLevel lvl = basis.level_at(pos);
      if (!orbital_filter || lvl.orbital == *orbital_filter)
        tz += 0.5 * lvl.m.twice();
      w &= w - 1;
    }
    ops.fz_diag(static_cast<long>(idx)) = tz;
  }
  return ops;
}

Eigen::MatrixXcd f_squared_from_ladder(const LadderOps& ops) {
  // F^2 = F_- F_+ + F_z^2 + F_z with F_- = (F_+)†.
  const Eigen::MatrixXcd fp = ops.f_plus.dense();
  Eigen::MatrixXcd f2 = fp.adjoint() * fp;
  f2.diagonal() +=
      (ops.fz_diag.array().square() + ops.fz_diag.array()).matrix().cast<std::complex<double>>();
  return f2;
}

}  // namespace

TotalFOperators total_f_operators(const SectorBasis& basis) {
  if (basis.site_count() != 1)
    throw std::domain_error("total_f_operators: single-site bases only");

  // F_+ connects different M sectors, so the operators are assembled on the
  // M-closed enclosing basis (same n and n_e content) and then sliced back to
  // the rows/columns of `basis`. F^2 and Fg^2 are block-diagonal over both
  // n_e and M, which makes the slice exact.
  SectorConstraints closed = basis.constraints();
  closed.twice_total_m.reset();
  const SectorBasis full = SectorBasis::build(
      basis.level_structure(), basis.n_per_site(), 1, closed);

  const LadderOps both = one_body_ladder(full, std::nullopt);
  const LadderOps ground = one_body_ladder(full, Orbital::g);
  const Eigen::MatrixXcd f2_full = f_squared_from_ladder(both);
  const Eigen::MatrixXcd fg2_full = f_squared_from_ladder(ground);

  const long dim = static_cast<long>(basis.size());
  std::vector<long> slice(static_cast<std::size_t>(dim));
  for (long i = 0; i < dim; ++i) {
    const long j = full.index_of(basis.state(static_cast<std::size_t>(i)));
    if (j < 0)
      throw std::logic_error("total_f_operators: enclosing basis is missing a "
                             "state of the input basis");
    slice[static_cast<std::size_t>(i)] = j;
  }

  TotalFOperators out;
  out.f2.resize(dim, dim);
  out.fg2.resize(dim, dim);
  out.fz = Eigen::MatrixXcd::Zero(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) {
      out.f2(i, j) = f2_full(slice[static_cast<std::size_t>(i)],
                             slice[static_cast<std::size_t>(j)]);
      out.fg2(i, j) = fg2_full(slice[static_cast<std::size_t>(i)],
                               slice[static_cast<std::size_t>(j)]);
    }
    out.fz(i, i) = both.fz_diag(slice[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

// Eigenvalue lambda = F(F+1) -> twice-F, snapped to the integer grid.
int snap_twice_f(double lambda) {
  const double tf = std::sqrt(4.0 * lambda + 1.0) - 1.0;
  return static_cast<int>(std::lround(tf));
}

// Deterministic phase: rotate so the largest-magnitude coefficient is real
// and positive.
void fix_phase(Eigen::VectorXcd& v) {
  long arg_max = 0;
  v.cwiseAbs().maxCoeff(&arg_max);
  const std::complex<double> pivot = v(arg_max);
  if (std::abs(pivot) > 0) v *= std::conj(pivot) / std::abs(pivot);
}

}  // namespace

std::vector<CoupledVector> coupled_basis(const SectorBasis& basis) {
  if (basis.site_count() != 1)
    throw std::domain_error("coupled_basis: single-site bases only");
  const long dim = static_cast<long>(basis.size());
  std::vector<CoupledVector> out;
  if (dim == 0) return out;

  const TotalFOperators ops = total_f_operators(basis);

  // Group basis states by (n_e, M); F^2 and Fg^2 are block-diagonal over
  // these groups.
  std::map<std::pair<int, int>, std::vector<long>> groups;
  for (long i = 0; i < dim; ++i) {
    const FockWord w = basis.state(static_cast<std::size_t>(i));
    groups[{basis.excitation_count(w), basis.twice_total_m(w)}].push_back(i);
  }

  for (const auto& [key, idx] : groups) {
    const auto& [n_e, tM] = key;
    const long d = static_cast<long>(idx.size());
    Eigen::MatrixXcd f2(d, d), fg2(d, d);
    for (long a = 0; a < d; ++a)
      for (long b = 0; b < d; ++b) {
        f2(a, b) = ops.f2(idx[static_cast<std::size_t>(a)],
                          idx[static_cast<std::size_t>(b)]);
        fg2(a, b) = ops.fg2(idx[static_cast<std::size_t>(a)],
                            idx[static_cast<std::size_t>(b)]);
      }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f2);
    const Eigen::VectorXd evals = es.eigenvalues();
    const Eigen::MatrixXcd evecs = es.eigenvectors();
    const double tol = 1e-9 * std::max(1.0, evals.cwiseAbs().maxCoeff());

    std::vector<std::pair<long, long>> clusters;  // [begin, end) in eval order
    long begin = 0;
    for (long k = 1; k <= d; ++k) {
      if (k == d || evals(k) - evals(k - 1) > tol) {
        clusters.emplace_back(begin, k);
        begin = k;
      }
    }

    std::vector<CoupledVector> block;
    for (const auto& [b0, b1] : clusters) {
      const long width = b1 - b0;
      const int tF = snap_twice_f(evals.segment(b0, width).mean());
      const Eigen::MatrixXcd q = evecs.middleCols(b0, width);
      // Resolve Fg within the F eigenspace.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esg(q.adjoint() * fg2 * q);
      for (long k = 0; k < width; ++k) {
        CoupledVector cv;
        cv.n_excited = n_e;
        cv.m = HalfInt::from_twice(tM);
        cv.f = HalfInt::from_twice(tF);
        cv.f_g = HalfInt::from_twice(snap_twice_f(esg.eigenvalues()(k)));
        Eigen::VectorXcd local = q * esg.eigenvectors().col(k);
        cv.coeffs = Eigen::VectorXcd::Zero(dim);
        for (long a = 0; a < d; ++a)
          cv.coeffs(idx[static_cast<std::size_t>(a)]) = local(a);
        fix_phase(cv.coeffs);
        block.push_back(std::move(cv));
      }
    }

    // Residual multiplicity of identical (F, Fg) labels within the block.
    for (auto& cv : block) {
      int count = 0;
      for (const auto& other : block)
        if (other.f == cv.f && other.f_g == cv.f_g) ++count;
      cv.residual_multiplicity = count;
    }

    std::sort(block.begin(), block.end(),
              [](const CoupledVector& a, const CoupledVector& b) {
                return std::tie(a.n_excited, a.m, a.f, a.f_g) <
                       std::tie(b.n_excited, b.m, b.f, b.f_g);
              });
    for (auto& cv : block) out.push_back(std::move(cv));
  }

  std::sort(out.begin(), out.end(),
            [](const CoupledVector& a, const CoupledVector& b) {
              return std::tie(a.n_excited, a.m, a.f, a.f_g) <
                     std::tie(b.n_excited, b.m, b.f, b.f_g);
            });
  return out;
}

}  // namespace fermidark
