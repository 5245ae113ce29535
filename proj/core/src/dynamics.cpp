#include "fermidark/dynamics.hpp"

#include "fermidark/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermidark {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr std::complex<double> kImag{0.0, 1.0};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return {};
  return s.substr(a, b - a + 1);
}

std::string strip_braces(std::string s) {
  if (s.size() >= 2 && s.front() == '{' && s.back() == '}')
    s = s.substr(1, s.size() - 2);
  return trim(s);
}

void fix_phase(VectorXcd& v) {
  Eigen::Index pivot = 0;
  v.cwiseAbs().maxCoeff(&pivot);
  const std::complex<double> p = v(pivot);
  if (std::abs(p) > 0.0) v *= std::conj(p) / std::abs(p);
}

// Re-expresses a vector given on `from` in the state ordering of `to` (same
// level structure; `to` must contain every populated word).
VectorXcd lift_vector(const SectorBasis& from, const VectorXcd& v,
                      const SectorBasis& to) {
  VectorXcd out = VectorXcd::Zero(static_cast<long>(to.size()));
  for (long k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) == 0.0) continue;
    const long j = to.index_of(from.state(static_cast<std::size_t>(k)));
    if (j < 0)
      throw std::domain_error(
          "state descriptor populates a word outside the target basis");
    out(j) = v(k);
  }
  return out;
}

SingleParticleLevel parse_level_token(const std::string& token,
                                      const LevelStructure& ls) {
  const std::string t = trim(token);
  if (t.size() < 2 || (t[0] != 'g' && t[0] != 'e'))
    throw std::invalid_argument("bad level token '" + token +
                                "' (expected g<m> or e<m>, e.g. g-5/2)");
  SingleParticleLevel lvl;
  lvl.orbital = (t[0] == 'g') ? Orbital::g : Orbital::e;
  lvl.m = HalfInt::parse(t.substr(1));
  const HalfInt f = (lvl.orbital == Orbital::g) ? ls.f_g : ls.f_e;
  if (!HalfInt::valid_projection(f, lvl.m))
    throw std::invalid_argument("level token '" + token +
                                "' is not a sublevel of the structure");
  return lvl;
}

VectorXcd word_vector(const SectorBasis& basis, FockWord w,
                      const std::string& descriptor) {
  const long idx = basis.index_of(w);
  if (idx < 0)
    throw std::domain_error("state '" + descriptor +
                            "' is not contained in the basis");
  VectorXcd v = VectorXcd::Zero(static_cast<long>(basis.size()));
  v(idx) = 1.0;
  return v;
}

// The unique dark vector of the (n_e = 1, M = m) sector, lifted into `basis`.
VectorXcd unique_dark_vector(const SectorBasis& basis, HalfInt m,
                             const std::string& descriptor) {
  const SectorBasis sector =
      SectorBasis::build(basis.level_structure(), basis.n_per_site(), 1,
                         SectorConstraints{1, m.twice()});
  const MatrixXcd darks = find_dark_states(sector);
  if (darks.cols() != 1) {
    std::ostringstream msg;
    msg << "state '" << descriptor << "': the (n_e=1, M=" << m.str()
        << ") sector has " << darks.cols()
        << " dark states (need exactly one)";
    throw std::domain_error(msg.str());
  }
  VectorXcd v = darks.col(0);
  fix_phase(v);
  return lift_vector(sector, v, basis);
}

// ---------------------------------------------------------------------------
// Block-diagonal representation under a conserved ladder label.
//
// When every matrix of the generator set is compatible with a partition of
// the basis (the Hamiltonian block-diagonal, each jump operator mapping each
// source block into a single target block), the density matrix stays
// block-diagonal if it starts that way, and the integration cost drops from
// dim^2 to the sum of the squared block sizes.

struct JumpBlock {
  int src = 0;
  int tgt = 0;
  double weight = 0.0;
  MatrixXcd j;
};

struct BlockSystem {
  bool valid = false;
  std::vector<std::vector<long>> indices;      // block -> global indices
  std::vector<std::pair<int, long>> location;  // global -> (block, offset)
  std::vector<MatrixXcd> h;                    // per-block total Hamiltonian
  std::vector<JumpBlock> jumps;
};

BlockSystem try_blocks(const GeneratorSet& gens,
                       const std::vector<int>& labels) {
  BlockSystem bs;
  const long dim = gens.h_eff.rows();
  if (dim == 0 || static_cast<long>(labels.size()) != dim) return bs;

  std::map<int, int> block_of_label;
  for (int lab : labels) block_of_label.emplace(lab, 0);
  if (block_of_label.size() < 2) return bs;  // single block: use dense path
  int next = 0;
  for (auto& [lab, id] : block_of_label) id = next++;

  bs.indices.resize(block_of_label.size());
  bs.location.resize(static_cast<std::size_t>(dim));
  std::vector<int> block(static_cast<std::size_t>(dim));
  for (long i = 0; i < dim; ++i) {
    const int b = block_of_label.at(labels[static_cast<std::size_t>(i)]);
    block[static_cast<std::size_t>(i)] = b;
    bs.location[static_cast<std::size_t>(i)] = {
        b, static_cast<long>(bs.indices[static_cast<std::size_t>(b)].size())};
    bs.indices[static_cast<std::size_t>(b)].push_back(i);
  }

  const MatrixXcd h_full = gens.h_total();
  const double h_scale = std::max(h_full.norm(), 1e-300);
  double off2 = 0.0;
  for (long j = 0; j < dim; ++j)
    for (long i = 0; i < dim; ++i)
      if (block[static_cast<std::size_t>(i)] !=
          block[static_cast<std::size_t>(j)])
        off2 += std::norm(h_full(i, j));
  if (std::sqrt(off2) > 1e-12 * h_scale) return bs;  // label not conserved

  for (const auto& idx : bs.indices) {
    MatrixXcd hb(idx.size(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t r = 0; r < idx.size(); ++r)
        hb(static_cast<long>(r), static_cast<long>(c)) =
            h_full(idx[r], idx[c]);
    bs.h.push_back(std::move(hb));
  }

  for (const JumpOperator& jop : gens.jumps) {
    const double jmax = jop.matrix.cwiseAbs().maxCoeff();
    if (jmax == 0.0) continue;
    const double tol = 1e-14 * jmax;
    // Each source block must feed exactly one target block.
    std::map<int, int> target_of;
    for (long c = 0; c < dim; ++c) {
      for (long r = 0; r < dim; ++r) {
        if (std::abs(jop.matrix(r, c)) <= tol) continue;
        const int src = block[static_cast<std::size_t>(c)];
        const int tgt = block[static_cast<std::size_t>(r)];
        auto [it, inserted] = target_of.emplace(src, tgt);
        if (!inserted && it->second != tgt) return bs;  // ambiguous routing
      }
    }
    for (const auto& [src, tgt] : target_of) {
      const auto& ci = bs.indices[static_cast<std::size_t>(src)];
      const auto& ri = bs.indices[static_cast<std::size_t>(tgt)];
      JumpBlock jb;
      jb.src = src;
      jb.tgt = tgt;
      jb.weight = jop.weight;
      jb.j.resize(static_cast<long>(ri.size()), static_cast<long>(ci.size()));
      for (std::size_t c = 0; c < ci.size(); ++c)
        for (std::size_t r = 0; r < ri.size(); ++r)
          jb.j(static_cast<long>(r), static_cast<long>(c)) =
              jop.matrix(ri[r], ci[c]);
      bs.jumps.push_back(std::move(jb));
    }
  }
  bs.valid = true;
  return bs;
}

double default_step(const GeneratorSet& gens) {
  double dt = 0.01;
  if (gens.h_drive.size() > 0 && gens.h_drive.norm() > 0.0) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
        0.5 * (gens.h_drive + gens.h_drive.adjoint()),
        Eigen::EigenvaluesOnly);
    const double s = es.eigenvalues().cwiseAbs().maxCoeff();
    if (s > 0.0) dt = std::min(dt, 0.01 / s);
  }
  double shift = 0.0;
  for (long i = 0; i < gens.h_eff.rows(); ++i)
    shift = std::max(shift, std::abs(gens.h_eff(i, i).real()));
  if (shift > 0.0) dt = std::min(dt, 0.001 / shift);
  return dt;
}

struct SampleRecorder {
  TimeSeries* ts;
  const std::vector<TrackedState>* tracked;
  int samples = 0;
  int stride = 1;
  double min_eig = std::numeric_limits<double>::infinity();
  double max_drift = 0.0;

  void finish() {
    ts->trace_drift = max_drift;
    ts->positivity_floor = std::isfinite(min_eig) ? min_eig : 0.0;
  }
};

void record_dense(SampleRecorder& rec, int sample_index, double t,
                  MatrixXcd& rho) {
  rho = (0.5 * (rho + rho.adjoint())).eval();
  rec.ts->times.push_back(t);
  for (std::size_t k = 0; k < rec.tracked->size(); ++k) {
    const TrackedState& tr = (*rec.tracked)[k];
    double pop = 0.0;
    if (tr.vector.size() > 0) {
      pop = (tr.vector.adjoint() * rho * tr.vector)(0, 0).real();
    } else {
      for (long i : tr.indices) pop += rho(i, i).real();
    }
    rec.ts->populations[k].push_back(pop);
  }
  rec.max_drift = std::max(rec.max_drift, std::abs(rho.trace().real() - 1.0) +
                                              std::abs(rho.trace().imag()));
  if (sample_index % rec.stride == 0 || sample_index == rec.samples - 1) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    rec.min_eig = std::min(rec.min_eig, es.eigenvalues().minCoeff());
  }
}

void record_blocks(SampleRecorder& rec, const BlockSystem& bs,
                   int sample_index, double t, std::vector<MatrixXcd>& rho) {
  double trace = 0.0;
  for (MatrixXcd& rb : rho) {
    rb = (0.5 * (rb + rb.adjoint())).eval();
    trace += rb.trace().real();
  }
  rec.ts->times.push_back(t);
  for (std::size_t k = 0; k < rec.tracked->size(); ++k) {
    const TrackedState& tr = (*rec.tracked)[k];
    double pop = 0.0;
    if (tr.vector.size() > 0) {
      for (std::size_t b = 0; b < bs.indices.size(); ++b) {
        const auto& idx = bs.indices[b];
        VectorXcd vb(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
          vb(static_cast<long>(r)) = tr.vector(idx[r]);
        if (vb.norm() == 0.0) continue;
        pop += (vb.adjoint() * rho[b] * vb)(0, 0).real();
      }
    } else {
      for (long i : tr.indices) {
        const auto [b, off] = bs.location[static_cast<std::size_t>(i)];
        pop += rho[static_cast<std::size_t>(b)](off, off).real();
      }
    }
    rec.ts->populations[k].push_back(pop);
  }
  rec.max_drift = std::max(rec.max_drift, std::abs(trace - 1.0));
  if (sample_index % rec.stride == 0 || sample_index == rec.samples - 1) {
    for (const MatrixXcd& rb : rho) {
      if (rb.rows() == 0) continue;
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rb, Eigen::EigenvaluesOnly);
      rec.min_eig = std::min(rec.min_eig, es.eigenvalues().minCoeff());
    }
  }
}

// d rho/dt with the Hamiltonian fixed up front (avoids re-forming h_total
// inside the stepping loop).
void dense_rhs(const MatrixXcd& h, const std::vector<JumpOperator>& jumps,
               const MatrixXcd& rho, MatrixXcd& out) {
  out.noalias() = -kImag * (h * rho);
  out.noalias() += kImag * (rho * h.adjoint());
  for (const JumpOperator& j : jumps) {
    if (j.weight == 0.0) continue;
    out.noalias() += (2.0 * j.weight) * (j.matrix * rho * j.matrix.adjoint());
  }
}

void block_rhs(const BlockSystem& bs, const std::vector<MatrixXcd>& rho,
               std::vector<MatrixXcd>& out) {
  for (std::size_t b = 0; b < rho.size(); ++b) {
    out[b].noalias() = -kImag * (bs.h[b] * rho[b]);
    out[b].noalias() += kImag * (rho[b] * bs.h[b].adjoint());
  }
  for (const JumpBlock& jb : bs.jumps) {
    out[static_cast<std::size_t>(jb.tgt)].noalias() +=
        (2.0 * jb.weight) *
        (jb.j * rho[static_cast<std::size_t>(jb.src)] * jb.j.adjoint());
  }
}

TimeSeries integrate_impl(const MatrixXcd& rho0, const GeneratorSet& gens,
                          const std::vector<TrackedState>& tracked,
                          double t_max, int samples,
                          std::optional<double> dt_override,
                          const std::vector<int>* labels) {
  const long dim = gens.h_eff.rows();
  if (dim == 0) throw std::domain_error("integrate: empty basis");
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::domain_error("integrate: rho0 does not match the generators");
  if (static_cast<double>(dim) * static_cast<double>(dim) >
      static_cast<double>(1L << 26))
    throw std::domain_error(
        "integrate: basis too large for dense density-matrix evolution");
  if (!(t_max > 0.0)) throw std::domain_error("integrate: need t_max > 0");
  if (samples < 2) throw std::domain_error("integrate: need samples >= 2");
  if (dt_override && !(*dt_override > 0.0))
    throw std::domain_error("integrate: dt override must be positive");

  const double dt_target = dt_override ? *dt_override : default_step(gens);
  const double delta = t_max / (samples - 1);
  const double spp_raw = std::ceil(delta / dt_target - 1e-12);
  if (!(spp_raw >= 0.0) || spp_raw > 1e9)
    throw std::runtime_error("integrate: step size underflow");
  const long steps_per_sample = std::max(1L, static_cast<long>(spp_raw));
  const double dt = delta / static_cast<double>(steps_per_sample);
  if (!(dt > 1e-14)) throw std::runtime_error("integrate: step size underflow");

  TimeSeries ts;
  ts.dt = dt;
  ts.populations.resize(tracked.size());
  for (const TrackedState& tr : tracked) ts.names.push_back(tr.name);

  SampleRecorder rec;
  rec.ts = &ts;
  rec.tracked = &tracked;
  rec.samples = samples;
  rec.stride = std::max(1, (samples + 63) / 64);

  BlockSystem bs;
  if (labels) bs = try_blocks(gens, *labels);
  if (bs.valid) {
    // The reduction is sound only for block-diagonal initial conditions.
    double off2 = 0.0;
    for (long j = 0; j < dim; ++j)
      for (long i = 0; i < dim; ++i)
        if (bs.location[static_cast<std::size_t>(i)].first !=
            bs.location[static_cast<std::size_t>(j)].first)
          off2 += std::norm(rho0(i, j));
    if (std::sqrt(off2) > 1e-12 * std::max(rho0.norm(), 1e-300))
      bs.valid = false;
  }

  if (bs.valid) {
    const std::size_t nb = bs.indices.size();
    std::vector<MatrixXcd> rho(nb), k1(nb), k2(nb), k3(nb), k4(nb), tmp(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& idx = bs.indices[b];
      rho[b].resize(static_cast<long>(idx.size()),
                    static_cast<long>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); ++c)
        for (std::size_t r = 0; r < idx.size(); ++r)
          rho[b](static_cast<long>(r), static_cast<long>(c)) =
              rho0(idx[r], idx[c]);
      k1[b] = k2[b] = k3[b] = k4[b] = tmp[b] = rho[b];
    }
    record_blocks(rec, bs, 0, 0.0, rho);
    for (int s = 1; s < samples; ++s) {
      for (long step = 0; step < steps_per_sample; ++step) {
        block_rhs(bs, rho, k1);
        for (std::size_t b = 0; b < nb; ++b)
          tmp[b] = rho[b] + (0.5 * dt) * k1[b];
        block_rhs(bs, tmp, k2);
        for (std::size_t b = 0; b < nb; ++b)
          tmp[b] = rho[b] + (0.5 * dt) * k2[b];
        block_rhs(bs, tmp, k3);
        for (std::size_t b = 0; b < nb; ++b) tmp[b] = rho[b] + dt * k3[b];
        block_rhs(bs, tmp, k4);
        for (std::size_t b = 0; b < nb; ++b)
          rho[b] += (dt / 6.0) * (k1[b] + 2.0 * k2[b] + 2.0 * k3[b] + k4[b]);
      }
      record_blocks(rec, bs, s, s * delta, rho);
    }
  } else {
    const MatrixXcd h = gens.h_total();
    MatrixXcd rho = rho0;
    MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim),
        tmp(dim, dim);
    record_dense(rec, 0, 0.0, rho);
    for (int s = 1; s < samples; ++s) {
      for (long step = 0; step < steps_per_sample; ++step) {
        dense_rhs(h, gens.jumps, rho, k1);
        tmp = rho + (0.5 * dt) * k1;
        dense_rhs(h, gens.jumps, tmp, k2);
        tmp = rho + (0.5 * dt) * k2;
        dense_rhs(h, gens.jumps, tmp, k3);
        tmp = rho + dt * k3;
        dense_rhs(h, gens.jumps, tmp, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      record_dense(rec, s, s * delta, rho);
    }
  }
  rec.finish();
  return ts;
}

// ---------------------------------------------------------------------------
// Experiment assembly

GeneratorSet single_site_generators(const SectorBasis& basis, double u_onsite,
                                    MatrixXcd h_drive) {
  SiteArray sites;
  sites.positions = {Eigen::Vector3d::Zero()};
  sites.quantization_axis = Eigen::Vector3d::UnitZ();
  const TrapGeometry geom{};  // bypassed by the explicit onsite coefficient
  const TransitionSpec spec{};
  const InteractionTensor tensor =
      interaction_tensor(sites, geom, spec, u_onsite);
  return make_generators(basis, tensor, std::move(h_drive));
}

// The spherical component carrying (essentially) all of the polarization, if
// there is one.
std::optional<int> pure_polarization_q(const Eigen::Vector3cd& pol) {
  const double norm = pol.norm();
  if (norm == 0.0) return std::nullopt;
  const SphericalBasis sb = SphericalBasis::around(Eigen::Vector3d::UnitZ());
  for (int q = -1; q <= 1; ++q)
    if (std::abs(sb.e(q).dot(pol)) / norm > 1.0 - 1e-12) return q;
  return std::nullopt;
}

// Twice the total magnetic number of a state concentrated in one M sector.
std::optional<int> sharp_twice_m(const SectorBasis& basis, const VectorXcd& v) {
  double mean = 0.0;
  for (long i = 0; i < v.size(); ++i)
    mean += std::norm(v(i)) *
            basis.twice_total_m(basis.state(static_cast<std::size_t>(i)));
  double var = 0.0;
  for (long i = 0; i < v.size(); ++i) {
    const double d =
        basis.twice_total_m(basis.state(static_cast<std::size_t>(i))) - mean;
    var += std::norm(v(i)) * d * d;
  }
  if (var > 1e-9) return std::nullopt;
  return static_cast<int>(std::lround(mean));
}

std::vector<int> ladder_labels(const SectorBasis& basis,
                               std::optional<int> q_drive) {
  std::vector<int> labels(basis.size(), 0);
  if (!q_drive) return labels;  // single label: dense path
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const FockWord w = basis.state(i);
    labels[i] = basis.twice_total_m(w) - 2 * (*q_drive) *
                                             basis.excitation_count(w);
  }
  return labels;
}

std::vector<TrackedState> assemble_tracked(
    const ExperimentConfig& config, const SectorBasis& basis,
    const VectorXcd& v0, std::optional<int> q_drive) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (seen.insert(name).second) names.push_back(name);
  };
  add(config.initial_state);
  if (q_drive) {
    if (const std::optional<int> tm0 = sharp_twice_m(basis, v0)) {
      const HalfInt m_target = HalfInt::from_twice(*tm0 + 2 * (*q_drive));
      add("D_" + m_target.str());
    }
  }
  if (config.n == 2) {
    add("S");
    add("ee");
  }
  if (config.scheme == Scheme::FreeDecay)
    for (int k = 0; k <= std::min(config.n, basis.level_structure().e_count());
         ++k)
      add("ne=" + std::to_string(k));
  for (const std::string& extra : config.tracked) add(extra);

  std::vector<TrackedState> tracked;
  for (const std::string& name : names) {
    try {
      tracked.push_back(make_tracked(name, basis));
    } catch (const std::exception&) {
      if (std::find(config.tracked.begin(), config.tracked.end(), name) !=
              config.tracked.end() ||
          name == config.initial_state)
        throw;  // states the caller asked for must resolve
      // Auto-added defaults that do not exist for this structure are dropped.
    }
  }
  return tracked;
}

TimeSeries run_single_site(const ExperimentConfig& config,
                           const MatrixXcd& h_drive,
                           std::optional<int> q_drive,
                           const SectorBasis& basis) {
  const VectorXcd v0 = parse_state(config.initial_state, basis);
  const GeneratorSet gens =
      single_site_generators(basis, config.u_onsite, h_drive);
  const std::vector<TrackedState> tracked =
      assemble_tracked(config, basis, v0, q_drive);
  const MatrixXcd rho0 = v0 * v0.adjoint();
  const std::vector<int> labels = ladder_labels(basis, q_drive);
  return integrate_impl(rho0, gens, tracked, config.t_max, config.samples,
                        config.dt_override, &labels);
}

}  // namespace

const std::vector<double>& TimeSeries::population(
    const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return populations[k];
  throw std::invalid_argument("no tracked state named '" + name + "'");
}

double TimeSeries::max_population(const std::string& name) const {
  const std::vector<double>& p = population(name);
  if (p.empty()) throw std::invalid_argument("empty time series");
  return *std::max_element(p.begin(), p.end());
}

Eigen::VectorXcd parse_state(const std::string& descriptor,
                             const SectorBasis& basis) {
  const std::string d = trim(descriptor);
  const LevelStructure& ls = basis.level_structure();
  if (basis.site_count() != 1)
    throw std::domain_error(
        "state descriptors address a single site; build multi-site product "
        "states per site");

  auto pair_word = [&](HalfInt m) {
    if (m.twice() <= 0)
      throw std::invalid_argument("G_{m} needs m > 0 (got m = " + m.str() +
                                  ")");
    if (!HalfInt::valid_projection(ls.f_g, m))
      throw std::invalid_argument("G_{" + m.str() +
                                  "}: m is not a ground sublevel");
    const int lo = basis.level_index(0, {Orbital::g, -m});
    const int hi = basis.level_index(0, {Orbital::g, m});
    return (FockWord{1} << lo) | (FockWord{1} << hi);
  };

  if (d == "G" || d.rfind("G_", 0) == 0) {
    if (basis.n_per_site() != 2)
      throw std::domain_error("'" + d + "' describes an n = 2 ground pair");
    const HalfInt m =
        (d == "G") ? ls.f_g : HalfInt::parse(strip_braces(d.substr(2)));
    return word_vector(basis, pair_word(m), d);
  }

  if (d == "S") {
    const SectorBasis sector = SectorBasis::build(
        ls, basis.n_per_site(), 1, SectorConstraints{1, 0});
    if (sector.size() != 2)
      throw std::domain_error(
          "'S' is defined only when the (n_e=1, M=0) sector is "
          "two-dimensional");
    const MatrixXcd darks = find_dark_states(sector);
    if (darks.cols() != 1)
      throw std::domain_error(
          "'S' undefined: the (n_e=1, M=0) sector has no unique dark partner");
    VectorXcd s(2);
    s(0) = -std::conj(darks(1, 0));
    s(1) = std::conj(darks(0, 0));
    fix_phase(s);
    return lift_vector(sector, s, basis);
  }

  if (d.rfind("D_", 0) == 0) {
    const HalfInt m = HalfInt::parse(strip_braces(d.substr(2)));
    return unique_dark_vector(basis, m, d);
  }

  if (d == "ee" || d.rfind("ne=", 0) == 0) {
    const int k = (d == "ee") ? 2 : std::stoi(d.substr(3));
    std::vector<long> hits;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis.excitation_count(basis.state(i)) == k)
        hits.push_back(static_cast<long>(i));
    if (hits.size() != 1)
      throw std::domain_error(
          "'" + d + "' names " + std::to_string(hits.size()) +
          " basis states; it can seed an initial state only when unique "
          "(it is always valid as a tracked projector)");
    VectorXcd v = VectorXcd::Zero(static_cast<long>(basis.size()));
    v(hits[0]) = 1.0;
    return v;
  }

  if (d.rfind("fock:", 0) == 0) {
    std::vector<SingleParticleLevel> levels;
    std::stringstream ss(d.substr(5));
    std::string token;
    while (std::getline(ss, token, ','))
      levels.push_back(parse_level_token(token, ls));
    if (static_cast<int>(levels.size()) != basis.n_per_site())
      throw std::invalid_argument(
          "'" + d + "' lists " + std::to_string(levels.size()) +
          " levels for n = " + std::to_string(basis.n_per_site()));
    FockWord w = 0;
    for (const SingleParticleLevel& lvl : levels) {
      const FockWord bit = FockWord{1} << basis.level_index(0, lvl);
      if (w & bit)
        throw std::invalid_argument("'" + d + "' repeats a level");
      w |= bit;
    }
    return word_vector(basis, w, d);
  }

  throw std::invalid_argument("unknown state descriptor '" + d + "'");
}

TrackedState make_tracked(const std::string& descriptor,
                          const SectorBasis& basis) {
  TrackedState tr;
  tr.name = trim(descriptor);
  if (tr.name == "ee" || tr.name.rfind("ne=", 0) == 0) {
    const int k = (tr.name == "ee") ? 2 : std::stoi(tr.name.substr(3));
    if (k < 0 || k > basis.n_per_site() * basis.site_count())
      throw std::invalid_argument("'" + tr.name +
                                  "' is outside the excitation range");
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis.excitation_count(basis.state(i)) == k)
        tr.indices.push_back(static_cast<long>(i));
    return tr;
  }
  tr.vector = parse_state(tr.name, basis);
  return tr;
}

TimeSeries integrate(const Eigen::MatrixXcd& rho0, const GeneratorSet& gens,
                     const std::vector<TrackedState>& tracked, double t_max,
                     int samples, std::optional<double> dt_override) {
  return integrate_impl(rho0, gens, tracked, t_max, samples, dt_override,
                        nullptr);
}

TimeSeries run_raman(const ExperimentConfig& config) {
  if (!config.raman)
    throw std::domain_error("run_raman: config.raman is not set");
  const SectorBasis basis =
      SectorBasis::build(config.level_structure, config.n, 1, {});
  const MatrixXcd h_drive = raman_hamiltonian(basis, *config.raman);
  std::optional<int> q_drive;
  const std::optional<int> q1 = pure_polarization_q(config.raman->pol1);
  const std::optional<int> q2 = pure_polarization_q(config.raman->pol2);
  if (q1 && q2) q_drive = *q1 - *q2;
  return run_single_site(config, h_drive, q_drive, basis);
}

TimeSeries run_zeeman(const ExperimentConfig& config) {
  if (!config.zeeman)
    throw std::domain_error("run_zeeman: config.zeeman is not set");
  const SectorBasis basis =
      SectorBasis::build(config.level_structure, config.n, 1, {});
  const MatrixXcd h_drive = zeeman_hamiltonian(basis, *config.zeeman);
  const std::optional<int> q_drive =
      pure_polarization_q(config.zeeman->polarization);
  return run_single_site(config, h_drive, q_drive, basis);
}

TimeSeries run_free_decay(const ExperimentConfig& config) {
  const SectorBasis basis =
      SectorBasis::build(config.level_structure, config.n, 1, {});
  const MatrixXcd h_drive =
      MatrixXcd::Zero(static_cast<long>(basis.size()),
                      static_cast<long>(basis.size()));
  return run_single_site(config, h_drive, std::optional<int>{0}, basis);
}

TimeSeries run_experiment(const ExperimentConfig& config) {
  switch (config.scheme) {
    case Scheme::FreeDecay:
      return run_free_decay(config);
    case Scheme::Raman:
      return run_raman(config);
    case Scheme::Zeeman:
      return run_zeeman(config);
    case Scheme::MultiSiteCheck:
      throw std::domain_error(
          "the multi-site scheme runs through multisite_dark_check");
  }
  throw std::domain_error("run_experiment: unknown scheme");
}

MultisiteReport multisite_dark_check(const SiteArray& sites,
                                     const LevelStructure& ls, int n_per_site,
                                     const std::vector<std::string>& states) {
  const int site_count = static_cast<int>(sites.positions.size());
  if (site_count < 1)
    throw std::domain_error("multisite_dark_check: need at least one site");
  if (static_cast<int>(states.size()) != site_count)
    throw std::domain_error(
        "multisite_dark_check: one state descriptor per site required");

  const SectorBasis site_basis = SectorBasis::build(ls, n_per_site, 1, {});
  std::vector<VectorXcd> site_vectors;
  for (const std::string& s : states) {
    VectorXcd v = parse_state(s, site_basis);
    const double norm = v.norm();
    if (norm == 0.0)
      throw std::domain_error("multisite_dark_check: zero state '" + s + "'");
    site_vectors.push_back(v / norm);
  }

  const SectorBasis basis =
      SectorBasis::build(ls, n_per_site, site_count, {});
  if (static_cast<double>(basis.size()) * static_cast<double>(basis.size()) >
      static_cast<double>(1L << 26))
    throw std::domain_error("multisite_dark_check: array too large");

  // Product amplitude: per-site factors, no cross-site sign (each site holds
  // a fixed particle number, and the canonical ordering groups sites).
  const int lps = basis.levels_per_site();
  const FockWord site_mask =
      (lps >= 64) ? ~FockWord{0} : ((FockWord{1} << lps) - 1);
  VectorXcd psi = VectorXcd::Zero(static_cast<long>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const FockWord w = basis.state(i);
    std::complex<double> amp = 1.0;
    for (int s = 0; s < site_count && amp != 0.0; ++s) {
      const FockWord local = (w >> (s * lps)) & site_mask;
      const long j = site_basis.index_of(local);
      amp *= (j < 0) ? 0.0 : site_vectors[static_cast<std::size_t>(s)](j);
    }
    psi(static_cast<long>(i)) = amp;
  }
  const double psi_norm = psi.norm();
  if (psi_norm == 0.0)
    throw std::logic_error("multisite_dark_check: product state vanished");
  psi /= psi_norm;

  const TrapGeometry geom{};
  const TransitionSpec spec{};
  const InteractionTensor tensor = interaction_tensor(sites, geom, spec, 0.0);
  const GeneratorSet gens = make_generators(basis, tensor);

  MultisiteReport report;
  const MatrixXcd h_coh = 0.5 * (gens.h_eff + gens.h_eff.adjoint());
  report.h_residual = (h_coh * psi).norm();
  report.lindblad_residual =
      lindblad_rhs(psi * psi.adjoint(), gens).norm();
  report.decay_rate = decay_rate_via_recycling(psi, gens);
  report.stationary =
      report.h_residual < 1e-9 && report.lindblad_residual < 1e-9;
  return report;
}

}  // namespace fermidark
