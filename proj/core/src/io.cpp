#include "fermidark/io.hpp"

#include "fermidark/version.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermidark {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open output file " + path.string());
  return out;
}

const json& require_key(const json& j, const std::string& key,
                        const std::string& context) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(context + ": missing required key \"" + key + "\"");
  return *it;
}

double require_finite_number(const json& j, const std::string& context) {
  if (!j.is_number())
    throw ConfigError(context + ": expected a number, got " + j.dump());
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw ConfigError(context + ": number must be finite");
  return v;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (!key.empty() && key.front() == '_') continue;  // comment convention
    if (!known.count(key))
      throw ConfigError(context + ": unknown key \"" + key + "\"");
  }
}

json half_int_to_json(HalfInt h) { return json(h.str()); }

json polarization_to_json(const Eigen::Vector3cd& pol) {
  json arr = json::array();
  for (int i = 0; i < 3; ++i)
    arr.push_back(json::array({pol(i).real(), pol(i).imag()}));
  return arr;
}

json modes_to_json(const std::vector<EigenMode>& modes) {
  json arr = json::array();
  for (const EigenMode& mode : modes) {
    json m;
    m["n_e"] = mode.n_excited;
    m["M"] = mode.twice_m ? json(HalfInt::from_twice(*mode.twice_m).str())
                          : json(nullptr);
    m["F"] = mode.f ? json(mode.f->str()) : json(nullptr);
    m["F_g"] = mode.f_g ? json(mode.f_g->str()) : json(nullptr);
    m["epsilon_over_Gamma"] = mode.energy;
    m["gamma_over_Gamma"] = mode.decay;
    m["f_residual"] = mode.f_residual;
    arr.push_back(std::move(m));
  }
  return arr;
}

// The decay-rate group a mode belongs to (matching classify's tolerance).
int group_multiplicity(const SpectrumReport& report, double decay) {
  double scale = 0.0;
  for (const DecayGroup& g : report.groups)
    scale = std::max(scale, std::abs(g.decay));
  const double tol = 1e-7 * std::max(scale, 1.0);
  for (const DecayGroup& g : report.groups)
    if (std::abs(g.decay - decay) <= tol) return g.multiplicity;
  return 1;
}

}  // namespace

HalfInt parse_half_int(const json& j) {
  try {
    if (j.is_string()) return HalfInt::parse(j.get<std::string>());
    if (j.is_number_integer())
      return HalfInt::whole(static_cast<int>(j.get<long>()));
    if (j.is_number()) {
      const double v = j.get<double>();
      const double r = std::round(v);
      if (std::abs(v - r) > 1e-12)
        throw ConfigError(
            "half-integers must be written as strings (\"3/2\") or "
            "{\"twice\": n}; got " +
            j.dump());
      return HalfInt::whole(static_cast<int>(r));
    }
    if (j.is_object() && j.contains("twice")) {
      const json& t = j.at("twice");
      if (!t.is_number_integer())
        throw ConfigError("{\"twice\": n} needs an integer, got " + t.dump());
      return HalfInt::from_twice(static_cast<int>(t.get<long>()));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad half-integer ") + j.dump() + ": " +
                      e.what());
  }
  throw ConfigError("bad half-integer value " + j.dump());
}

Eigen::Vector3cd parse_polarization(const json& j) {
  const std::complex<double> i1{0.0, 1.0};
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    if (s == "e+") return Eigen::Vector3cd(-inv_sqrt2, -i1 * inv_sqrt2, 0.0);
    if (s == "e-") return Eigen::Vector3cd(inv_sqrt2, -i1 * inv_sqrt2, 0.0);
    if (s == "e0" || s == "ez") return Eigen::Vector3cd(0.0, 0.0, 1.0);
    if (s == "ex") return Eigen::Vector3cd(1.0, 0.0, 0.0);
    if (s == "ey") return Eigen::Vector3cd(0.0, 1.0, 0.0);
    throw ConfigError("unknown polarization \"" + s +
                      "\" (use e+, e0, e-, ex, ey, ez, or [re,im] triples)");
  }
  if (j.is_array() && j.size() == 3) {
    Eigen::Vector3cd pol;
    for (int k = 0; k < 3; ++k) {
      const json& c = j.at(k);
      if (c.is_number()) {
        pol(k) = require_finite_number(c, "polarization");
      } else if (c.is_array() && c.size() == 2) {
        pol(k) = std::complex<double>(
            require_finite_number(c.at(0), "polarization"),
            require_finite_number(c.at(1), "polarization"));
      } else {
        throw ConfigError("polarization components must be numbers or "
                          "[re, im] pairs, got " +
                          c.dump());
      }
    }
    const double norm = pol.norm();
    if (norm < 1e-300) throw ConfigError("polarization vector is zero");
    return pol / norm;
  }
  throw ConfigError("bad polarization value " + j.dump());
}

LevelStructure parse_level_structure(const json& j) {
  if (!j.is_object())
    throw ConfigError("level structure: expected an object with f_g and f_e");
  const json& jg = j.contains("f_g") ? j.at("f_g")
                                     : require_key(j, "fg", "level structure");
  const json& je = j.contains("f_e") ? j.at("f_e")
                                     : require_key(j, "fe", "level structure");
  try {
    return LevelStructure::make(parse_half_int(jg), parse_half_int(je));
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("level structure: ") + e.what());
  }
}

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be an object");
  reject_unknown_keys(
      j,
      {"f_g", "f_e", "fg", "fe", "level_structure", "n", "scheme",
       "initial_state", "tracked", "u_onsite", "t_max", "samples",
       "dt_override", "raman", "zeeman"},
      "experiment config");

  ExperimentConfig config;
  if (j.contains("level_structure"))
    config.level_structure = parse_level_structure(j.at("level_structure"));
  else
    config.level_structure = parse_level_structure(j);

  if (j.contains("n")) {
    const json& jn = j.at("n");
    if (!jn.is_number_integer() || jn.get<long>() < 1)
      throw ConfigError("n must be a positive integer, got " + jn.dump());
    config.n = static_cast<int>(jn.get<long>());
  }

  const std::string scheme =
      j.contains("scheme") ? j.at("scheme").get<std::string>() : "free_decay";
  if (scheme == "free_decay" || scheme == "free") {
    config.scheme = Scheme::FreeDecay;
  } else if (scheme == "raman") {
    config.scheme = Scheme::Raman;
  } else if (scheme == "zeeman") {
    config.scheme = Scheme::Zeeman;
  } else {
    throw ConfigError("unknown scheme \"" + scheme +
                      "\" (use free_decay, raman, or zeeman)");
  }

  if (j.contains("raman")) {
    const json& r = j.at("raman");
    reject_unknown_keys(r,
                        {"f_s", "omega1", "omega2", "pol1", "pol2", "delta",
                         "phase1", "phase2"},
                        "raman");
    RamanDriveSpec spec;
    spec.f_s = parse_half_int(require_key(r, "f_s", "raman"));
    spec.omega1 = require_finite_number(require_key(r, "omega1", "raman"),
                                        "raman.omega1");
    spec.omega2 = require_finite_number(require_key(r, "omega2", "raman"),
                                        "raman.omega2");
    spec.pol1 = parse_polarization(require_key(r, "pol1", "raman"));
    spec.pol2 = parse_polarization(require_key(r, "pol2", "raman"));
    spec.delta = require_finite_number(require_key(r, "delta", "raman"),
                                       "raman.delta");
    if (r.contains("phase1"))
      spec.phase1 = require_finite_number(r.at("phase1"), "raman.phase1");
    if (r.contains("phase2"))
      spec.phase2 = require_finite_number(r.at("phase2"), "raman.phase2");
    config.raman = spec;
  }
  if (j.contains("zeeman")) {
    const json& z = j.at("zeeman");
    reject_unknown_keys(z, {"delta_z", "delta", "rabi", "polarization"},
                        "zeeman");
    ZeemanDriveSpec spec;
    spec.delta_z = require_finite_number(require_key(z, "delta_z", "zeeman"),
                                         "zeeman.delta_z");
    if (z.contains("delta"))
      spec.delta = require_finite_number(z.at("delta"), "zeeman.delta");
    spec.rabi =
        require_finite_number(require_key(z, "rabi", "zeeman"), "zeeman.rabi");
    if (z.contains("polarization"))
      spec.polarization = parse_polarization(z.at("polarization"));
    config.zeeman = spec;
  }
  if (config.scheme == Scheme::Raman && !config.raman)
    throw ConfigError("scheme \"raman\" needs a raman section");
  if (config.scheme == Scheme::Zeeman && !config.zeeman)
    throw ConfigError("scheme \"zeeman\" needs a zeeman section");

  config.initial_state = j.contains("initial_state")
                             ? j.at("initial_state").get<std::string>()
                             : std::string("G");
  if (j.contains("tracked")) {
    const json& t = j.at("tracked");
    if (!t.is_array())
      throw ConfigError("tracked must be an array of state descriptors");
    for (const json& name : t)
      config.tracked.push_back(name.get<std::string>());
  }
  if (j.contains("u_onsite"))
    config.u_onsite = require_finite_number(j.at("u_onsite"), "u_onsite");
  if (j.contains("t_max")) {
    config.t_max = require_finite_number(j.at("t_max"), "t_max");
    if (!(config.t_max > 0.0)) throw ConfigError("t_max must be positive");
  }
  if (j.contains("samples")) {
    const json& s = j.at("samples");
    if (!s.is_number_integer() || s.get<long>() < 2)
      throw ConfigError("samples must be an integer >= 2, got " + s.dump());
    config.samples = static_cast<int>(s.get<long>());
  }
  if (j.contains("dt_override")) {
    const double dt = require_finite_number(j.at("dt_override"), "dt_override");
    if (!(dt > 0.0)) throw ConfigError("dt_override must be positive");
    config.dt_override = dt;
  }
  return config;
}

json experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["f_g"] = half_int_to_json(config.level_structure.f_g);
  j["f_e"] = half_int_to_json(config.level_structure.f_e);
  j["n"] = config.n;
  switch (config.scheme) {
    case Scheme::FreeDecay: j["scheme"] = "free_decay"; break;
    case Scheme::Raman: j["scheme"] = "raman"; break;
    case Scheme::Zeeman: j["scheme"] = "zeeman"; break;
    case Scheme::MultiSiteCheck: j["scheme"] = "multisite"; break;
  }
  if (config.raman) {
    json r;
    r["f_s"] = half_int_to_json(config.raman->f_s);
    r["omega1"] = config.raman->omega1;
    r["omega2"] = config.raman->omega2;
    r["pol1"] = polarization_to_json(config.raman->pol1);
    r["pol2"] = polarization_to_json(config.raman->pol2);
    r["delta"] = config.raman->delta;
    r["phase1"] = config.raman->phase1;
    r["phase2"] = config.raman->phase2;
    j["raman"] = std::move(r);
  }
  if (config.zeeman) {
    json z;
    z["delta_z"] = config.zeeman->delta_z;
    z["delta"] = config.zeeman->delta;
    z["rabi"] = config.zeeman->rabi;
    z["polarization"] = polarization_to_json(config.zeeman->polarization);
    j["zeeman"] = std::move(z);
  }
  j["initial_state"] = config.initial_state;
  j["tracked"] = config.tracked;
  j["u_onsite"] = config.u_onsite;
  j["t_max"] = config.t_max;
  j["samples"] = config.samples;
  if (config.dt_override) j["dt_override"] = *config.dt_override;
  return j;
}

void write_timeseries_csv(const std::filesystem::path& path,
                          const TimeSeries& series) {
  std::ofstream out = open_output(path);
  out << "t";
  for (const std::string& name : series.names)
    out << "," << csv_escape("P[" + name + "]");
  out << "\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    out << fmt(series.times[i]);
    for (const auto& pops : series.populations) out << "," << fmt(pops[i]);
    out << "\n";
  }
}

void write_timeseries_json(const std::filesystem::path& path,
                           const TimeSeries& series,
                           const json& config_echo) {
  json j;
  j["tool_version"] = version();
  j["config"] = config_echo;
  j["dt"] = series.dt;
  j["trace_drift"] = series.trace_drift;
  j["positivity_floor"] = series.positivity_floor;
  j["times"] = series.times;
  json pops = json::object();
  for (std::size_t k = 0; k < series.names.size(); ++k)
    pops[series.names[k]] = series.populations[k];
  j["populations"] = std::move(pops);
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const SpectrumReport& report) {
  std::ofstream out = open_output(path);
  out << "n_e,M,F,epsilon_over_Gamma,gamma_over_Gamma,multiplicity\n";
  for (const EigenMode& mode : report.modes) {
    out << mode.n_excited << ",";
    out << (mode.twice_m ? HalfInt::from_twice(*mode.twice_m).str()
                         : std::string())
        << ",";
    out << (mode.f ? mode.f->str() : std::string()) << ",";
    out << fmt(mode.energy) << "," << fmt(mode.decay) << ","
        << group_multiplicity(report, mode.decay) << "\n";
  }
}

void write_spectrum_json(const std::filesystem::path& path,
                         const SpectrumReport& report,
                         const json& config_echo) {
  json j;
  j["tool_version"] = version();
  j["config"] = config_echo;
  j["f_g"] = half_int_to_json(report.level_structure.f_g);
  j["f_e"] = half_int_to_json(report.level_structure.f_e);
  j["class"] = to_string(report.level_structure.cls);
  j["n"] = report.n;
  j["u_onsite"] = report.u_onsite;
  j["modes"] = modes_to_json(report.modes);
  json groups = json::array();
  for (const DecayGroup& g : report.groups) {
    json gj;
    gj["gamma_over_Gamma"] = g.decay;
    gj["multiplicity"] = g.multiplicity;
    json fs = json::array();
    for (HalfInt f : g.f_values) fs.push_back(f.str());
    gj["f_values"] = std::move(fs);
    gj["f_consistent"] = g.f_consistent;
    groups.push_back(std::move(gj));
  }
  j["groups"] = std::move(groups);
  json darks = json::array();
  for (const DarkCount& d : report.dark_counts) {
    json dj;
    dj["n_e"] = d.n_excited;
    dj["M"] = HalfInt::from_twice(d.twice_m).str();
    dj["count"] = d.count;
    darks.push_back(std::move(dj));
  }
  j["dark_counts"] = std::move(darks);
  j["total_darks"] = report.total_darks();
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

void write_census_csv(const std::filesystem::path& path,
                      const CensusVerification& verification,
                      const LevelStructure& ls, int n) {
  std::ofstream out = open_output(path);
  out << "f_g,f_e,n,n_e,M,predicted_darks,numerical_darks,match\n";
  for (const CensusCheckRow& row : verification.rows) {
    out << ls.f_g.str() << "," << ls.f_e.str() << "," << n << ","
        << row.n_excited << "," << HalfInt::from_twice(row.twice_m).str()
        << "," << row.predicted << "," << row.numerical << ","
        << (row.match ? "yes" : "no") << "\n";
  }
}

void write_census_json(const std::filesystem::path& path,
                       const CensusVerification& verification,
                       const LevelStructure& ls, int n,
                       const json& config_echo) {
  json j;
  j["tool_version"] = version();
  j["config"] = config_echo;
  j["f_g"] = half_int_to_json(ls.f_g);
  j["f_e"] = half_int_to_json(ls.f_e);
  j["class"] = to_string(ls.cls);
  j["n"] = n;
  json rows = json::array();
  for (const CensusCheckRow& row : verification.rows) {
    json rj;
    rj["n_e"] = row.n_excited;
    rj["M"] = HalfInt::from_twice(row.twice_m).str();
    rj["predicted_darks"] = row.predicted;
    rj["numerical_darks"] = row.numerical;
    rj["match"] = row.match;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  j["all_match"] = verification.all_match;
  j["discrepancies"] = verification.discrepancies;
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["output_dir"] = m.output_dir;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

}  // namespace fermidark
