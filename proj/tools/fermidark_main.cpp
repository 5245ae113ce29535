// fermidark: command-line front end for the collective-decay toolkit.
//
// Subcommands
//   spectrum  eigenmodes, decay-rate groups, and dark counts of one structure
//   darks     analytic dark-state census cross-checked against null spaces
//   prepare   driven preparation dynamics (Raman / Zeeman / free decay)
//   onsite    onsite trap coefficient sweep, maxima, and depth ratios
//   check     randomized two-site product-dark stationarity report
//
// Exit codes: 0 success, 2 configuration error, 3 census/numerics mismatch,
// 4 integrator failure.

#include "fermidark/darkcensus.hpp"
#include "fermidark/dipolar.hpp"
#include "fermidark/dynamics.hpp"
#include "fermidark/io.hpp"
#include "fermidark/spectrum.hpp"
#include "fermidark/version.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fermidark;

namespace {

struct GlobalOptions {
  std::string out_dir = "runs";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  unsigned long seed = 0;
  std::string command_line;
};

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  in >> j;  // throws json::parse_error on malformed input
  return j;
}

fs::path prepare_output_dir(const GlobalOptions& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw ConfigError("cannot create output directory: " + dir.string());
  return dir;
}

void write_run_manifest(const fs::path& dir, const GlobalOptions& g,
                        const std::string& command,
                        const std::string& config_path) {
  RunManifest m;
  m.command = g.command_line.empty() ? command : g.command_line;
  m.config_path = config_path;
  m.output_dir = dir.string();
  m.seed = g.seed;
  m.tool_version = version();
  write_manifest(dir / "manifest.json", m);
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumOptions {
  std::string config_path;
  std::string fg, fe;
  int n = 2;
  double u = 0.0;
};

struct SpectrumInput {
  LevelStructure ls;
  int n;
  double u;
};

SpectrumInput resolve_spectrum_input(const SpectrumOptions& opt,
                                     std::string* config_path) {
  if (!opt.config_path.empty()) {
    *config_path = opt.config_path;
    const json j = load_json_file(opt.config_path);
    if (!j.is_object()) throw ConfigError("spectrum config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (!key.empty() && key.front() == '_') continue;
      static const char* known[] = {"f_g", "fg", "f_e", "fe",
                                    "level_structure", "n", "u_onsite", "U"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
            return key == k;
          }) == std::end(known))
        throw ConfigError("spectrum config: unknown key \"" + key + "\"");
    }
    SpectrumInput in{j.contains("level_structure")
                         ? parse_level_structure(j.at("level_structure"))
                         : parse_level_structure(j),
                     2, 0.0};
    if (j.contains("n")) in.n = j.at("n").get<int>();
    if (j.contains("u_onsite")) in.u = j.at("u_onsite").get<double>();
    if (j.contains("U")) in.u = j.at("U").get<double>();
    return in;
  }
  if (opt.fg.empty() || opt.fe.empty())
    throw ConfigError("spectrum: pass --config, or --fg and --fe");
  try {
    return SpectrumInput{
        LevelStructure::make(HalfInt::parse(opt.fg), HalfInt::parse(opt.fe)),
        opt.n, opt.u};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("spectrum: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("spectrum: ") + e.what());
  }
}

json spectrum_config_echo(const SpectrumInput& in) {
  return json{{"f_g", in.ls.f_g.str()},
              {"f_e", in.ls.f_e.str()},
              {"n", in.n},
              {"u_onsite", in.u}};
}

int cmd_spectrum(const GlobalOptions& g, const SpectrumOptions& opt) {
  std::string config_path;
  const SpectrumInput in = resolve_spectrum_input(opt, &config_path);
  const SpectrumReport report = full_spectrum(in.ls, in.n, in.u);

  const fs::path dir = prepare_output_dir(g);
  write_spectrum_csv(dir / "spectrum.csv", report);
  write_spectrum_json(dir / "spectrum.json", report, spectrum_config_echo(in));
  write_run_manifest(dir, g, "spectrum", config_path);

  std::printf("structure %s <-> %s (%s), n = %d, U = %g\n",
              in.ls.f_g.str().c_str(), in.ls.f_e.str().c_str(),
              to_string(in.ls.cls), in.n, in.u);
  std::printf("modes: %zu, decay-rate groups: %zu\n", report.modes.size(),
              report.groups.size());
  std::map<int, int> per_ne;
  for (const DarkCount& dc : report.dark_counts) per_ne[dc.n_excited] += dc.count;
  for (const auto& [ne, count] : per_ne)
    std::printf("n_e=%d: %d dark state(s)\n", ne, count);
  std::printf("total dark states: %d\n", report.total_darks());
  std::printf("wrote %s\n", (dir / "spectrum.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// darks

int cmd_darks(const GlobalOptions& g, const SpectrumOptions& opt) {
  std::string config_path;
  const SpectrumInput in = resolve_spectrum_input(opt, &config_path);
  const CensusVerification ver = verify_census(in.ls, in.n);

  const fs::path dir = prepare_output_dir(g);
  write_census_csv(dir / "census.csv", ver, in.ls, in.n);
  write_census_json(dir / "census.json", ver, in.ls, in.n,
                    spectrum_config_echo(in));
  write_run_manifest(dir, g, "darks", config_path);

  std::map<int, std::pair<int, int>> per_ne;  // n_e -> (predicted, numerical)
  for (const CensusCheckRow& row : ver.rows) {
    per_ne[row.n_excited].first += row.predicted;
    per_ne[row.n_excited].second += row.numerical;
  }
  for (const auto& [ne, counts] : per_ne)
    std::printf("n_e=%d: census %d, numerics %d%s\n", ne, counts.first,
                counts.second, counts.first == counts.second ? "" : "  <-- MISMATCH");
  std::printf("wrote %s\n", (dir / "census.csv").string().c_str());
  if (!ver.all_match) {
    for (const std::string& d : ver.discrepancies)
      std::fprintf(stderr, "%s\n", d.c_str());
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareOptions {
  std::string config_path;
  std::string preset;
  std::string preset_dir;
};

fs::path resolve_preset(const PrepareOptions& opt) {
  fs::path dir;
  if (!opt.preset_dir.empty()) {
    dir = opt.preset_dir;
  } else if (const char* env = std::getenv("FERMIDARK_PRESET_DIR")) {
    dir = env;
  } else {
    dir = "presets";
  }
  fs::path candidate = dir / (opt.preset + ".json");
  if (!fs::exists(candidate)) {
    candidate = dir / opt.preset;  // allow a full file name
    if (!fs::exists(candidate))
      throw ConfigError("preset \"" + opt.preset + "\" not found under " +
                        dir.string());
  }
  return candidate;
}

void report_timeseries(const std::string& tag, const TimeSeries& ts) {
  for (const std::string& name : ts.names) {
    const auto& p = ts.population(name);
    const std::size_t k = static_cast<std::size_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
    std::printf("%smax P[%s] = %.6f at t = %.6g\n", tag.c_str(), name.c_str(),
                p[k], ts.times[k]);
  }
  std::printf("%strace drift %.3g, positivity floor %.3g, dt %.6g\n",
              tag.c_str(), ts.trace_drift, ts.positivity_floor, ts.dt);
}

int cmd_prepare(const GlobalOptions& g, const PrepareOptions& opt) {
  if (opt.config_path.empty() == opt.preset.empty())
    throw ConfigError("prepare: pass exactly one of --config or --preset");
  const fs::path config_path =
      opt.preset.empty() ? fs::path(opt.config_path) : resolve_preset(opt);
  const json root = load_json_file(config_path);

  const fs::path dir = prepare_output_dir(g);
  write_run_manifest(dir, g, "prepare", config_path.string());

  std::vector<json> entries;
  if (root.is_array()) {
    if (root.empty()) throw ConfigError("prepare: config array is empty");
    entries.assign(root.begin(), root.end());
  } else {
    entries.push_back(root);
  }

  // Parse everything up front so configuration errors beat worker startup.
  std::vector<ExperimentConfig> configs;
  configs.reserve(entries.size());
  for (const json& e : entries) configs.push_back(parse_experiment_config(e));

  std::vector<TimeSeries> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  const unsigned workers = std::max(
      1u, std::min<unsigned>(g.jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t k = next.fetch_add(1); k < configs.size();
           k = next.fetch_add(1)) {
        try {
          results[k] = run_experiment(configs[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t k = 0; k < results.size(); ++k) {
    const bool sweep = results.size() > 1;
    const std::string stem =
        sweep ? "timeseries_" + std::to_string(k) : std::string("timeseries");
    write_timeseries_csv(dir / (stem + ".csv"), results[k]);
    write_timeseries_json(dir / (stem + ".json"), results[k],
                          experiment_config_to_json(configs[k]));
    report_timeseries(sweep ? "[" + std::to_string(k) + "] " : "", results[k]);
  }
  std::printf("wrote %s\n",
              (dir / (results.size() > 1 ? "timeseries_*.csv" : "timeseries.csv"))
                  .string()
                  .c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// onsite

struct OnsiteOptions {
  double fixed_width = 0.1;
  double ratio_min = 0.2;
  double ratio_max = 5.0;
  int points = 241;
};

int cmd_onsite(const GlobalOptions& g, const OnsiteOptions& opt) {
  if (!(opt.fixed_width > 0) || !(opt.ratio_min > 0) ||
      !(opt.ratio_max > opt.ratio_min) || opt.points < 2)
    throw ConfigError("onsite: need positive widths, ratio_max > ratio_min, "
                      "and at least two points");

  const fs::path dir = prepare_output_dir(g);
  std::ofstream csv(dir / "onsite.csv");
  if (!csv) throw ConfigError("cannot write onsite.csv");
  csv << "ratio_perp_over_z,u_onsite\n";
  char buf[96];
  for (int k = 0; k < opt.points; ++k) {
    const double t = static_cast<double>(k) / (opt.points - 1);
    const double ratio =
        opt.ratio_min * std::pow(opt.ratio_max / opt.ratio_min, t);
    TrapGeometry geom;
    geom.ell_z = opt.fixed_width;
    geom.ell_perp = ratio * opt.fixed_width;
    const double u = onsite_U(geom, {});
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", ratio, u);
    csv << buf;
  }
  csv.close();

  const OnsiteMaxima mx = onsite_maxima(opt.fixed_width);
  json summary{{"ratio_perp_over_z", mx.ratio_perp_over_z},
               {"u_at_perp_max", mx.u_at_perp_max},
               {"ratio_z_over_perp", mx.ratio_z_over_perp},
               {"u_at_z_max", mx.u_at_z_max},
               {"depth_ratio_pancake", mx.depth_ratio_pancake},
               {"depth_ratio_cigar", mx.depth_ratio_cigar},
               {"fixed_width", opt.fixed_width},
               {"tool_version", version()}};
  std::ofstream js(dir / "onsite.json");
  js << summary.dump(2) << "\n";
  js.close();
  write_run_manifest(dir, g, "onsite", "");

  TrapGeometry iso;
  iso.ell_perp = iso.ell_z = opt.fixed_width;
  std::printf("isotropic check: U(ratio=1) = %.3g\n", onsite_U(iso, {}));
  std::printf("pancake maximum: ell_perp/ell_z = %.4f (U = %.6g), "
              "depth ratio nu_z/nu_perp = %.4f\n",
              mx.ratio_perp_over_z, mx.u_at_perp_max, mx.depth_ratio_pancake);
  std::printf("cigar maximum:   ell_z/ell_perp = %.4f (U = %.6g), "
              "depth ratio nu_perp/nu_z = %.4f\n",
              mx.ratio_z_over_perp, mx.u_at_z_max, mx.depth_ratio_cigar);
  std::printf("wrote %s\n", (dir / "onsite.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// check

struct CheckOptions {
  int trials = 10;
  double min_sep = 0.4;
  double max_sep = 3.0;
};

int cmd_check(const GlobalOptions& g, const CheckOptions& opt) {
  if (opt.trials < 1 || !(opt.min_sep > 0) || !(opt.max_sep >= opt.min_sep))
    throw ConfigError("check: need trials >= 1 and 0 < min-sep <= max-sep");

  const auto ls = LevelStructure::make(HalfInt::from_twice(1),
                                       HalfInt::from_twice(1));
  std::mt19937 rng(static_cast<std::mt19937::result_type>(g.seed));
  std::uniform_real_distribution<double> dist(opt.min_sep, opt.max_sep);

  json rows = json::array();
  bool all_ok = true;
  for (int trial = 0; trial < opt.trials; ++trial) {
    SiteArray sites;
    sites.positions = {Eigen::Vector3d::Zero(),
                       Eigen::Vector3d(dist(rng), dist(rng), dist(rng))};
    for (const auto& states :
         {std::vector<std::string>{"D_{0}", "G"},
          std::vector<std::string>{"D_{0}", "D_{0}"}}) {
      const MultisiteReport rep = multisite_dark_check(sites, ls, 2, states);
      all_ok = all_ok && rep.stationary;
      rows.push_back(json{{"trial", trial},
                          {"offset",
                           {sites.positions[1].x(), sites.positions[1].y(),
                            sites.positions[1].z()}},
                          {"states", states},
                          {"lindblad_residual", rep.lindblad_residual},
                          {"h_residual", rep.h_residual},
                          {"decay_rate", rep.decay_rate},
                          {"stationary", rep.stationary}});
      std::printf("trial %d %s x %s: residual %.3g -> %s\n", trial,
                  states[0].c_str(), states[1].c_str(), rep.lindblad_residual,
                  rep.stationary ? "stationary" : "NOT STATIONARY");
    }
  }

  // Bright control: the checker must flag a superradiant product.
  SiteArray control;
  control.positions = {Eigen::Vector3d::Zero(), Eigen::Vector3d(1.2, 0.3, 0.5)};
  const MultisiteReport bright = multisite_dark_check(control, ls, 2, {"S", "G"});
  const bool control_ok = !bright.stationary && bright.decay_rate > 1e-3;
  std::printf("bright control decay rate %.6f -> %s\n", bright.decay_rate,
              control_ok ? "flagged as expected" : "UNEXPECTEDLY STATIONARY");

  const fs::path dir = prepare_output_dir(g);
  json summary{{"trials", rows},
               {"all_stationary", all_ok},
               {"control_decay_rate", bright.decay_rate},
               {"control_flagged", control_ok},
               {"seed", g.seed},
               {"tool_version", version()}};
  std::ofstream js(dir / "check.json");
  if (!js) throw ConfigError("cannot write check.json");
  js << summary.dump(2) << "\n";
  js.close();
  write_run_manifest(dir, g, "check", "");
  std::printf("wrote %s\n", (dir / "check.json").string().c_str());
  return (all_ok && control_ok) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fermidark: dark-state census, decay spectra, preparation dynamics, and "
      "onsite dipolar coefficients for multilevel fermionic atoms in optical "
      "lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FERMIDARK_VERSION);

  GlobalOptions g;
  app.add_option("--out", g.out_dir,
                 "output directory (env FERMIDARK_OUTPUT_ROOT)")
      ->envname("FERMIDARK_OUTPUT_ROOT")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for config sweeps")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomized geometry checks")
      ->capture_default_str();

  SpectrumOptions spec_opt;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "eigenmodes, decay-rate groups, and dark counts");
  spectrum->add_option("--config", spec_opt.config_path, "JSON config file");
  spectrum->add_option("--fg", spec_opt.fg, "ground-manifold spin, e.g. 9/2");
  spectrum->add_option("--fe", spec_opt.fe, "excited-manifold spin");
  spectrum->add_option("--n", spec_opt.n, "fermions per site")
      ->capture_default_str();
  spectrum->add_option("--U", spec_opt.u, "onsite coefficient, units of gamma")
      ->capture_default_str();

  SpectrumOptions darks_opt;
  CLI::App* darks = app.add_subcommand(
      "darks", "analytic dark census cross-checked against null spaces");
  darks->add_option("--config", darks_opt.config_path, "JSON config file");
  darks->add_option("--fg", darks_opt.fg, "ground-manifold spin");
  darks->add_option("--fe", darks_opt.fe, "excited-manifold spin");
  darks->add_option("--n", darks_opt.n, "fermions per site")
      ->capture_default_str();

  PrepareOptions prep_opt;
  CLI::App* prepare = app.add_subcommand(
      "prepare", "driven preparation dynamics (Raman / Zeeman / free decay)");
  prepare->add_option("--config", prep_opt.config_path,
                      "experiment config (object or array for a sweep)");
  prepare->add_option("--preset", prep_opt.preset,
                      "named preset, resolved under --preset-dir");
  prepare->add_option("--preset-dir", prep_opt.preset_dir,
                      "preset directory (env FERMIDARK_PRESET_DIR; default "
                      "./presets)");

  OnsiteOptions onsite_opt;
  CLI::App* onsite = app.add_subcommand(
      "onsite", "onsite coefficient sweep over the trap shape ratio");
  onsite->add_option("--fixed-width", onsite_opt.fixed_width,
                     "axial width ell_z, units of 1/k0")
      ->capture_default_str();
  onsite->add_option("--ratio-min", onsite_opt.ratio_min, "smallest ratio")
      ->capture_default_str();
  onsite->add_option("--ratio-max", onsite_opt.ratio_max, "largest ratio")
      ->capture_default_str();
  onsite->add_option("--points", onsite_opt.points, "sweep points")
      ->capture_default_str();

  CheckOptions check_opt;
  CLI::App* check = app.add_subcommand(
      "check", "randomized two-site product-dark stationarity report");
  check->add_option("--trials", check_opt.trials, "random geometries")
      ->capture_default_str();
  check->add_option("--min-sep", check_opt.min_sep,
                    "minimum per-axis site offset, units of 1/k0")
      ->capture_default_str();
  check->add_option("--max-sep", check_opt.max_sep,
                    "maximum per-axis site offset, units of 1/k0")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors are configuration errors
  }

  {
    std::ostringstream cl;
    for (int i = 0; i < argc; ++i) cl << (i ? " " : "") << argv[i];
    g.command_line = cl.str();
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(g, spec_opt);
    if (darks->parsed()) return cmd_darks(g, darks_opt);
    if (prepare->parsed()) return cmd_prepare(g, prep_opt);
    if (onsite->parsed()) return cmd_onsite(g, onsite_opt);
    if (check->parsed()) return cmd_check(g, check_opt);
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "integrator failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
