#include "rodeo/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "rodeo/baselines.hpp"
#include "rodeo/errors.hpp"
#include "rodeo/hamiltonians.hpp"
#include "rodeo/output.hpp"
#include "rodeo/rodeo_engine.hpp"
#include "rodeo/scan.hpp"
#include "rodeo/spectral_core.hpp"

namespace rodeo {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Options {
  // shared
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  std::string manifest;

  // model
  std::string model = "heisenberg";
  std::optional<int> sites;
  double J = 1.0;
  double h = 3.0;
  bool open_chain = false;
  double disorder_rms = 0.5;
  std::uint64_t disorder_seed = 0;
  std::optional<double> disorder_const;
  std::string hamiltonian_file;
  std::optional<std::string> init;

  // rodeo
  std::optional<int> cycles;
  std::vector<int> cycle_list;
  std::optional<double> trms;
  std::optional<double> filter_energy;
  int averages = 20;
  bool recenter = false;
  double isolation_radius = 0.0;
  std::string accounting = "sum-abs";

  // scan / search
  std::optional<double> emin;
  std::optional<double> emax;
  std::optional<int> points;
  double shrink = 4.0;
  double epsilon = 1e-3;
  double peak_z = 5.0;
  std::string select = "strongest";
  std::optional<double> min_weight;
  int max_scans = 64;

  // baselines
  std::vector<double> total_time;
  int steps = 16;
  double tol = 1e-6;
  int phase_bits = 4;
  std::optional<double> base_time;
  std::vector<double> t_ae;
  int seeds = 25;

  // verify
  bool rerun = false;
  std::optional<unsigned> rerun_threads;
};

struct Model {
  std::optional<HermitianOperator> hamiltonian;
  int spin_sites = 0;  // 0 when the model is not a spin chain
  std::vector<double> disorder;
  ComplexVector init;
  std::string init_label;
};

struct Output {
  CsvTable table;
  Json results = Json::object();
  Json resolved = Json::object();
};

TimeAccounting accounting_of(const std::string& name) {
  return name == "n-times-trms" ? TimeAccounting::kNTimesTrms : TimeAccounting::kSumAbs;
}

int spin_sites_of(Index dim) {
  for (int l = 1; l <= kMaxSpinSites; ++l)
    if (Index{1} << l == dim) return l;
  return 0;
}

std::string alternating_bits(int sites) {
  std::string s;
  for (int j = 0; j < sites; ++j) s += (j % 2 == 0) ? '0' : '1';
  return s;
}

Model build_model(const Options& o) {
  Model m;
  std::string default_init;
  if (!o.hamiltonian_file.empty() && o.model != "file")
    throw ValidationError("--hamiltonian-file needs --model file");
  if (o.model == "heisenberg") {
    HeisenbergParams p;
    p.sites = o.sites.value_or(10);
    p.J = o.J;
    p.h = o.h;
    p.periodic = !o.open_chain;
    m.hamiltonian.emplace(build_heisenberg(p));
    m.spin_sites = p.sites;
    default_init = alternating_bits(p.sites);
  } else if (o.model == "anderson") {
    AndersonParams p;
    p.sites = o.sites.value_or(100);
    if (o.disorder_const)
      p.disorder = ExplicitDisorder{std::vector<double>(static_cast<std::size_t>(std::max(p.sites, 0)),
                                                        *o.disorder_const)};
    else
      p.disorder = GaussianDisorder{o.disorder_rms, o.disorder_seed};
    m.hamiltonian.emplace(build_anderson(p));
    m.disorder = realize_disorder(p);
    default_init = "kmin";
  } else {
    if (o.hamiltonian_file.empty()) throw ValidationError("--model file requires --hamiltonian-file");
    m.hamiltonian.emplace(load_hamiltonian(o.hamiltonian_file));
    m.spin_sites = spin_sites_of(m.hamiltonian->dim());
    default_init = "site:0";
  }

  const Index dim = m.hamiltonian->dim();
  const std::string spec = o.init.value_or(default_init);
  m.init_label = spec;
  if (spec == "kmin") {
    if (m.disorder.empty()) throw ValidationError("--init kmin needs the anderson model");
    m.init = build_site_state(dim, find_kmin(m.disorder));
    m.init_label = "site:" + std::to_string(find_kmin(m.disorder));
  } else if (spec.rfind("site:", 0) == 0) {
    Index k = 0;
    try {
      std::size_t used = 0;
      k = std::stoll(spec.substr(5), &used);
      if (used != spec.size() - 5) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("--init site:k needs an integer k, got '" + spec + "'");
    }
    m.init = build_site_state(dim, k);
  } else {
    if (m.spin_sites == 0) throw ValidationError("bitstring --init needs a spin model");
    if (static_cast<int>(spec.size()) != m.spin_sites)
      throw ValidationError("--init bitstring has " + std::to_string(spec.size()) + " sites, model has " +
                            std::to_string(m.spin_sites));
    m.init = build_product_state(spec);
  }
  return m;
}

double lowest_occupied(const SpectralWeights& w, double floor) {
  for (const auto& lv : w.levels)
    if (lv.weight > floor) return lv.energy;
  throw DomainError("initial state has no occupied level");
}

// Eigenvector index nearest `energy` among those the state occupies.
Index occupied_target(const SpectralState& s, const EigenDecomposition& eig, double energy) {
  Index best = -1;
  for (Index j = 0; j < s.dim(); ++j) {
    if (s.weight(j) <= 1e-12) continue;
    if (best < 0 || std::abs(eig.energies[j] - energy) < std::abs(eig.energies[best] - energy) - 1e-12 ||
        (std::abs(std::abs(eig.energies[j] - energy) - std::abs(eig.energies[best] - energy)) <= 1e-12 &&
         s.weight(j) > s.weight(best)))
      best = j;
  }
  if (best < 0) throw DomainError("initial state has no occupied eigenvector");
  return best;
}

void add_level_rows(CsvTable& t, const SpectralWeights& w, double min_weight) {
  for (const auto& lv : w.levels)
    if (lv.weight >= min_weight) t.add_row({format_double(lv.energy), format_double(lv.weight)});
}

ScanConfig scan_config(const Options& o, const SpectralWeights& w, Json& resolved) {
  ScanConfig sc;
  sc.e_min = o.emin.value_or(w.levels.front().energy - 1.0);
  sc.e_max = o.emax.value_or(w.levels.back().energy + 1.0);
  sc.points = o.points.value_or(101);
  sc.cycles = o.cycles.value_or(9);
  sc.t_rms = o.trms.value_or(5.0);
  sc.averages = o.averages;
  sc.seed = o.seed;
  sc.accounting = accounting_of(o.accounting);
  sc.validate();
  resolved["emin"] = sc.e_min;
  resolved["emax"] = sc.e_max;
  resolved["points"] = sc.points;
  resolved["cycles"] = sc.cycles;
  resolved["trms"] = sc.t_rms;
  return sc;
}

Output cmd_spectrum(const Options& o, const Model& m, const Parallelism&) {
  const auto eig = eigendecompose(*m.hamiltonian);
  Output out{CsvTable({"energy", "weight"})};
  if (o.init) {
    const auto w = weights_of(project_to_eigenbasis(m.init, eig), eig);
    const double floor = o.min_weight.value_or(1e-12);
    add_level_rows(out.table, w, floor);
    out.resolved["min_weight"] = floor;
  } else {
    const double uniform = 1.0 / static_cast<double>(eig.dim());
    for (double e : eig.energies) out.table.add_row({format_double(e), format_double(uniform)});
  }
  out.results["dimension"] = eig.dim();
  out.results["ground_energy"] = eig.energies.front();
  return out;
}

Output cmd_scan(const Options& o, const Model& m, const Parallelism& par) {
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto w = weights_of(project_to_eigenbasis(m.init, eig), eig);
  Output out{CsvTable({"energy", "mean_success", "stderr"})};
  const auto sc = scan_config(o, w, out.resolved);
  const auto r = scan_spectral(w, sc, par);
  for (std::size_t i = 0; i < r.size(); ++i)
    out.table.add_row({format_double(r.energies[i]), format_double(r.mean_success[i]),
                       format_double(r.stderr_success[i])});
  out.results["total_evolution_time"] = r.total_evolution_time;
  return out;
}

Output cmd_peaks(const Options& o, const Model& m, const Parallelism& par) {
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto w = weights_of(project_to_eigenbasis(m.init, eig), eig);
  Output out{CsvTable({"energy", "height", "grid_index"})};
  const auto sc = scan_config(o, w, out.resolved);
  const auto r = scan_spectral(w, sc, par);
  const auto peaks = detect_peaks(r, o.peak_z);
  for (const auto& p : peaks.peaks)
    out.table.add_row({format_double(p.location), format_double(p.height), std::to_string(p.index)});
  out.results["background"] = peaks.background_level;
  out.results["total_evolution_time"] = r.total_evolution_time;
  return out;
}

Output cmd_search(const Options& o, const Model& m, const Parallelism& par) {
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto w = weights_of(project_to_eigenbasis(m.init, eig), eig);
  SearchConfig cfg;
  cfg.shrink = o.shrink;
  cfg.epsilon = o.epsilon;
  cfg.cycles = o.cycles.value_or(8);
  cfg.points = o.points.value_or(16);
  cfg.initial_t_rms = o.trms.value_or(0.0);
  cfg.max_scans = o.max_scans;
  cfg.averages = o.averages;
  cfg.min_weight = o.min_weight.value_or(0.01);
  cfg.z_threshold = o.peak_z;
  cfg.selection = o.select == "lowest" ? PeakSelection::kLowest : PeakSelection::kStrongest;
  cfg.seed = o.seed;
  cfg.accounting = accounting_of(o.accounting);
  cfg.validate();
  const double lo = o.emin.value_or(w.levels.front().energy - 1.0);
  const double hi = o.emax.value_or(w.levels.back().energy + 1.0);

  Output out{CsvTable({"scan", "e_min", "e_max", "t_rms", "peak_energy", "peak_height", "evolution_time"})};
  out.resolved["emin"] = lo;
  out.resolved["emax"] = hi;
  out.resolved["cycles"] = cfg.cycles;
  out.resolved["points"] = cfg.points;
  out.resolved["min_weight"] = cfg.min_weight;
  const auto r = hierarchical_search(w, lo, hi, cfg, par);
  for (std::size_t s = 0; s < r.history.size(); ++s) {
    const auto& step = r.history[s];
    out.table.add_row({std::to_string(s + 1), format_double(step.scan.config.e_min),
                       format_double(step.scan.config.e_max), format_double(step.scan.config.t_rms),
                       format_double(step.chosen.location), format_double(step.chosen.height),
                       format_double(step.scan.total_evolution_time)});
  }
  out.results["estimate"] = r.estimate;
  out.results["scans"] = r.history.size();
  out.results["shrink_used"] = r.shrink_used;
  out.results["total_evolution_time"] = r.total_evolution_time;
  return out;
}

Output cmd_prepare(const Options& o, const Model& m, const Parallelism&) {
  if (!o.filter_energy) throw ValidationError("prepare requires --filter-energy");
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto start = project_to_eigenbasis(m.init, eig);
  RodeoConfig rc;
  rc.cycles = o.cycles.value_or(9);
  rc.t_rms = o.trms.value_or(5.0);
  rc.filter_energy = *o.filter_energy;
  rc.seed = o.seed;
  rc.recenter = o.recenter;
  rc.isolation_radius = o.isolation_radius;
  rc.accounting = accounting_of(o.accounting);
  const auto prepared = prepare_eigenstate(start, eig, *o.filter_energy, rc, o.seed);

  Output out{CsvTable({"cycle", "filter_energy", "delta", "survival_probability"})};
  out.resolved["cycles"] = rc.cycles;
  out.resolved["trms"] = rc.t_rms;
  for (const auto& t : prepared.report.trace)
    out.table.add_row({std::to_string(t.cycle), format_double(t.filter_energy), format_double(t.delta),
                       format_double(t.survival_probability)});
  out.results["target_energy"] = eig.energies[prepared.report.target];
  out.results["delta"] = prepared.report.delta;
  out.results["overlap"] = prepared.report.overlap;
  out.results["evolution_time"] = prepared.schedule.total_time(rc.accounting);
  return out;
}

void require_spin(const Model& m, const char* command) {
  if (m.spin_sites == 0)
    throw ValidationError(std::string(command) + " needs a spin model (dimension 2^L)");
}

Output cmd_adiabatic(const Options& o, const Model& m, const Parallelism&) {
  require_spin(m, "adiabatic");
  if (o.total_time.size() != 1) throw ValidationError("adiabatic takes exactly one --total-time");
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto initial = build_staggered_field(m.spin_sites);
  AdiabaticConfig ac;
  ac.total_time = o.total_time.front();
  ac.steps = o.steps;
  ac.convergence_tol = o.tol;
  std::optional<ComplexVector> target;
  if (o.filter_energy) {
    const auto s = project_to_eigenbasis(m.init, eig);
    target = eig.vector(occupied_target(s, eig, *o.filter_energy));
  }
  const auto r = adiabatic_evolve(m.init, initial, *m.hamiltonian, ac, target);
  ComplexVector state = r.state;
  state.normalize();
  const auto w = weights_of(project_to_eigenbasis(state, eig), eig);
  Output out{CsvTable({"energy", "weight"})};
  const double floor = o.min_weight.value_or(1e-12);
  out.resolved["min_weight"] = floor;
  add_level_rows(out.table, w, floor);
  out.results["steps"] = r.steps;
  out.results["last_change"] = r.last_change;
  if (target) out.results["target_overlap"] = std::norm(target->dot(state));
  return out;
}

QpeConfig qpe_config(const Options& o, const EigenDecomposition& eig) {
  QpeConfig qc = default_qpe_config(eig, o.phase_bits);
  if (o.emin) qc.window_min = *o.emin;
  if (o.emax) qc.window_max = *o.emax;
  if (o.base_time) {
    if (!(*o.base_time > 0.0)) throw ValidationError("--base-time must be positive");
    qc.window_max = qc.window_min + 2.0 * std::numbers::pi / *o.base_time;
  }
  qc.validate();
  return qc;
}

Output cmd_qpe(const Options& o, const Model& m, const Parallelism&) {
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto start = project_to_eigenbasis(m.init, eig);
  const auto qc = qpe_config(o, eig);
  const auto probs = qpe_outcome_probabilities(start, eig, qc);
  Output out{CsvTable({"outcome", "energy", "probability"})};
  out.resolved["window_min"] = qc.window_min;
  out.resolved["window_max"] = qc.window_max;
  const double step = (qc.window_max - qc.window_min) / static_cast<double>(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k)
    out.table.add_row({std::to_string(k), format_double(qc.window_min + step * static_cast<double>(k)),
                       format_double(probs[k])});
  out.results["base_time"] = qc.base_time();
  out.results["total_time"] = qc.total_time();
  if (o.filter_energy) {
    const Index target = occupied_target(start, eig, *o.filter_energy);
    const auto r = qpe_filter(start, eig, qc, qpe_nearest_outcome(qc, eig.energies[target]));
    out.results["outcome"] = r.outcome;
    out.results["outcome_probability"] = r.probability;
    out.results["delta"] = residual(r.posterior, target).delta;
  }
  return out;
}

Index default_target(const Options& o, const SpectralState& s, const EigenDecomposition& eig) {
  const double e = o.filter_energy ? *o.filter_energy : lowest_occupied(weights_of(s, eig), 1e-12);
  return occupied_target(s, eig, e);
}

Output cmd_compare(const Options& o, const Model& m, const Parallelism& par) {
  require_spin(m, "compare");
  if (o.total_time.empty()) throw ValidationError("compare requires --total-time budgets");
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto start = project_to_eigenbasis(m.init, eig);
  const Index target = default_target(o, start, eig);
  CompareConfig cfg;
  cfg.t_rms = o.trms.value_or(1.0);
  cfg.seeds = o.seeds;
  cfg.seed = o.seed;
  cfg.accounting = accounting_of(o.accounting);
  cfg.adiabatic_tol = o.tol;
  std::vector<double> budgets = o.total_time;
  std::sort(budgets.begin(), budgets.end());
  const auto rows = compare_methods(m.init, build_staggered_field(m.spin_sites), *m.hamiltonian, eig,
                                    target, budgets, cfg, par);
  Output out{CsvTable({"method", "total_time", "log10_delta", "seed"})};
  out.resolved["trms"] = cfg.t_rms;
  out.resolved["target_energy"] = eig.energies[target];
  Json params = Json::array();
  for (const auto& r : rows) {
    out.table.add_row({method_name(r.method), format_double(r.total_time), format_double(r.log_delta),
                       std::to_string(r.seed)});
    params.push_back(method_name(r.method) + "@" + format_double(r.total_time) + ":" + r.params);
  }
  out.results["initial_overlap"] = start.weight(target);
  out.results["parameters"] = params;
  return out;
}

Output cmd_precondition(const Options& o, const Model& m, const Parallelism& par) {
  require_spin(m, "precondition");
  const auto eig = eigendecompose(*m.hamiltonian);
  const auto start = project_to_eigenbasis(m.init, eig);
  const Index target = default_target(o, start, eig);
  const double t_rms = o.trms.value_or(5.0);
  std::vector<double> t_ae = o.t_ae.empty() ? std::vector<double>{0.0} : o.t_ae;
  std::vector<int> cycles = o.cycle_list.empty() ? std::vector<int>{0, 3, 6, 9} : o.cycle_list;
  const auto initial = build_staggered_field(m.spin_sites);
  Output out{CsvTable({"t_ae", "cycles", "mean_overlap", "stderr"})};
  out.resolved["trms"] = t_rms;
  out.resolved["target_energy"] = eig.energies[target];
  for (double t : t_ae) {
    const auto row = precondition_then_rodeo(m.init, initial, *m.hamiltonian, eig, target, t, t_rms,
                                             cycles, o.seeds, o.seed, par);
    for (const auto& c : row.cells)
      out.table.add_row({format_double(t), std::to_string(c.cycles), format_double(c.mean),
                         format_double(c.stderr_value)});
  }
  return out;
}

Json config_of(const CLI::App& sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->count() > 0) {
      if (opt->get_type_size() == 0) {
        cfg[name] = true;
        continue;
      }
      std::string joined;
      for (const auto& v : opt->results()) joined += (joined.empty() ? "" : ",") + v;
      cfg[name] = joined;
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    } else {
      cfg[name] = nullptr;
    }
  }
  return cfg;
}

fs::path default_manifest_path(const std::string& out) { return fs::path(out + ".manifest.json"); }

std::string relative_to(const fs::path& file, const fs::path& manifest) {
  const fs::path base = fs::absolute(manifest).parent_path();
  return fs::absolute(file).lexically_normal().lexically_relative(base).generic_string();
}

// Replaces the values of --out and --manifest in a recorded command line.
std::vector<std::string> redirect_outputs(std::vector<std::string> args, const fs::path& out,
                                          const fs::path& manifest,
                                          std::optional<unsigned> threads) {
  std::vector<std::string> r;
  bool saw_manifest = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    auto replace = [&](const std::string& flag, const fs::path& value) {
      if (a == flag) {
        r.push_back(flag);
        r.push_back(value.string());
        ++i;
        return true;
      }
      if (a.rfind(flag + "=", 0) == 0) {
        r.push_back(flag + "=" + value.string());
        return true;
      }
      return false;
    };
    if (replace("--out", out)) continue;
    if (replace("--manifest", manifest)) {
      saw_manifest = true;
      continue;
    }
    if (threads) {
      if (a == "--threads") {
        ++i;
        continue;
      }
      if (a.rfind("--threads=", 0) == 0) continue;
    }
    r.push_back(a);
  }
  if (!saw_manifest) {
    r.push_back("--manifest");
    r.push_back(manifest.string());
  }
  if (threads) {
    r.push_back("--threads");
    r.push_back(std::to_string(*threads));
  }
  return r;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path manifest_path = o.manifest;
  const RunManifest m = load_manifest(manifest_path);
  const auto bad = check_digests(m, manifest_path);
  for (const auto& b : bad) err << "verify: " << b.path << ": " << b.reason << "\n";
  if (!bad.empty()) return kExitRuntime;
  if (!o.rerun) {
    out << "verify: " << m.outputs.size() << " file(s) match\n";
    return kExitOk;
  }

  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() /
                       ("rodeo-verify-" + std::to_string(rd()) + "-" + std::to_string(rd()));
  fs::create_directories(dir);
  const fs::path data = dir / "rerun.csv";
  const fs::path rerun_manifest = dir / "rerun.manifest.json";
  std::ostringstream sink;
  const auto args = redirect_outputs(m.command_line, data, rerun_manifest, o.rerun_threads);
  const int code = run_cli(args, sink, err);
  int result = kExitOk;
  if (code != kExitOk) {
    err << "verify: re-run exited with " << code << "\n";
    result = kExitRuntime;
  } else {
    const RunManifest again = load_manifest(rerun_manifest);
    if (again.outputs.size() != m.outputs.size()) {
      err << "verify: re-run produced " << again.outputs.size() << " file(s), manifest lists "
          << m.outputs.size() << "\n";
      result = kExitRuntime;
    } else {
      for (std::size_t i = 0; i < m.outputs.size(); ++i)
        if (again.outputs[i].sha256 != m.outputs[i].sha256) {
          err << "verify: " << m.outputs[i].path << ": re-run data differs\n";
          result = kExitRuntime;
        }
    }
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (result == kExitOk) out << "verify: " << m.outputs.size() << " file(s) match, re-run identical\n";
  return result;
}

void add_shared(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)")
      ->check(CLI::Range(0u, 1024u));
  sub->add_option("--out", o.out, "CSV data file")->required();
  sub->add_option("--manifest", o.manifest, "JSON manifest (default <out>.manifest.json)");
}

void add_model(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "Object Hamiltonian")
      ->check(CLI::IsMember({"heisenberg", "anderson", "file"}));
  sub->add_option("--sites", o.sites, "Spin sites (heisenberg, default 10) or lattice sites (anderson, default 100)")
      ->check(CLI::Range(2, 4096));
  sub->add_option("--J", o.J, "Heisenberg exchange coupling");
  sub->add_option("--h", o.h, "Heisenberg longitudinal field");
  sub->add_flag("--open", o.open_chain, "Open Heisenberg chain instead of periodic");
  sub->add_option("--disorder-rms", o.disorder_rms, "Anderson disorder RMS")
      ->check(CLI::Range(0.0, 1e6));
  sub->add_option("--disorder-seed", o.disorder_seed, "Anderson disorder seed");
  sub->add_option("--disorder-const", o.disorder_const, "Uniform Anderson on-site energy (overrides RMS)");
  sub->add_option("--hamiltonian-file", o.hamiltonian_file, "JSON coordinate-format Hamiltonian");
  sub->add_option("--init", o.init,
                  "Initial state: bitstring, site:k or kmin (default 0101... / kmin / site:0)");
}

void add_accounting(CLI::App* sub, Options& o) {
  sub->add_option("--time-accounting", o.accounting, "Evolution time per cycle run")
      ->check(CLI::IsMember({"sum-abs", "n-times-trms"}));
}

void add_scan_flags(CLI::App* sub, Options& o) {
  sub->add_option("--cycles", o.cycles, "Cycles per schedule (default 9)")->check(CLI::Range(1, 1000));
  sub->add_option("--trms", o.trms, "RMS evolution time (default 5)")->check(CLI::PositiveNumber);
  sub->add_option("--averages", o.averages, "Schedules per grid point")->check(CLI::Range(1, 1000000));
  sub->add_option("--emin", o.emin, "Lower scan energy (default lowest level - 1)");
  sub->add_option("--emax", o.emax, "Upper scan energy (default highest level + 1)");
  sub->add_option("--points", o.points, "Grid points (default 101)")->check(CLI::Range(2, 10000000));
  add_accounting(sub, o);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Rodeo eigenstate filtering: spectra, scans, searches and baselines", "rodeo"};
  // --h is the Heisenberg field, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kArtifactVersion));

  using Handler = std::function<Output(const Options&, const Model&, const Parallelism&)>;
  std::vector<std::pair<CLI::App*, Handler>> commands;

  auto* spectrum = app.add_subcommand("spectrum-exact", "Exact eigenvalues, or level weights of --init");
  add_shared(spectrum, o);
  add_model(spectrum, o);
  spectrum->add_option("--min-weight", o.min_weight, "Smallest level weight written (default 1e-12)");
  commands.emplace_back(spectrum, cmd_spectrum);

  auto* scan = app.add_subcommand("scan", "Averaged success probability over an energy grid");
  add_shared(scan, o);
  add_model(scan, o);
  add_scan_flags(scan, o);
  commands.emplace_back(scan, cmd_scan);

  auto* peaks = app.add_subcommand("peaks", "Scan, then list peaks above the background");
  add_shared(peaks, o);
  add_model(peaks, o);
  add_scan_flags(peaks, o);
  peaks->add_option("--peak-z", o.peak_z, "Peak threshold in standard errors")->check(CLI::NonNegativeNumber);
  commands.emplace_back(peaks, cmd_peaks);

  auto* search = app.add_subcommand("search", "Hierarchical eigenvalue search");
  add_shared(search, o);
  add_model(search, o);
  search->add_option("--cycles", o.cycles, "Cycles per scan (default 8)")->check(CLI::Range(1, 1000));
  search->add_option("--trms", o.trms, "Initial RMS time (default: matched to the first grid)")
      ->check(CLI::NonNegativeNumber);
  search->add_option("--averages", o.averages, "Schedules per grid point")->check(CLI::Range(1, 1000000));
  search->add_option("--emin", o.emin, "Lower edge of the first window");
  search->add_option("--emax", o.emax, "Upper edge of the first window");
  search->add_option("--points", o.points, "Grid points per scan (default 16)")->check(CLI::Range(3, 100000));
  search->add_option("--shrink-K", o.shrink, "Largest window shrink factor per scan")
      ->check(CLI::Range(1.000001, 1e6));
  search->add_option("--epsilon", o.epsilon, "Target resolution")->check(CLI::PositiveNumber);
  search->add_option("--peak-z", o.peak_z, "Peak threshold in standard errors")->check(CLI::NonNegativeNumber);
  search->add_option("--select", o.select, "Peak followed between scans")
      ->check(CLI::IsMember({"strongest", "lowest"}));
  search->add_option("--min-weight", o.min_weight, "Smallest level weight worth following (default 0.01)")
      ->check(CLI::Range(1e-12, 1.0));
  search->add_option("--max-scans", o.max_scans, "Scan limit")->check(CLI::Range(1, 1000));
  add_accounting(search, o);
  commands.emplace_back(search, cmd_search);

  auto* prepare = app.add_subcommand("prepare", "Post-selected cycles towards one eigenvector");
  add_shared(prepare, o);
  add_model(prepare, o);
  prepare->add_option("--cycles", o.cycles, "Cycles (default 9)")->check(CLI::Range(1, 100000));
  prepare->add_option("--trms", o.trms, "RMS evolution time (default 5)")->check(CLI::PositiveNumber);
  prepare->add_option("--filter-energy", o.filter_energy, "Starting filter energy")->required();
  prepare->add_flag("--recenter", o.recenter, "Move the filter energy to the fitted peak after each cycle");
  prepare->add_option("--isolation-radius", o.isolation_radius,
                      "Refuse if another occupied level is this close (0 = 1/trms)")
      ->check(CLI::NonNegativeNumber);
  add_accounting(prepare, o);
  commands.emplace_back(prepare, cmd_prepare);

  auto* adiabatic = app.add_subcommand("adiabatic", "Adiabatic evolution from the staggered field");
  add_shared(adiabatic, o);
  add_model(adiabatic, o);
  adiabatic->add_option("--total-time", o.total_time, "Evolution time")
      ->required()
      ->expected(1)
      ->check(CLI::PositiveNumber);
  adiabatic->add_option("--steps", o.steps, "Initial step count (doubled until converged)")
      ->check(CLI::Range(2, 1 << 24));
  adiabatic->add_option("--tol", o.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  adiabatic->add_option("--filter-energy", o.filter_energy, "Converge on the overlap with the level nearest this");
  adiabatic->add_option("--min-weight", o.min_weight, "Smallest level weight written (default 1e-12)");
  commands.emplace_back(adiabatic, cmd_adiabatic);

  auto* qpe = app.add_subcommand("qpe", "Phase estimation outcome distribution");
  add_shared(qpe, o);
  add_model(qpe, o);
  qpe->add_option("--phase-bits", o.phase_bits, "Register qubits")->check(CLI::Range(0, 20));
  qpe->add_option("--base-time", o.base_time, "Evolution time of one controlled-U")->check(CLI::PositiveNumber);
  qpe->add_option("--emin", o.emin, "Phase window lower edge (default lowest level - 1)");
  qpe->add_option("--emax", o.emax, "Phase window upper edge (default highest level + 1)");
  qpe->add_option("--filter-energy", o.filter_energy, "Condition on the outcome nearest this level");
  commands.emplace_back(qpe, cmd_qpe);

  auto* compare = app.add_subcommand("compare", "Residual versus evolution time for every method");
  add_shared(compare, o);
  add_model(compare, o);
  compare->add_option("--total-time", o.total_time, "Time budgets")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  compare->add_option("--trms", o.trms, "RMS evolution time (default 1)")->check(CLI::PositiveNumber);
  compare->add_option("--seeds", o.seeds, "Schedules per budget")->check(CLI::Range(1, 1000000));
  compare->add_option("--filter-energy", o.filter_energy, "Target level (default lowest occupied)");
  compare->add_option("--tol", o.tol, "Adiabatic convergence tolerance")->check(CLI::PositiveNumber);
  add_accounting(compare, o);
  commands.emplace_back(compare, cmd_compare);

  auto* precondition = app.add_subcommand("precondition", "Adiabatic evolution followed by cycles");
  add_shared(precondition, o);
  add_model(precondition, o);
  precondition->add_option("--t-ae", o.t_ae, "Adiabatic times (default 0)")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  precondition->add_option("--cycles", o.cycle_list, "Cycle counts (default 0,3,6,9)")
      ->delimiter(',')
      ->check(CLI::Range(0, 100000));
  precondition->add_option("--trms", o.trms, "RMS evolution time (default 5)")->check(CLI::PositiveNumber);
  precondition->add_option("--seeds", o.seeds, "Schedules per cell")->check(CLI::Range(1, 10000000));
  precondition->add_option("--filter-energy", o.filter_energy, "Target level (default lowest occupied)");
  commands.emplace_back(precondition, cmd_precondition);

  auto* verify = app.add_subcommand("verify", "Check a manifest's digests, optionally re-running it");
  verify->add_option("--manifest", o.manifest, "Manifest to check")->required();
  verify->add_flag("--rerun", o.rerun, "Re-run the recorded command and compare data bytes");
  verify->add_option("--threads", o.rerun_threads, "Thread count for the re-run")
      ->check(CLI::Range(1u, 1024u));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(o, out, err);

    for (auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      const auto started = std::chrono::steady_clock::now();
      Parallelism par{o.threads};
      const Model model = build_model(o);
      Output result = handler(o, model, par);
      const fs::path data_path = o.out;
      const fs::path manifest_path = o.manifest.empty() ? default_manifest_path(o.out) : fs::path(o.manifest);
      const std::string digest = emit_csv(result.table, data_path);

      RunManifest m;
      m.command_line = args;
      m.subcommand = sub->get_name();
      m.config = config_of(*sub);
      m.config["resolved"] = result.resolved;
      m.config["resolved"]["init"] = model.init_label;
      m.config["resolved"]["dimension"] = model.hamiltonian->dim();
      m.seed = o.seed;
      m.outputs.push_back({relative_to(data_path, manifest_path), digest, result.table.text().size()});
      m.results = result.results;
      m.duration_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      save_manifest(m, manifest_path);
      out << sub->get_name() << ": wrote " << result.table.rows() << " rows to " << o.out << "\n";
      return kExitOk;
    }
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace rodeo
