// Acceptance suite. `rodeo_acceptance` runs every criterion, `rodeo_acceptance 7`
// runs one. Each prints a single PASS/FAIL line followed by indented detail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "rodeo/baselines.hpp"
#include "rodeo/errors.hpp"
#include "rodeo/hamiltonians.hpp"
#include "rodeo/output.hpp"
#include "rodeo/random.hpp"
#include "rodeo/rodeo_engine.hpp"
#include "rodeo/scan.hpp"

using namespace rodeo;
namespace fs = std::filesystem;

namespace {

// Tolerances, pinned.
constexpr double kLevelTol = 0.05;            // 1
constexpr double kOverlapTol = 0.001;         // 2, 7
constexpr double kSlopeRelTol = 0.10;         // 3
constexpr double kMcSigmas = 3.0;             // 4
constexpr double kCircuitTol = 1e-10;         // 5, 11
constexpr double kPeakRelTol = 0.25;          // 6, 10
constexpr double kBackgroundMax = 0.02;       // 6
constexpr double kMinPeakWeight = 0.03;       // 6, 10
constexpr double kR2Min = 0.9;                // 8
constexpr double kTrackTol = 0.3;             // 8
constexpr double kBaselineRatio = 0.1;        // 8
constexpr double kTimeRatioSlack = 2.0;       // 9
constexpr double kCleanBandTol = 1e-10;       // 10

struct Report {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << "    " << (ok ? "ok   " : "FAIL ") << what << "\n";
  }
};

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct HeisenbergSetup {
  HermitianOperator initial = build_staggered_field(10);
  HermitianOperator object = build_heisenberg({10, 1.0, 3.0, true});
  EigenDecomposition eig;
  ComplexVector psi = build_product_state("0101010101");
  SpectralWeights weights;
  Index target = 0;  // lowest eigenvector with weight

  HeisenbergSetup() {
    eig = eigendecompose(object);
    weights = weights_of(project_to_eigenbasis(psi, eig), eig);
    while (weights.weights[static_cast<std::size_t>(target)] < 1e-10) ++target;
  }
};

const HeisenbergSetup& heisenberg() {
  static const HeisenbergSetup s;
  return s;
}

std::vector<SpectralLevel> occupied_levels(const SpectralWeights& w, double floor = 1e-10) {
  std::vector<SpectralLevel> out;
  for (const auto& lv : w.levels)
    if (lv.weight > floor) out.push_back(lv);
  return out;
}

// Energy and N = 0 overlap printed for every occupied level of the
// ten-site chain, with the overlap's printed resolution.
struct ReferenceLevel {
  double energy;
  double overlap;
  double resolution;
};

const std::vector<ReferenceLevel> kOccupiedLevels = {
    {-18.1, 0.110, 1e-3},    {-16.4, 0.209, 1e-3},    {-11.9, 0.200, 1e-3},
    {-9.76, 0.0974, 1e-4},   {-8.38, 0.0320, 1e-4},   {-6.63, 0.0577, 1e-4},
    {-5.81, 0.0118, 1e-4},   {-5.52, 0.115, 1e-3},    {-4.26, 0.0171, 1e-4},
    {-3.95, 0.00401, 1e-5},  {-2.00, 0.0139, 1e-4},   {-0.802, 0.0338, 1e-4},
    {-0.704, 0.0331, 1e-4},  {2.00, 0.0357, 1e-4},    {2.42, 0.00235, 1e-5},
    {2.68, 0.00291, 1e-5},   {3.39, 0.00592, 1e-5},   {5.96, 0.00336, 1e-5},
    {7.33, 0.00650, 1e-5},   {8.13, 0.00393, 1e-5},   {8.24, 0.00105, 1e-5},
    {10.0, 0.00397, 1e-5},
};

// Peak-versus-weight comparison shared by the Heisenberg and Anderson
// scans. Every level with weight >= kMinPeakWeight needs a detected peak
// within `radius`; the peak height net of the scan background is compared
// with the summed weight of all levels within `radius` of the level, so
// unresolved neighbours count towards the same peak.
void check_peaks(Report& rep, const SpectralWeights& w, const ScanResult& scan, double radius,
                 const std::string& label) {
  const auto peaks = detect_peaks(scan);
  const auto levels = occupied_levels(w);
  rep.detail << "    " << label << ": " << peaks.peaks.size() << " peaks, background "
             << fmt(peaks.background_level, 3) << ", radius " << fmt(radius, 3) << "\n";
  int strong = 0;
  for (const auto& lv : levels) {
    if (lv.weight < kMinPeakWeight) continue;
    ++strong;
    const Peak* best = nullptr;
    for (const auto& p : peaks.peaks)
      if (!best || std::abs(p.location - lv.energy) < std::abs(best->location - lv.energy)) best = &p;
    const std::string head = label + " E=" + fmt(lv.energy, 5) + " w=" + fmt(lv.weight, 3);
    if (!best || std::abs(best->location - lv.energy) > radius) {
      rep.check(false, head + ": no peak within " + fmt(radius, 3));
      continue;
    }
    double cluster = 0.0;
    for (const auto& o : levels)
      if (std::abs(o.energy - lv.energy) <= radius) cluster += o.weight;
    const double net = best->height - peaks.background_level;
    const double rel = net / cluster - 1.0;
    rep.check(std::abs(rel) <= kPeakRelTol, head + ": peak " + fmt(best->location, 5) + " height " +
                                                fmt(best->height, 3) + " net " + fmt(net, 3) +
                                                " vs cluster " + fmt(cluster, 3) + " (rel " +
                                                fmt(rel, 2) + ")");
  }
  rep.check(strong > 0, label + ": " + std::to_string(strong) + " levels above " + fmt(kMinPeakWeight));
}

// ---------------------------------------------------------------------------

Report criterion1() {
  Report rep;
  const auto t0 = std::chrono::steady_clock::now();
  const auto eig = eigendecompose(build_heisenberg({10, 1.0, 3.0, true}));
  const auto w = weights_of(project_to_eigenbasis(build_product_state("0101010101"), eig), eig);
  const double elapsed = seconds_since(t0);
  const auto levels = occupied_levels(w);
  rep.check(levels.size() == kOccupiedLevels.size(),
            std::to_string(levels.size()) + " occupied levels, reference has " + std::to_string(kOccupiedLevels.size()));
  const std::size_t n = std::min(levels.size(), kOccupiedLevels.size());
  double worst_e = 0.0;
  int weight_misses = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double de = std::abs(levels[i].energy - kOccupiedLevels[i].energy);
    worst_e = std::max(worst_e, de);
    if (de > kLevelTol)
      rep.check(false, "level " + std::to_string(i) + ": " + fmt(levels[i].energy) + " vs " +
                           fmt(kOccupiedLevels[i].energy));
    if (std::abs(levels[i].weight - kOccupiedLevels[i].overlap) > kOccupiedLevels[i].resolution) {
      ++weight_misses;
      rep.check(false, "overlap of level " + fmt(levels[i].energy, 4) + ": " + fmt(levels[i].weight, 4) +
                           " vs " + fmt(kOccupiedLevels[i].overlap, 4));
    }
  }
  rep.check(worst_e <= kLevelTol, "largest level deviation " + fmt(worst_e, 3));
  rep.check(weight_misses == 0, "overlaps agree with the printed values to their last digit");
  rep.check(n > 0 && std::abs(levels[0].energy - (-18.1)) <= kLevelTol,
            "ground of the occupied sector " + fmt(n ? levels[0].energy : 0.0, 8));
  rep.check(elapsed < 60.0, "eigendecomposition " + fmt(elapsed, 3) + " s");
  return rep;
}

Report criterion2() {
  Report rep;
  const auto& h = heisenberg();
  const double p = h.weights.weights[static_cast<std::size_t>(h.target)];
  rep.check(std::abs(p - 0.110) <= kOverlapTol,
            "|<E0|0101010101>|^2 = " + fmt(p, 8) + " at E0 = " + fmt(h.eig.energies[h.target], 9));
  return rep;
}

Report criterion3() {
  Report rep;
  const auto t0 = std::chrono::steady_clock::now();
  const auto w = make_weights({1.0}, {1.0});  // E_obj - E = 1
  const int draws = 10000;
  std::map<double, double> slopes;
  for (double theta : {0.5, 3.0}) {
    const double t_rms = 2.0 * theta;
    std::vector<double> xs, ys;
    for (int n = 4; n <= 12; ++n) {
      double sum = 0.0;
      for (int k = 0; k < draws; ++k) {
        const auto sched = draw_schedule(n, t_rms, derive_seed(3, {static_cast<std::uint64_t>(n),
                                                                   static_cast<std::uint64_t>(k)}));
        sum += std::log(success_probability(w, 0.0, sched));
      }
      xs.push_back(n);
      ys.push_back(sum / draws);
    }
    const auto fit = oracle::fit_line(xs, ys);
    slopes[theta] = fit.slope;
    rep.detail << "    theta_rms " << theta << ": slope " << fmt(fit.slope, 5) << " (R^2 " << fmt(fit.r2, 4)
               << ")\n";
  }
  const double want = -std::log(4.0);
  rep.check(std::abs(slopes[3.0] / want - 1.0) <= kSlopeRelTol,
            "slope at theta 3.0 within 10% of -ln 4 = " + fmt(want, 5));
  rep.check(std::abs(slopes[0.5]) < std::abs(slopes[3.0]), "slope magnitude at theta 0.5 is smaller");
  const double elapsed = seconds_since(t0);
  rep.check(elapsed < 10.0, "runtime " + fmt(elapsed, 3) + " s");
  return rep;
}

Report criterion4() {
  Report rep;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int draws = 20000;
  int failures = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const int d = 1 + static_cast<int>(rng() % 8);
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<double> e(d), wt(d);
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
      e[j] = -3.0 + 6.0 * u(rng);
      wt[j] = u(rng) + 1e-3;
      total += wt[j];
    }
    for (auto& x : wt) x /= total;
    const auto w = make_weights(e, wt);
    const double filter = -3.0 + 6.0 * u(rng);
    const double t_rms = 0.2 + 3.0 * u(rng);
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double p = success_probability(w, filter, draw_schedule(n, t_rms, derive_seed(inst, {std::uint64_t(k)})));
      s += p;
      s2 += p * p;
    }
    const double mean = s / draws;
    const double sd = std::sqrt(std::max(0.0, s2 / draws - mean * mean) * draws / (draws - 1.0));
    const double se = sd / std::sqrt(double(draws));
    const double want = expected_success_probability(w, filter, n, t_rms);
    const double z = se > 0 ? std::abs(mean - want) / se : (mean == want ? 0.0 : HUGE_VAL);
    worst = std::max(worst, z);
    if (z > kMcSigmas) {
      ++failures;
      rep.detail << "    instance " << inst << ": mean " << fmt(mean) << " closed form " << fmt(want)
                 << " (" << fmt(z, 3) << " se)\n";
    }
  }
  rep.check(failures == 0, "50 instances, largest deviation " + fmt(worst, 3) + " standard errors");
  return rep;
}

Report criterion5() {
  Report rep;
  std::mt19937_64 rng(505);
  double worst_amp = 0.0, worst_p = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int d = 1 + static_cast<int>(rng() % 16);
    const HermitianOperator h(oracle::random_hermitian(d, rng, 1.5));
    const auto eig = eigendecompose(h);
    const ComplexVector psi = oracle::random_state(d, rng);
    RodeoConfig cfg;
    cfg.cycles = 1 + static_cast<int>(rng() % 4);
    cfg.t_rms = 0.5 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    // Half the instances filter at an eigenvalue, half at a random energy.
    cfg.filter_energy = inst % 2 ? eig.energies[rng() % d]
                                 : std::uniform_real_distribution<double>(-3, 3)(rng);
    const auto sched = draw_schedule(cfg.cycles, cfg.t_rms, rng());
    const auto circuit = full_statevector_reference(h, psi, cfg.filter_energy, sched);
    try {
      const auto engine = run_postselected(project_to_eigenbasis(psi, eig), eig, cfg, sched);
      worst_p = std::max(worst_p, std::abs(engine.joint_success - circuit.joint_success));
      worst_amp = std::max(worst_amp, (reconstruct(engine.state, eig) - circuit.state).norm());
    } catch (const UnderflowError&) {
      worst_p = std::max(worst_p, circuit.joint_success);
    }
  }
  rep.check(worst_p <= kCircuitTol, "largest joint probability difference " + fmt(worst_p, 3));
  rep.check(worst_amp <= kCircuitTol, "largest final-state difference " + fmt(worst_amp, 3));
  return rep;
}

Report criterion6() {
  Report rep;
  const auto t0 = std::chrono::steady_clock::now();
  const auto& h = heisenberg();
  ScanConfig c;
  c.e_min = -20.0;
  c.e_max = 12.0;
  c.points = 321;  // step 0.1
  c.cycles = 9;
  c.t_rms = 5.0;
  c.averages = 20;
  c.seed = 4;
  const auto scan = scan_spectral(h.weights, c);
  check_peaks(rep, h.weights, scan, c.spacing(), "heisenberg");

  // Off-peak: grid points more than 0.3 from every level of weight >= 0.03.
  double off_max = 0.0;
  const auto levels = occupied_levels(h.weights, kMinPeakWeight);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    bool near = false;
    for (const auto& lv : levels) near = near || std::abs(scan.energies[i] - lv.energy) <= 0.3;
    if (!near) off_max = std::max(off_max, scan.mean_success[i]);
  }
  rep.check(off_max < kBackgroundMax, "largest off-peak value " + fmt(off_max, 3));
  const double elapsed = seconds_since(t0);
  rep.check(elapsed < 300.0, "runtime " + fmt(elapsed, 3) + " s");
  return rep;
}

Report criterion7() {
  Report rep;
  const auto& h = heisenberg();
  const auto row = precondition_then_rodeo(h.psi, h.initial, h.object, h.eig, h.target, 5.0, 5.0,
                                           {0, 3, 6, 9}, 200, 7);
  const double p = row.initial_overlap;
  rep.check(std::abs(p - 0.83074) <= kOverlapTol, "overlap after t_AE = 5: " + fmt(p, 6) + " (want 0.83074)");
  for (const auto& cell : row.cells) {
    if (cell.cycles == 0) continue;
    const double lo = 1.0 - std::pow(estimate_fa(p, cell.cycles), 2);
    const double hi = 1.0 - std::pow(estimate_fg(p, cell.cycles), 2);
    rep.check(cell.mean >= lo && cell.mean <= hi,
              "N=" + std::to_string(cell.cycles) + ": mean overlap " + fmt(cell.mean, 6) + " (se " +
                  fmt(cell.stderr_value, 2) + ") in [" + fmt(lo, 6) + ", " + fmt(hi, 6) + "]");
  }
  return rep;
}

Report criterion8() {
  Report rep;
  const auto& h = heisenberg();
  const std::vector<double> budgets = {4, 8, 12, 16, 20, 24, 28, 32};
  CompareConfig c;
  c.t_rms = 1.0;
  c.seeds = 25;
  c.seed = 8;
  const auto rows = compare_methods(h.psi, h.initial, h.object, h.eig, h.target, budgets, c);
  std::map<Method, std::map<double, double>> by;
  for (const auto& r : rows) by[r.method][r.total_time] = r.log_delta;
  std::vector<double> xs, ys;
  for (const auto& [t, v] : by[Method::kRodeo]) {
    xs.push_back(t);
    ys.push_back(v);
  }
  rep.detail << "    T      rodeo    F_A      F_G      adiabatic qpe\n";
  for (double t : budgets)
    rep.detail << "    " << fmt(t, 3) << "\t" << fmt(by[Method::kRodeo][t], 4) << "\t" << fmt(by[Method::kEstimateFA][t], 4)
               << "\t" << fmt(by[Method::kEstimateFG][t], 4) << "\t" << fmt(by[Method::kAdiabatic][t], 4) << "\t"
               << fmt(by[Method::kQpe][t], 4) << "\n";
  const auto fit = oracle::fit_line(xs, ys);
  rep.check(fit.r2 >= kR2Min && fit.slope < 0,
            "rodeo log10 residual linear in T: slope " + fmt(fit.slope, 4) + ", R^2 " + fmt(fit.r2, 4));

  double small_gap = 0.0;
  for (double t : {budgets[0], budgets[1]})
    small_gap = std::max(small_gap, std::abs(by[Method::kRodeo][t] - by[Method::kEstimateFA][t]));
  rep.check(small_gap <= kTrackTol, "small T (<= 8): tracks log F_A within " + fmt(small_gap, 3));
  const double tmax = budgets.back();
  const double large_gap = std::abs(by[Method::kRodeo][tmax] - by[Method::kEstimateFG][tmax]);
  rep.check(large_gap <= kTrackTol, "large T (32): tracks log F_G within " + fmt(large_gap, 3));

  const double lr = by[Method::kRodeo][tmax];
  for (Method m : {Method::kQpe, Method::kAdiabatic})
    rep.check(lr < by[m][tmax] + std::log10(kBaselineRatio),
              "at T=32 rodeo residual below 0.1 x " + method_name(m) + " (" + fmt(std::pow(10.0, lr), 3) +
                  " vs " + fmt(std::pow(10.0, by[m][tmax]), 3) + ")");
  return rep;
}

Report criterion9() {
  Report rep;
  const auto& h = heisenberg();
  const double e0 = h.eig.energies[h.target];
  std::vector<int> scans;
  std::vector<double> times;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    SearchConfig c;
    c.epsilon = eps;
    c.points = 24;
    c.selection = PeakSelection::kLowest;
    c.seed = 9;
    try {
      const auto r = hierarchical_search(h.weights, h.eig.energies.front() - 1.0, h.eig.energies.back() + 1.0, c);
      scans.push_back(static_cast<int>(r.history.size()));
      times.push_back(r.total_evolution_time);
      rep.check(std::abs(r.estimate - e0) <= eps,
                "eps " + fmt(eps) + ": estimate " + fmt(r.estimate, 9) + " (error " + fmt(std::abs(r.estimate - e0), 2) +
                    "), " + std::to_string(r.history.size()) + " scans, total time " + fmt(r.total_evolution_time, 4));
    } catch (const SearchFailedError& e) {
      rep.check(false, "eps " + fmt(eps) + ": " + e.what());
    }
  }
  if (scans.size() == 3) {
    for (std::size_t i = 1; i < 3; ++i) {
      const int step = scans[i] - scans[i - 1];
      rep.check(step >= 1 && step <= 3, "scan count grows by " + std::to_string(step) + " per decade");
      const double ratio = times[i] / times[i - 1];
      rep.check(ratio >= 10.0 / kTimeRatioSlack && ratio <= 10.0 * kTimeRatioSlack,
                "total time ratio per decade " + fmt(ratio, 3));
    }
  }
  return rep;
}

Report criterion10() {
  Report rep;
  for (int L : {2, 4, 7, 100}) {
    const auto eig = eigendecompose(build_anderson({L, ExplicitDisorder{std::vector<double>(L, 0.0)}}));
    std::vector<double> want;
    for (int m = 0; m < L; ++m) want.push_back(-2.0 * std::cos(2.0 * std::numbers::pi * m / L));
    if (L == 2) want = {-1.0, 1.0};  // a two-site ring has a single bond
    std::sort(want.begin(), want.end());
    double worst = 0.0;
    for (int i = 0; i < L; ++i) worst = std::max(worst, std::abs(eig.energies[i] - want[i]));
    rep.check(worst <= kCleanBandTol, "clean band L=" + std::to_string(L) + ": largest deviation " + fmt(worst, 2));
  }

  struct Run {
    double rms, t_rms, e_lo, e_hi;
  };
  for (const Run run : {Run{0.5, 10.0, -4.0, 4.0}, Run{0.125, 10.0, -3.0, 3.0}, Run{0.125, 20.0, -3.0, 3.0}}) {
    const AndersonParams p{100, GaussianDisorder{run.rms, 1}};
    const auto eig = eigendecompose(build_anderson(p));
    const auto w = weights_of(project_to_eigenbasis(build_site_state(100, find_kmin(p)), eig), eig);
    ScanConfig c;
    c.e_min = run.e_lo;
    c.e_max = run.e_hi;
    c.points = static_cast<int>(std::lround((run.e_hi - run.e_lo) * run.t_rms * 10.0)) + 1;  // step 0.1 / t_rms
    c.cycles = 9;
    c.t_rms = run.t_rms;
    c.averages = 20;
    c.seed = 10;
    const auto scan = scan_spectral(w, c);
    const double width = std::sqrt(2.0) / (run.t_rms * std::sqrt(double(c.cycles)));
    check_peaks(rep, w, scan, width, "rms " + fmt(run.rms) + " t_rms " + fmt(run.t_rms));
  }
  return rep;
}

Report criterion11() {
  Report rep;
  std::mt19937_64 rng(1111);
  double worst_p = 0.0, worst_state = 0.0;
  int cases = 0;
  for (int d = 1; d <= 8; ++d) {
    for (int t = 1; t <= 6; ++t) {
      const ComplexMatrix m = oracle::random_hermitian(d, rng);
      const auto eig = eigendecompose(HermitianOperator(m));
      const ComplexVector psi = oracle::random_state(d, rng);
      const auto s = project_to_eigenbasis(psi, eig);
      const auto cfg = default_qpe_config(eig, t);
      const auto p = qpe_outcome_probabilities(s, eig, cfg);
      const auto ref = oracle::qpe_circuit(m, psi, t, cfg.window_min, cfg.base_time());
      for (std::size_t k = 0; k < p.size(); ++k) {
        worst_p = std::max(worst_p, std::abs(p[k] - ref.outcome_probability[k]));
        if (ref.outcome_probability[k] < 1e-8) continue;
        const auto post = qpe_filter(s, eig, cfg, k);
        const Complex ov = reconstruct(post.posterior, eig).dot(ref.conditional_state[k]);
        worst_state = std::max(worst_state, 1.0 - std::abs(ov));
      }
      ++cases;
    }
  }
  rep.check(worst_p <= kCircuitTol, std::to_string(cases) + " cases, largest outcome probability difference " +
                                        fmt(worst_p, 3));
  rep.check(worst_state <= kCircuitTol, "largest conditional-state infidelity " + fmt(worst_state, 3));
  return rep;
}

int run_cli_binary(const std::vector<std::string>& args) {
  std::string cmd = std::string(RODEO_CLI_PATH);
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Report criterion12() {
  Report rep;
  const fs::path dir = fs::temp_directory_path() / ("rodeo_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> commands = {
      {"spectrum-exact", "--init", "0101010101"},
      {"scan", "--points", "161", "--averages", "10"},
      {"peaks", "--emin", "-20", "--emax", "12", "--points", "321"},
      {"search", "--epsilon", "0.01", "--points", "24", "--select", "lowest"},
      {"prepare", "--filter-energy", "-18.06", "--cycles", "9", "--recenter"},
      {"adiabatic", "--total-time", "5"},
      {"qpe", "--phase-bits", "8"},
      {"compare", "--total-time", "4,16", "--seeds", "9"},
      {"precondition", "--t-ae", "0,5", "--seeds", "20"},
      {"scan", "--model", "anderson", "--disorder-rms", "0.5", "--disorder-seed", "1", "--emin", "-4", "--emax",
       "4", "--points", "201", "--trms", "10"},
  };
  int index = 0;
  for (const auto& base : commands) {
    const std::string tag = std::to_string(index++) + "_" + base[0];
    std::string data[2];
    bool ran = true;
    int slot = 0;
    for (const char* threads : {"1", "8"}) {
      auto args = base;
      const auto out = (dir / (tag + "_t" + threads + ".csv")).string();
      args.insert(args.end(), {"--seed", "12", "--threads", threads, "--out", out});
      const int code = run_cli_binary(args);
      if (code != 0) {
        rep.check(false, tag + " --threads " + threads + " exited " + std::to_string(code));
        ran = false;
        break;
      }
      data[slot++] = read_file(out);
    }
    if (!ran) continue;
    rep.check(data[0] == data[1], tag + ": --threads 1 and 8 byte-identical (" + std::to_string(data[0].size()) +
                                      " bytes)");
    const auto manifest = (dir / (tag + "_t1.csv.manifest.json")).string();
    rep.check(run_cli_binary({"verify", "--manifest", manifest, "--rerun", "--threads", "8"}) == 0,
              tag + ": manifest rerun reproduces the data");
  }
  fs::remove_all(dir);
  return rep;
}

const std::vector<std::pair<std::string, std::function<Report()>>> kCriteria = {
    {"Heisenberg occupied spectrum", criterion1},
    {"initial overlap 0.110", criterion2},
    {"asymptotic -N ln 4 suppression", criterion3},
    {"Monte Carlo vs closed-form success probability", criterion4},
    {"engine vs explicit ancilla circuit", criterion5},
    {"Heisenberg spectral function scan", criterion6},
    {"adiabatic preconditioning", criterion7},
    {"residual versus total time", criterion8},
    {"hierarchical search scaling", criterion9},
    {"Anderson spectrum and spectral function", criterion10},
    {"phase estimation vs gate-level circuit", criterion11},
    {"CLI determinism", criterion12},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) which.push_back(i);

  bool all = true;
  for (int n : which) {
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::cerr << "no criterion " << n << "\n";
      return 2;
    }
    const auto& [name, fn] = kCriteria[n - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    try {
      rep = fn();
    } catch (const std::exception& e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (rep.pass ? "PASS" : "FAIL") << "  " << name << "  ("
              << fmt(seconds_since(t0), 3) << " s)\n"
              << rep.detail.str() << std::flush;
    all = all && rep.pass;
  }
  return all ? 0 : 1;
}
