#include "rodeo/scan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rodeo/errors.hpp"
#include "rodeo/random.hpp"

namespace rodeo {

namespace {

struct PointStats {
  double mean = 0.0;
  double stderr_value = 0.0;
  double time = 0.0;
};

// Mean and standard error of success_probability over `averages` schedules.
PointStats average_success(const SpectralWeights& weights, double energy, int cycles, double t_rms,
                           int averages, std::uint64_t point_seed, TimeAccounting accounting) {
  double sum = 0.0;
  double sum2 = 0.0;
  PointStats s;
  for (int m = 0; m < averages; ++m) {
    const auto schedule =
        draw_schedule(cycles, t_rms, derive_seed(point_seed, {static_cast<std::uint64_t>(m)}));
    const double p = success_probability(weights, energy, schedule);
    sum += p;
    sum2 += p * p;
    s.time += schedule.total_time(accounting);
  }
  const double n = static_cast<double>(averages);
  s.mean = sum / n;
  if (averages > 1) {
    const double var = std::max(0.0, (sum2 - n * s.mean * s.mean) / (n - 1.0));
    s.stderr_value = std::sqrt(var / n);
  }
  return s;
}

}  // namespace

void ScanConfig::validate() const {
  if (!std::isfinite(e_min) || !std::isfinite(e_max) || !(e_min < e_max))
    throw ValidationError("scan requires finite e_min < e_max");
  if (points < 2) throw ValidationError("scan requires at least 2 grid points");
  if (cycles < 1) throw ValidationError("scan requires at least 1 cycle");
  if (!(t_rms > 0.0) || !std::isfinite(t_rms)) throw ValidationError("scan requires t_rms > 0");
  if (averages < 1) throw ValidationError("scan requires at least 1 average");
}

double ScanConfig::energy(int i) const {
  if (i == points - 1) return e_max;
  return e_min + (e_max - e_min) * static_cast<double>(i) / static_cast<double>(points - 1);
}

ScanResult scan_spectral(const SpectralWeights& weights, const ScanConfig& cfg,
                         const Parallelism& par) {
  cfg.validate();
  const auto stats = parallel_map<PointStats>(
      static_cast<std::size_t>(cfg.points), par, [&](std::size_t i) {
        return average_success(weights, cfg.energy(static_cast<int>(i)), cfg.cycles, cfg.t_rms,
                               cfg.averages, derive_seed(cfg.seed, {i}), cfg.accounting);
      });
  ScanResult r;
  r.config = cfg;
  r.energies.reserve(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    r.energies.push_back(cfg.energy(static_cast<int>(i)));
    r.mean_success.push_back(stats[i].mean);
    r.stderr_success.push_back(stats[i].stderr_value);
    r.total_evolution_time += stats[i].time;
  }
  return r;
}

PeakList detect_peaks(const ScanResult& result, double z_threshold) {
  PeakList list;
  const auto& m = result.mean_success;
  const std::size_t n = m.size();
  if (n == 0) return list;
  std::vector<double> sorted = m;
  std::sort(sorted.begin(), sorted.end());
  list.background_level =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(m[i] > m[i - 1] && m[i] > m[i + 1])) continue;
    if (!(m[i] > list.background_level + z_threshold * result.stderr_success[i])) continue;
    const double h = result.energies[i + 1] - result.energies[i];
    const double curvature = m[i - 1] - 2.0 * m[i] + m[i + 1];
    const double offset = 0.5 * (m[i - 1] - m[i + 1]) / curvature;  // in grid steps, |.| < 1/2
    Peak p;
    p.index = i;
    p.location = result.energies[i] + offset * h;
    p.height = m[i] - 0.25 * (m[i - 1] - m[i + 1]) * offset;
    list.peaks.push_back(p);
  }
  return list;
}

OverlapEstimate estimate_overlap(const SpectralWeights& weights, double peak_energy, int cycles,
                                 double t_rms, int averages, std::uint64_t seed) {
  if (cycles < 1 || averages < 1 || !(t_rms > 0.0))
    throw ValidationError("estimate_overlap requires cycles >= 1, averages >= 1, t_rms > 0");
  const auto s = average_success(weights, peak_energy, cycles, t_rms, averages,
                                 derive_seed(seed, {0x6f7665726c6170ULL}), TimeAccounting::kSumAbs);
  OverlapEstimate est;
  est.value = s.mean;
  est.stderr_value = s.stderr_value;
  const double reach = 1.0 / (2.0 * t_rms * std::sqrt(static_cast<double>(cycles)));
  est.near_level = std::any_of(weights.levels.begin(), weights.levels.end(), [&](const auto& lv) {
    return lv.weight > 0.0 && std::abs(lv.energy - peak_energy) <= reach;
  });
  return est;
}

void SearchConfig::validate() const {
  if (!(shrink > 1.0) || !std::isfinite(shrink)) throw ValidationError("shrink factor must exceed 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be positive");
  if (cycles < 1) throw ValidationError("search requires at least 1 cycle per scan");
  if (points < 3) throw ValidationError("search requires at least 3 points per scan");
  if (initial_t_rms < 0.0 || !std::isfinite(initial_t_rms))
    throw ValidationError("initial t_rms must be non-negative");
  if (max_scans < 1) throw ValidationError("max_scans must be at least 1");
  if (averages < 1) throw ValidationError("search requires at least 1 average");
  if (!(min_weight > 0.0) || min_weight > 1.0) throw ValidationError("min_weight must lie in (0, 1]");
}

int planned_scan_count(double width, double epsilon, double shrink) {
  if (width <= epsilon) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(width / epsilon) / std::log(shrink) - 1e-12)));
}

SearchResult hierarchical_search(const SpectralWeights& weights, double e_min, double e_max,
                                 const SearchConfig& cfg, const Parallelism& par) {
  cfg.validate();
  if (!(e_min < e_max)) throw ValidationError("search requires e_min < e_max");
  const bool has_target =
      std::any_of(weights.levels.begin(), weights.levels.end(), [&](const SpectralLevel& lv) {
        return lv.weight >= cfg.min_weight && lv.energy >= e_min && lv.energy <= e_max;
      });
  if (!has_target) {
    std::ostringstream msg;
    msg << "no level with weight >= " << cfg.min_weight << " inside [" << e_min << ", " << e_max
        << "]";
    throw SearchFailedError(msg.str());
  }

  const double width0 = e_max - e_min;
  const int scans = planned_scan_count(width0, cfg.epsilon, cfg.shrink);
  if (scans > cfg.max_scans) {
    std::ostringstream msg;
    msg << "search needs " << scans << " scans but max_scans is " << cfg.max_scans;
    throw SearchFailedError(msg.str());
  }
  // Uniform factor that lands the final window exactly on epsilon.
  const double factor = width0 > cfg.epsilon ? std::pow(width0 / cfg.epsilon, 1.0 / scans) : cfg.shrink;

  SearchResult result;
  result.shrink_used = factor;
  double lo = e_min;
  double hi = e_max;
  double t_rms = cfg.initial_t_rms > 0.0
                     ? cfg.initial_t_rms
                     : 2.0 * (cfg.points - 1) / (std::sqrt(static_cast<double>(cfg.cycles)) * width0);

  for (int s = 0; s < scans; ++s) {
    ScanConfig sc;
    sc.e_min = lo;
    sc.e_max = hi;
    sc.points = cfg.points;
    sc.cycles = cfg.cycles;
    sc.t_rms = t_rms;
    sc.averages = cfg.averages;
    sc.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(s)});
    sc.accounting = cfg.accounting;
    ScanResult scan = scan_spectral(weights, sc, par);
    result.total_evolution_time += scan.total_evolution_time;

    const auto found = detect_peaks(scan, cfg.z_threshold);
    std::vector<Peak> candidates;
    for (const Peak& p : found.peaks)
      if (p.height - found.background_level >= 0.5 * cfg.min_weight) candidates.push_back(p);
    if (candidates.empty()) {
      result.history.push_back({std::move(scan), Peak{}});
      std::ostringstream msg;
      msg.precision(10);
      msg << "no significant peak in scan " << s + 1 << " over [" << lo << ", " << hi
          << "] at t_rms " << t_rms << " (history of " << result.history.size() << " scans)";
      throw SearchFailedError(msg.str());
    }
    const Peak chosen =
        cfg.selection == PeakSelection::kLowest
            ? *std::min_element(candidates.begin(), candidates.end(),
                                [](const Peak& a, const Peak& b) { return a.location < b.location; })
            : *std::max_element(candidates.begin(), candidates.end(),
                                [](const Peak& a, const Peak& b) { return a.height < b.height; });
    result.history.push_back({std::move(scan), chosen});
    result.estimate = chosen.location;

    const double width = (hi - lo) / factor;
    lo = chosen.location - 0.5 * width;
    hi = chosen.location + 0.5 * width;
    t_rms *= factor;
  }
  return result;
}

}  // namespace rodeo
