#pragma once

// Energy scans of the schedule-averaged success probability, peak picking,
// and the hierarchical window-shrinking eigenvalue search.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rodeo/parallel.hpp"
#include "rodeo/rodeo_engine.hpp"
#include "rodeo/spectral_core.hpp"

namespace rodeo {

struct ScanConfig {
  double e_min = -1.0;
  double e_max = 1.0;
  int points = 16;
  int cycles = 9;
  double t_rms = 5.0;
  int averages = 20;
  std::uint64_t seed = 0;
  TimeAccounting accounting = TimeAccounting::kSumAbs;

  void validate() const;
  double spacing() const { return (e_max - e_min) / (points - 1); }
  double energy(int i) const;
};

struct ScanResult {
  std::vector<double> energies;
  std::vector<double> mean_success;
  std::vector<double> stderr_success;
  ScanConfig config;
  // Evolution time summed over every schedule drawn for the scan.
  double total_evolution_time = 0.0;

  std::size_t size() const noexcept { return energies.size(); }
};

// Each grid point averages success_probability over `averages` schedules
// whose seeds derive from (seed, grid index, draw index).
ScanResult scan_spectral(const SpectralWeights& weights, const ScanConfig& cfg,
                         const Parallelism& par = {});

struct Peak {
  double location = 0.0;
  double height = 0.0;
  std::size_t index = 0;
};

struct PeakList {
  std::vector<Peak> peaks;
  double background_level = 0.0;
};

// Strict interior local maxima above median + z * stderr, located by a
// three-point parabola through the maximum and its neighbours.
PeakList detect_peaks(const ScanResult& result, double z_threshold = 5.0);

struct OverlapEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
  // False when no occupied level lies within 1 / (2 t_rms sqrt(N)) of the
  // requested energy, so the value need not approximate any single weight.
  bool near_level = true;
};

OverlapEstimate estimate_overlap(const SpectralWeights& weights, double peak_energy, int cycles,
                                 double t_rms, int averages, std::uint64_t seed);

enum class PeakSelection {
  kStrongest,
  kLowest,
};

struct SearchConfig {
  // Upper bound on the per-scan window shrink factor.
  double shrink = 4.0;
  double epsilon = 1e-3;
  int cycles = 8;
  int points = 16;
  // Zero picks sqrt(2) / (sqrt(N) * initial grid spacing) so the filter
  // width matches the first grid.
  double initial_t_rms = 0.0;
  int max_scans = 64;
  int averages = 20;
  double min_weight = 0.01;
  double z_threshold = 5.0;
  PeakSelection selection = PeakSelection::kStrongest;
  std::uint64_t seed = 0;
  TimeAccounting accounting = TimeAccounting::kSumAbs;

  void validate() const;
};

struct SearchStep {
  ScanResult scan;
  Peak chosen;
};

struct SearchResult {
  double estimate = 0.0;
  std::vector<SearchStep> history;
  double total_evolution_time = 0.0;
  // Factor actually applied to the window (and t_rms) between scans.
  double shrink_used = 0.0;
};

// Number of scans needed to bring a window of the given width below epsilon.
int planned_scan_count(double width, double epsilon, double shrink);

SearchResult hierarchical_search(const SpectralWeights& weights, double e_min, double e_max,
                                 const SearchConfig& cfg, const Parallelism& par = {});

}  // namespace rodeo
