#pragma once

// Rodeo cycles in the eigenbasis of the object Hamiltonian.
//
// One cycle prepares an ancilla in |1>, applies a Hadamard, evolves the
// object system for time t controlled on the ancilla, applies the phase
// exp(i E t) to ancilla |1>, a second Hadamard, and measures. Measuring |1>
// ("success") multiplies eigencomponent j by (1 + exp(-i (E_j - E) t)) / 2,
// measuring |0> by (1 - exp(-i (E_j - E) t)) / 2.

#include <cstdint>
#include <optional>
#include <vector>

#include "rodeo/random.hpp"
#include "rodeo/spectral_core.hpp"

namespace rodeo {

// How the evolution time spent by a run of cycles is counted.
enum class TimeAccounting {
  kSumAbs,      // sum_n |t_n|
  kNTimesTrms,  // N * t_rms
};

// Random evolution times t_n ~ Normal(0, t_rms), reproducible from the seed.
struct CycleSchedule {
  std::vector<double> times;
  double t_rms = 1.0;
  std::uint64_t seed = 0;

  int cycles() const noexcept { return static_cast<int>(times.size()); }
  double total_time(TimeAccounting accounting = TimeAccounting::kSumAbs) const;
};

CycleSchedule draw_schedule(int cycles, double t_rms, std::uint64_t seed);

struct RodeoConfig {
  int cycles = 1;
  double t_rms = 1.0;
  double filter_energy = 0.0;
  std::uint64_t seed = 0;
  bool recenter = false;
  // Eigenstate preparation refuses to start when another occupied level lies
  // closer than this to the starting energy. Zero selects 1 / t_rms.
  double isolation_radius = 0.0;
  TimeAccounting accounting = TimeAccounting::kSumAbs;
};

struct CycleFactors {
  Complex success;
  Complex failure;
};

CycleFactors cycle_factors(double level_energy, double filter_energy, double t);

// sum_j w_j prod_n cos^2[(E_j - E) t_n / 2].
double success_probability(const SpectralWeights& weights, double filter_energy,
                           const CycleSchedule& schedule);

// Schedule average of success_probability over Gaussian times:
// sum_j w_j [(1 + exp(-(E_j - E)^2 t_rms^2 / 2)) / 2]^N.
double expected_success_probability(const SpectralWeights& weights, double filter_energy,
                                    int cycles, double t_rms);

struct CycleOutcome {
  int bit = 1;               // 1 = ancilla measured |1> (success)
  double probability = 1.0;  // probability of the branch that was taken
};

struct CycleStep {
  SpectralState state;
  CycleOutcome outcome;
};

// Applies one cycle; the branch is `forced` when given, otherwise sampled.
// The survival probability accumulates the probability of success branches.
CycleStep apply_cycle(const SpectralState& state, const EigenDecomposition& eig,
                      double filter_energy, double t, std::optional<int> forced, Rng& rng);

struct PostselectedRun {
  SpectralState state;
  double joint_success = 1.0;
};

// Keeps only the all-success branch. config.filter_energy is used throughout.
PostselectedRun run_postselected(const SpectralState& state, const EigenDecomposition& eig,
                                 const RodeoConfig& config, const CycleSchedule& schedule);

struct SampledRun {
  std::vector<CycleOutcome> outcomes;
  CycleSchedule schedule;
  SpectralState state;

  bool all_success() const;
};

// Draws times from config.seed and measurement outcomes from rng.
SampledRun run_sampled(const SpectralState& state, const EigenDecomposition& eig,
                       const RodeoConfig& config, Rng& rng);

struct ResidualTracePoint {
  int cycle = 0;
  double delta = 0.0;
  double filter_energy = 0.0;
  double survival_probability = 1.0;
};

struct ResidualReport {
  Index target = 0;
  double delta = 0.0;    // norm of the component orthogonal to the target
  double overlap = 0.0;  // |a_target|^2
  std::vector<ResidualTracePoint> trace;
};

ResidualReport residual(const SpectralState& state, Index target);

// Residual estimates from arithmetic-mean (1/2 per cycle) and geometric-mean
// (1/4 per cycle) suppression of the unwanted weight 1 - p.
double estimate_fa(double p, double cycles);
double estimate_fg(double p, double cycles);

struct PreparedState {
  SpectralState state;
  ResidualReport report;
  CycleSchedule schedule;
};

// Post-selected cycles aimed at the level nearest `start_energy`. With
// config.recenter the filter energy is moved after every cycle to the vertex
// of a parabola through the schedule-averaged success probability of the
// current state at E - dE, E, E + dE, dE = 1 / (t_rms sqrt(cycle)).
PreparedState prepare_eigenstate(const SpectralState& state, const EigenDecomposition& eig,
                                 double start_energy, const RodeoConfig& config,
                                 std::uint64_t schedule_seed);

struct CircuitRun {
  ComplexVector state;
  double joint_success = 1.0;
};

// Explicit ancilla (x) object statevector simulation of post-selected
// cycles, one ancilla reused per cycle. Independent of the eigenbasis path:
// the controlled evolution is a dense matrix exponential.
CircuitRun full_statevector_reference(const HermitianOperator& h, const ComplexVector& psi,
                                      double filter_energy, const CycleSchedule& schedule);

inline constexpr Index kMaxReferenceDimension = 64;
inline constexpr double kUnderflowFloor = 1e-300;

}  // namespace rodeo
