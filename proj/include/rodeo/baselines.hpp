#pragma once

// Reference methods for eigenstate preparation: adiabatic evolution along
// H(t) = cos^2[pi t / (2T)] H_I + sin^2[pi t / (2T)] H_obj, and quantum phase
// estimation modelled exactly in the eigenbasis.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rodeo/parallel.hpp"
#include "rodeo/random.hpp"
#include "rodeo/rodeo_engine.hpp"
#include "rodeo/spectral_core.hpp"

namespace rodeo {

struct AdiabaticConfig {
  double total_time = 1.0;
  int steps = 16;  // starting step count; doubled until converged
  double convergence_tol = 1e-6;
  int max_doublings = 20;
};

struct AdiabaticResult {
  ComplexVector state;
  int steps = 0;
  double last_change = 0.0;
};

// Midpoint rule: each step applies exp(-i H(t_mid) dt) exactly (Chebyshev
// expansion converged to machine precision). With a target the step count is
// doubled until |<target|psi>|^2 moves by less than the tolerance; without
// one, until the phase-aligned final states differ by less than it.
AdiabaticResult adiabatic_evolve(const ComplexVector& psi, const HermitianOperator& initial,
                                 const HermitianOperator& object, const AdiabaticConfig& cfg,
                                 const std::optional<ComplexVector>& target = std::nullopt);

// Single pass with a fixed number of midpoint steps.
ComplexVector adiabatic_evolve_fixed(const ComplexVector& psi, const HermitianOperator& initial,
                                     const HermitianOperator& object, double total_time, int steps);

struct QpeConfig {
  int phase_bits = 4;
  double window_min = 0.0;
  double window_max = 1.0;

  void validate() const;
  // Evolution time of one controlled-U; U = exp(i (H - window_min) base_time)
  // maps the window onto phases [0, 2 pi).
  double base_time() const;
  double total_time() const;
  double phase_of(double energy) const;
};

// Window [min E_j - 1, max E_j + 1] over the whole decomposition.
QpeConfig default_qpe_config(const EigenDecomposition& eig, int phase_bits);

// (1 / 2^t) sum_{k < 2^t} exp(i k x).
Complex qpe_kernel(double x, int phase_bits);

// Exact outcome distribution, length 2^t. Practical for t <= 20.
std::vector<double> qpe_outcome_probabilities(const SpectralState& state,
                                              const EigenDecomposition& eig, const QpeConfig& cfg);

struct QpeResult {
  SpectralState posterior;
  std::uint64_t outcome = 0;
  double probability = 0.0;
  double total_time = 0.0;
};

// Conditions the state on register outcome m (sampled from rng when absent).
QpeResult qpe_filter(const SpectralState& state, const EigenDecomposition& eig,
                     const QpeConfig& cfg, std::optional<std::uint64_t> outcome, Rng* rng = nullptr);

// Outcome whose phase grid point is nearest the energy.
std::uint64_t qpe_nearest_outcome(const QpeConfig& cfg, double energy);

enum class Method {
  kRodeo,
  kQpe,
  kAdiabatic,
  kEstimateFA,
  kEstimateFG,
};

std::string method_name(Method m);

struct ComparisonRow {
  Method method = Method::kRodeo;
  double total_time = 0.0;
  double log_delta = 0.0;  // log10 of the residual
  std::uint64_t seed = 0;
  std::string params;
};

struct CompareConfig {
  double t_rms = 1.0;
  int seeds = 25;
  std::uint64_t seed = 0;
  TimeAccounting accounting = TimeAccounting::kSumAbs;
  // Zero bits/window: use default_qpe_config; base_time follows the window.
  std::optional<QpeConfig> qpe;
  double adiabatic_tol = 1e-6;
};

// For every budget: rodeo at E = E_target with the largest cycle count whose
// evolution time fits (median log10 residual over seeds), adiabatic evolution
// for the whole budget, phase estimation with the most bits that fit
// (conditioned on the outcome nearest the target), and F_A / F_G at the
// rodeo's median cycle count.
std::vector<ComparisonRow> compare_methods(const ComplexVector& psi,
                                           const HermitianOperator& initial,
                                           const HermitianOperator& object,
                                           const EigenDecomposition& eig, Index target,
                                           const std::vector<double>& budgets,
                                           const CompareConfig& cfg, const Parallelism& par = {});

struct OverlapCell {
  int cycles = 0;
  double mean = 0.0;
  double stderr_value = 0.0;
};

struct PreconditionRow {
  double t_ae = 0.0;
  double initial_overlap = 0.0;  // after adiabatic evolution, before cycles
  std::vector<OverlapCell> cells;
};

// Adiabatic evolution for t_ae, then post-selected cycles at E = E_target;
// the overlap after each requested cycle count is averaged over `seeds`
// schedules.
PreconditionRow precondition_then_rodeo(const ComplexVector& psi, const HermitianOperator& initial,
                                        const HermitianOperator& object,
                                        const EigenDecomposition& eig, Index target, double t_ae,
                                        double t_rms, const std::vector<int>& cycle_counts,
                                        int seeds, std::uint64_t seed,
                                        const Parallelism& par = {});

}  // namespace rodeo
