#include "rodeo/rodeo_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "rodeo/errors.hpp"

namespace rodeo {

namespace {

void check_rms(double t_rms) {
  if (!(t_rms > 0.0) || !std::isfinite(t_rms)) throw ValidationError("t_rms must be positive");
}

double branch_probability(const SpectralState& state, const EigenDecomposition& eig,
                          double filter_energy, double t, int bit) {
  double p = 0.0;
  for (Index j = 0; j < state.dim(); ++j) {
    const auto f = cycle_factors(eig.energies[j], filter_energy, t);
    p += state.weight(j) * std::norm(bit == 1 ? f.success : f.failure);
  }
  return p;
}

// Applies the success factor for every cycle to the amplitudes, unnormalized.
ComplexVector filtered_amplitudes(const SpectralState& state, const EigenDecomposition& eig,
                                  double filter_energy, const std::vector<double>& times) {
  ComplexVector a = state.amplitudes();
  for (Index j = 0; j < a.size(); ++j) {
    if (a(j) == Complex(0.0)) continue;
    Complex factor = 1.0;
    for (double t : times) factor *= cycle_factors(eig.energies[j], filter_energy, t).success;
    a(j) *= factor;
  }
  return a;
}

}  // namespace

double CycleSchedule::total_time(TimeAccounting accounting) const {
  if (accounting == TimeAccounting::kNTimesTrms) return static_cast<double>(times.size()) * t_rms;
  double total = 0.0;
  for (double t : times) total += std::abs(t);
  return total;
}

CycleSchedule draw_schedule(int cycles, double t_rms, std::uint64_t seed) {
  if (cycles < 1) throw ValidationError("cycle count must be at least 1");
  check_rms(t_rms);
  Rng rng = make_rng(derive_seed(seed, {0x7363686564756c65ULL}));
  std::normal_distribution<double> normal(0.0, 1.0);
  CycleSchedule s;
  s.t_rms = t_rms;
  s.seed = seed;
  s.times.resize(static_cast<std::size_t>(cycles));
  for (double& t : s.times) t = t_rms * normal(rng);
  return s;
}

CycleFactors cycle_factors(double level_energy, double filter_energy, double t) {
  const Complex rotor = std::polar(1.0, -(level_energy - filter_energy) * t);
  return {0.5 * (1.0 + rotor), 0.5 * (1.0 - rotor)};
}

double success_probability(const SpectralWeights& weights, double filter_energy,
                           const CycleSchedule& schedule) {
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights.weights[j];
    if (w == 0.0) continue;
    const double detuning = weights.energies[j] - filter_energy;
    double p = w;
    for (double t : schedule.times) {
      const double c = std::cos(0.5 * detuning * t);
      p *= c * c;
    }
    total += p;
  }
  return std::clamp(total, 0.0, 1.0);
}

double expected_success_probability(const SpectralWeights& weights, double filter_energy,
                                    int cycles, double t_rms) {
  if (cycles < 0) throw ValidationError("cycle count must be non-negative");
  check_rms(t_rms);
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights.weights[j];
    if (w == 0.0) continue;
    const double x = (weights.energies[j] - filter_energy) * t_rms;
    const double per_cycle = 0.5 * (1.0 + std::exp(-0.5 * x * x));
    total += w * std::pow(per_cycle, cycles);
  }
  return std::clamp(total, 0.0, 1.0);
}

CycleStep apply_cycle(const SpectralState& state, const EigenDecomposition& eig,
                      double filter_energy, double t, std::optional<int> forced, Rng& rng) {
  if (state.dim() != eig.dim()) throw DimensionError("apply_cycle: dimension mismatch");
  if (forced && *forced != 0 && *forced != 1) throw ValidationError("forced bit must be 0 or 1");
  const double p_success = std::clamp(branch_probability(state, eig, filter_energy, t, 1), 0.0, 1.0);

  int bit;
  if (forced) {
    bit = *forced;
  } else {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    bit = uniform(rng) < p_success ? 1 : 0;
  }
  const double p = bit == 1 ? p_success
                            : std::clamp(branch_probability(state, eig, filter_energy, t, 0), 0.0, 1.0);
  if (!(p > 0.0)) {
    std::ostringstream msg;
    msg << "measurement branch " << bit << " has zero probability";
    throw DegenerateBranchError(msg.str());
  }

  ComplexVector a = state.amplitudes();
  for (Index j = 0; j < a.size(); ++j) {
    const auto f = cycle_factors(eig.energies[j], filter_energy, t);
    a(j) *= bit == 1 ? f.success : f.failure;
  }
  a /= a.norm();
  const double survival = bit == 1 ? state.survival_probability() * p : state.survival_probability();
  return {SpectralState(std::move(a), survival), {bit, p}};
}

PostselectedRun run_postselected(const SpectralState& state, const EigenDecomposition& eig,
                                 const RodeoConfig& config, const CycleSchedule& schedule) {
  if (state.dim() != eig.dim()) throw DimensionError("run_postselected: dimension mismatch");
  if (schedule.cycles() != config.cycles) {
    std::ostringstream msg;
    msg << "schedule has " << schedule.cycles() << " times but config asks for " << config.cycles
        << " cycles";
    throw ValidationError(msg.str());
  }
  ComplexVector a = filtered_amplitudes(state, eig, config.filter_energy, schedule.times);
  const double joint = a.squaredNorm();
  if (!(joint >= kUnderflowFloor)) {
    std::ostringstream msg;
    msg << "joint success probability " << joint << " underflows after " << config.cycles
        << " cycles; use fewer cycles";
    throw UnderflowError(msg.str());
  }
  a /= std::sqrt(joint);
  return {SpectralState(std::move(a), state.survival_probability() * std::min(joint, 1.0)),
          std::min(joint, 1.0)};
}

bool SampledRun::all_success() const {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const CycleOutcome& o) { return o.bit == 1; });
}

SampledRun run_sampled(const SpectralState& state, const EigenDecomposition& eig,
                       const RodeoConfig& config, Rng& rng) {
  SampledRun run;
  run.schedule = draw_schedule(config.cycles, config.t_rms, config.seed);
  run.state = state;
  run.outcomes.reserve(run.schedule.times.size());
  for (double t : run.schedule.times) {
    auto step = apply_cycle(run.state, eig, config.filter_energy, t, std::nullopt, rng);
    run.state = std::move(step.state);
    run.outcomes.push_back(step.outcome);
  }
  return run;
}

ResidualReport residual(const SpectralState& state, Index target) {
  if (target < 0 || target >= state.dim()) {
    std::ostringstream msg;
    msg << "target index " << target << " out of range for dimension " << state.dim();
    throw DimensionError(msg.str());
  }
  double rest = 0.0;
  for (Index k = 0; k < state.dim(); ++k)
    if (k != target) rest += state.weight(k);
  const double norm2 = rest + state.weight(target);
  ResidualReport r;
  r.target = target;
  r.overlap = state.weight(target) / norm2;
  r.delta = std::sqrt(rest / norm2);
  return r;
}

namespace {

double residual_estimate(double p, double cycles, double suppression) {
  if (!(p > 0.0) || p > 1.0) throw DomainError("overlap p must lie in (0, 1]");
  if (!(cycles >= 0.0)) throw DomainError("cycle count must be non-negative");
  const double leak = std::pow(suppression, cycles) * (1.0 - p);
  return std::sqrt(leak / (p + leak));
}

}  // namespace

double estimate_fa(double p, double cycles) { return residual_estimate(p, cycles, 0.5); }
double estimate_fg(double p, double cycles) { return residual_estimate(p, cycles, 0.25); }

PreparedState prepare_eigenstate(const SpectralState& state, const EigenDecomposition& eig,
                                 double start_energy, const RodeoConfig& config,
                                 std::uint64_t schedule_seed) {
  if (state.dim() != eig.dim()) throw DimensionError("prepare_eigenstate: dimension mismatch");
  if (!std::isfinite(start_energy)) throw ValidationError("start energy must be finite");
  constexpr double kOccupied = 1e-6;
  const double radius = config.isolation_radius > 0.0 ? config.isolation_radius : 1.0 / config.t_rms;

  // Target: nearest occupied eigenvector; among degenerate partners the one
  // carrying the most weight.
  Index target = -1;
  for (Index j = 0; j < state.dim(); ++j) {
    if (state.weight(j) <= kOccupied) continue;
    if (target < 0) {
      target = j;
      continue;
    }
    const double dj = std::abs(eig.energies[j] - start_energy);
    const double dt = std::abs(eig.energies[target] - start_energy);
    if (dj < dt - 1e-12 || (std::abs(dj - dt) <= 1e-12 && state.weight(j) > state.weight(target)))
      target = j;
  }
  if (target < 0) throw AmbiguousTargetError("state has no occupied eigenvector");
  const double target_energy = eig.energies[target];

  std::vector<Index> competitors;
  for (Index j = 0; j < state.dim(); ++j) {
    if (j == target || state.weight(j) <= kOccupied) continue;
    const double e = eig.energies[j];
    if (std::abs(e - target_energy) <= kDegeneracyTolerance * std::max(1.0, std::abs(target_energy)))
      continue;
    if (std::abs(e - start_energy) < radius) competitors.push_back(j);
  }
  if (!competitors.empty()) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "target near " << start_energy << " is not isolated within " << radius
        << "; competing eigenvalues:";
    for (Index j : competitors) msg << ' ' << eig.energies[j] << " (weight " << state.weight(j) << ")";
    throw AmbiguousTargetError(msg.str());
  }

  PreparedState out;
  out.schedule = draw_schedule(config.cycles, config.t_rms, schedule_seed);
  SpectralState current = state;
  double filter = start_energy;
  std::vector<ResidualTracePoint> trace;
  trace.push_back({0, residual(current, target).delta, filter, current.survival_probability()});

  for (int n = 1; n <= config.cycles; ++n) {
    const double t = out.schedule.times[static_cast<std::size_t>(n - 1)];
    ComplexVector a = current.amplitudes();
    for (Index j = 0; j < a.size(); ++j) a(j) *= cycle_factors(eig.energies[j], filter, t).success;
    const double p = a.squaredNorm();
    const double survival = current.survival_probability() * p;
    if (!(survival >= kUnderflowFloor)) {
      std::ostringstream msg;
      msg << "joint success probability underflows at cycle " << n << "; use fewer cycles";
      throw UnderflowError(msg.str());
    }
    a /= std::sqrt(p);
    current = SpectralState(std::move(a), survival);
    trace.push_back({n, residual(current, target).delta, filter, survival});

    if (config.recenter) {
      const auto w = weights_of(current, eig);
      const double step = 1.0 / (config.t_rms * std::sqrt(static_cast<double>(n)));
      const double below = expected_success_probability(w, filter - step, n, config.t_rms);
      const double mid = expected_success_probability(w, filter, n, config.t_rms);
      const double above = expected_success_probability(w, filter + step, n, config.t_rms);
      const double curvature = above - 2.0 * mid + below;
      if (curvature < 0.0) {
        const double shift = -0.5 * step * (above - below) / curvature;
        filter += std::clamp(shift, -step, step);
      }
    }
  }
  out.state = current;
  out.report = residual(current, target);
  out.report.trace = std::move(trace);
  return out;
}

CircuitRun full_statevector_reference(const HermitianOperator& h, const ComplexVector& psi,
                                      double filter_energy, const CycleSchedule& schedule) {
  const Index d = h.dim();
  if (d > kMaxReferenceDimension) {
    std::ostringstream msg;
    msg << "reference simulator supports dimension <= " << kMaxReferenceDimension << ", got " << d;
    throw DimensionError(msg.str());
  }
  if (psi.size() != d) throw DimensionError("reference simulator: state dimension mismatch");

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CircuitRun run;
  run.state = psi.normalized();
  // Joint register: ancilla is the most significant qubit, [|0>(x)obj ; |1>(x)obj].
  ComplexVector joint(2 * d);
  for (double t : schedule.times) {
    joint.head(d).setZero();
    joint.tail(d) = run.state;  // ancilla reset to |1>

    auto hadamard = [&] {
      const ComplexVector zero = joint.head(d);
      const ComplexVector one = joint.tail(d);
      joint.head(d) = (zero + one) * inv_sqrt2;
      joint.tail(d) = (zero - one) * inv_sqrt2;
    };
    hadamard();
    const ComplexMatrix evolution = (ComplexMatrix(h.matrix()) * Complex(0.0, -t)).exp();
    joint.tail(d) = evolution * joint.tail(d);
    joint.tail(d) *= std::polar(1.0, filter_energy * t);
    hadamard();

    const double p = joint.tail(d).squaredNorm();
    if (!(p > 0.0)) throw DegenerateBranchError("reference simulator: success branch vanished");
    run.joint_success *= p;
    run.state = joint.tail(d) / std::sqrt(p);
  }
  return run;
}

}  // namespace rodeo
