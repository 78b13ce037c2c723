#include "rodeo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>

#include "rodeo/errors.hpp"

namespace rodeo {

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

constexpr double kPi = std::numbers::pi;

// Restriction of both Hamiltonians to the coupled blocks the state touches.
struct ActiveSpace {
  std::vector<Index> indices;
  SparseMatrix initial;
  SparseMatrix object;
};

SparseMatrix restrict_sparse(const ComplexMatrix& m, const std::vector<Index>& idx) {
  const Index n = static_cast<Index>(idx.size());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) {
      const Complex v = m(idx[r], idx[c]);
      if (v != Complex(0.0)) triplets.emplace_back(r, c, v);
    }
  SparseMatrix s(n, n);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

ActiveSpace active_space(const ComplexVector& psi, const HermitianOperator& initial,
                         const HermitianOperator& object) {
  ActiveSpace space;
  for (const auto& block : coupled_blocks({&initial.matrix(), &object.matrix()})) {
    const bool touched = std::any_of(block.begin(), block.end(),
                                     [&](Index i) { return psi(i) != Complex(0.0); });
    if (touched) space.indices.insert(space.indices.end(), block.begin(), block.end());
  }
  std::sort(space.indices.begin(), space.indices.end());
  space.initial = restrict_sparse(initial.matrix(), space.indices);
  space.object = restrict_sparse(object.matrix(), space.indices);
  return space;
}

// Gershgorin enclosure of the spectrum of a Hermitian sparse matrix.
std::pair<double, double> spectral_bounds(const SparseMatrix& h) {
  const Index n = h.rows();
  std::vector<double> centre(static_cast<std::size_t>(n), 0.0);
  std::vector<double> radius(static_cast<std::size_t>(n), 0.0);
  for (Index c = 0; c < h.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(h, c); it; ++it) {
      if (it.row() == it.col())
        centre[it.row()] += it.value().real();
      else
        radius[it.row()] += std::abs(it.value());
    }
  double lo = 0.0;
  double hi = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double a = centre[i] - radius[i];
    const double b = centre[i] + radius[i];
    if (i == 0 || a < lo) lo = a;
    if (i == 0 || b > hi) hi = b;
  }
  return {lo, hi};
}

// exp(-i h dt) v by Chebyshev expansion on the Gershgorin interval.
ComplexVector chebyshev_propagate(const SparseMatrix& h, const ComplexVector& v, double dt) {
  const auto [lo, hi] = spectral_bounds(h);
  const double centre = 0.5 * (hi + lo);
  const double half = std::max(0.5 * (hi - lo), 1e-12);
  const double z = half * dt;

  auto scaled = [&](const ComplexVector& x) -> ComplexVector {
    return (h * x - centre * x) / half;
  };

  ComplexVector previous = v;
  ComplexVector current = scaled(v);
  ComplexVector sum = std::cyl_bessel_j(0.0, z) * v;
  Complex minus_i_power(0.0, -1.0);
  sum += 2.0 * minus_i_power * std::cyl_bessel_j(1.0, z) * current;
  const int min_terms = static_cast<int>(std::ceil(z)) + 2;
  for (int k = 2;; ++k) {
    ComplexVector next = 2.0 * scaled(current) - previous;
    minus_i_power *= Complex(0.0, -1.0);
    const double coefficient = 2.0 * std::cyl_bessel_j(static_cast<double>(k), z);
    sum += coefficient * minus_i_power * next;
    previous = std::move(current);
    current = std::move(next);
    if (k >= min_terms && std::abs(coefficient) < 1e-17) break;
    if (k > 100000) throw ConvergenceError("Chebyshev propagator failed to converge");
  }
  return sum * std::polar(1.0, -centre * dt);
}

ComplexVector evolve_active(const ActiveSpace& space, const ComplexVector& start, double total_time,
                            int steps) {
  ComplexVector v = start;
  const double dt = total_time / steps;
  for (int k = 0; k < steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    const double s = std::pow(std::sin(kPi * t_mid / (2.0 * total_time)), 2);
    const SparseMatrix h = (1.0 - s) * space.initial + s * space.object;
    v = chebyshev_propagate(h, v, dt);
  }
  return v;
}

ComplexVector gather(const ComplexVector& full, const std::vector<Index>& idx) {
  ComplexVector v(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) v(static_cast<Index>(i)) = full(idx[i]);
  return v;
}

ComplexVector scatter(const ComplexVector& part, const std::vector<Index>& idx, Index dim) {
  ComplexVector v = ComplexVector::Zero(dim);
  for (std::size_t i = 0; i < idx.size(); ++i) v(idx[i]) = part(static_cast<Index>(i));
  return v;
}

void check_adiabatic_inputs(const ComplexVector& psi, const HermitianOperator& initial,
                            const HermitianOperator& object) {
  if (initial.dim() != object.dim() || psi.size() != object.dim())
    throw DimensionError("adiabatic evolution: dimension mismatch");
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-10)
    throw ValidationError("adiabatic evolution: input state is not normalized");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ComplexVector adiabatic_evolve_fixed(const ComplexVector& psi, const HermitianOperator& initial,
                                     const HermitianOperator& object, double total_time,
                                     int steps) {
  check_adiabatic_inputs(psi, initial, object);
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw ValidationError("adiabatic total time must be positive");
  if (steps < 1) throw ValidationError("adiabatic step count must be positive");
  const auto space = active_space(psi, initial, object);
  const ComplexVector out = evolve_active(space, gather(psi, space.indices), total_time, steps);
  return scatter(out, space.indices, psi.size());
}

AdiabaticResult adiabatic_evolve(const ComplexVector& psi, const HermitianOperator& initial,
                                 const HermitianOperator& object, const AdiabaticConfig& cfg,
                                 const std::optional<ComplexVector>& target) {
  check_adiabatic_inputs(psi, initial, object);
  if (!(cfg.total_time > 0.0) || !std::isfinite(cfg.total_time))
    throw ValidationError("adiabatic total time must be positive");
  if (cfg.steps < 2) throw ValidationError("adiabatic step count must be at least 2");
  if (!(cfg.convergence_tol > 0.0)) throw ValidationError("convergence tolerance must be positive");
  if (target && target->size() != psi.size())
    throw DimensionError("adiabatic evolution: target dimension mismatch");

  const auto space = active_space(psi, initial, object);
  const ComplexVector start = gather(psi, space.indices);
  const std::optional<ComplexVector> local_target =
      target ? std::optional<ComplexVector>(gather(*target, space.indices)) : std::nullopt;

  auto change = [&](const ComplexVector& coarse, const ComplexVector& fine) {
    if (local_target) {
      return std::abs(std::norm(local_target->dot(fine)) - std::norm(local_target->dot(coarse)));
    }
    const Complex phase = coarse.dot(fine);
    const Complex align = std::abs(phase) > 0.0 ? phase / std::abs(phase) : Complex(1.0);
    return (fine - align * coarse).norm();
  };

  int steps = cfg.steps;
  ComplexVector coarse = evolve_active(space, start, cfg.total_time, steps);
  for (int doubling = 0; doubling < cfg.max_doublings; ++doubling) {
    steps *= 2;
    ComplexVector fine = evolve_active(space, start, cfg.total_time, steps);
    const double delta = change(coarse, fine);
    if (delta < cfg.convergence_tol)
      return {scatter(fine, space.indices, psi.size()), steps, delta};
    coarse = std::move(fine);
  }
  std::ostringstream msg;
  msg << "adiabatic evolution did not converge to " << cfg.convergence_tol << " after "
      << cfg.max_doublings << " step doublings";
  throw ConvergenceError(msg.str());
}

void QpeConfig::validate() const {
  if (phase_bits < 0 || phase_bits > 24) throw ValidationError("phase bits must lie in [0, 24]");
  if (!std::isfinite(window_min) || !std::isfinite(window_max) || !(window_min < window_max))
    throw ValidationError("phase estimation window must be non-empty");
}

double QpeConfig::base_time() const { return 2.0 * kPi / (window_max - window_min); }

double QpeConfig::total_time() const {
  return (std::ldexp(1.0, phase_bits) - 1.0) * base_time();
}

double QpeConfig::phase_of(double energy) const {
  return 2.0 * kPi * (energy - window_min) / (window_max - window_min);
}

QpeConfig default_qpe_config(const EigenDecomposition& eig, int phase_bits) {
  QpeConfig cfg;
  cfg.phase_bits = phase_bits;
  cfg.window_min = eig.energies.front() - 1.0;
  cfg.window_max = eig.energies.back() + 1.0;
  return cfg;
}

Complex qpe_kernel(double x, int phase_bits) {
  const double n = std::ldexp(1.0, phase_bits);
  double r = std::remainder(x, 2.0 * kPi);  // in [-pi, pi]
  const double half = 0.5 * r;
  const double s = std::sin(half);
  if (std::abs(s) < 1e-300) return 1.0;
  const double magnitude = std::sin(n * half) / (n * s);
  return std::polar(magnitude, (n - 1.0) * half);
}

namespace {

void check_window(const SpectralState& state, const EigenDecomposition& eig, const QpeConfig& cfg) {
  cfg.validate();
  if (state.dim() != eig.dim()) throw DimensionError("phase estimation: dimension mismatch");
  for (Index j = 0; j < state.dim(); ++j) {
    if (state.weight(j) == 0.0) continue;
    const double e = eig.energies[j];
    if (e < cfg.window_min || e >= cfg.window_max) {
      std::ostringstream msg;
      msg.precision(10);
      msg << "occupied level " << e << " lies outside the phase window [" << cfg.window_min << ", "
          << cfg.window_max << ")";
      throw ValidationError(msg.str());
    }
  }
}

double outcome_phase(std::uint64_t m, int bits) {
  return 2.0 * kPi * static_cast<double>(m) / std::ldexp(1.0, bits);
}

}  // namespace

std::vector<double> qpe_outcome_probabilities(const SpectralState& state,
                                              const EigenDecomposition& eig, const QpeConfig& cfg) {
  check_window(state, eig, cfg);
  const std::uint64_t outcomes = std::uint64_t{1} << cfg.phase_bits;
  std::vector<double> p(outcomes, 0.0);
  for (Index j = 0; j < state.dim(); ++j) {
    const double w = state.weight(j);
    if (w == 0.0) continue;
    const double phase = cfg.phase_of(eig.energies[j]);
    for (std::uint64_t m = 0; m < outcomes; ++m)
      p[m] += w * std::norm(qpe_kernel(phase - outcome_phase(m, cfg.phase_bits), cfg.phase_bits));
  }
  return p;
}

std::uint64_t qpe_nearest_outcome(const QpeConfig& cfg, double energy) {
  const double outcomes = std::ldexp(1.0, cfg.phase_bits);
  const double m = std::round(cfg.phase_of(energy) / (2.0 * kPi) * outcomes);
  return static_cast<std::uint64_t>(std::fmod(m, outcomes));
}

QpeResult qpe_filter(const SpectralState& state, const EigenDecomposition& eig,
                     const QpeConfig& cfg, std::optional<std::uint64_t> outcome, Rng* rng) {
  check_window(state, eig, cfg);
  const std::uint64_t outcomes = std::uint64_t{1} << cfg.phase_bits;
  std::uint64_t m = 0;
  if (outcome) {
    if (*outcome >= outcomes) throw ValidationError("phase estimation outcome out of range");
    m = *outcome;
  } else {
    if (rng == nullptr) throw ValidationError("phase estimation sampling needs a random engine");
    // Components are orthogonal, so P(m) = sum_j w_j |K_j(m)|^2: draw j, then m.
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double u = uniform(*rng) * state.amplitudes().squaredNorm();
    Index j = 0;
    for (; j < state.dim() - 1; ++j) {
      u -= state.weight(j);
      if (u < 0.0) break;
    }
    while (state.weight(j) == 0.0 && j > 0) --j;
    const double phase = cfg.phase_of(eig.energies[j]);
    double v = uniform(*rng);
    for (m = 0; m < outcomes - 1; ++m) {
      v -= std::norm(qpe_kernel(phase - outcome_phase(m, cfg.phase_bits), cfg.phase_bits));
      if (v < 0.0) break;
    }
  }

  ComplexVector a = state.amplitudes();
  for (Index j = 0; j < a.size(); ++j) {
    if (a(j) == Complex(0.0)) continue;
    a(j) *= qpe_kernel(cfg.phase_of(eig.energies[j]) - outcome_phase(m, cfg.phase_bits),
                       cfg.phase_bits);
  }
  const double probability = a.squaredNorm();
  if (!(probability > 0.0)) throw DegenerateBranchError("phase estimation outcome has zero probability");
  a /= std::sqrt(probability);
  QpeResult r;
  r.posterior = SpectralState(std::move(a), state.survival_probability() * probability);
  r.outcome = m;
  r.probability = probability;
  r.total_time = cfg.total_time();
  return r;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kRodeo: return "rodeo";
    case Method::kQpe: return "qpe";
    case Method::kAdiabatic: return "adiabatic";
    case Method::kEstimateFA: return "F_A";
    case Method::kEstimateFG: return "F_G";
  }
  return "unknown";
}

std::vector<ComparisonRow> compare_methods(const ComplexVector& psi,
                                           const HermitianOperator& initial,
                                           const HermitianOperator& object,
                                           const EigenDecomposition& eig, Index target,
                                           const std::vector<double>& budgets,
                                           const CompareConfig& cfg, const Parallelism& par) {
  if (target < 0 || target >= eig.dim()) throw DimensionError("compare: target index out of range");
  if (cfg.seeds < 1) throw ValidationError("compare: at least one seed is required");
  if (!(cfg.t_rms > 0.0)) throw ValidationError("compare: t_rms must be positive");
  const SpectralState start = project_to_eigenbasis(psi, eig);
  const double p = start.weight(target);
  if (!(p > 0.0)) throw DomainError("compare: initial state has no overlap with the target");
  const double target_energy = eig.energies[target];
  const double untouched = std::log10(residual(start, target).delta);
  QpeConfig qpe_base = cfg.qpe ? *cfg.qpe : default_qpe_config(eig, 0);
  RodeoConfig rodeo;
  rodeo.t_rms = cfg.t_rms;
  rodeo.filter_energy = target_energy;

  std::vector<ComparisonRow> rows;
  for (double budget : budgets) {
    if (!(budget > 0.0) || !std::isfinite(budget))
      throw ValidationError("compare: time budgets must be positive");

    struct SeedOutcome {
      double log_delta;
      double cycles;
    };
    const auto per_seed = parallel_map<SeedOutcome>(
        static_cast<std::size_t>(cfg.seeds), par, [&](std::size_t i) -> SeedOutcome {
          const std::uint64_t seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)});
          int n = 0;
          CycleSchedule schedule;
          if (cfg.accounting == TimeAccounting::kNTimesTrms) {
            n = static_cast<int>(std::floor(budget / cfg.t_rms + 1e-12));
            if (n > 0) schedule = draw_schedule(n, cfg.t_rms, seed);
          } else {
            const int cap = static_cast<int>(std::ceil(4.0 * budget / cfg.t_rms)) + 16;
            const auto full = draw_schedule(cap, cfg.t_rms, seed);
            double used = 0.0;
            for (double t : full.times) {
              if (used + std::abs(t) > budget) break;
              used += std::abs(t);
              ++n;
            }
            schedule = full;
            schedule.times.resize(static_cast<std::size_t>(n));
          }
          if (n == 0) return {untouched, 0.0};
          RodeoConfig c = rodeo;
          c.cycles = n;
          const auto run = run_postselected(start, eig, c, schedule);
          return {std::log10(residual(run.state, target).delta), static_cast<double>(n)};
        });
    std::vector<double> logs;
    std::vector<double> cycles;
    for (const auto& s : per_seed) {
      logs.push_back(s.log_delta);
      cycles.push_back(s.cycles);
    }
    const double median_cycles = median(cycles);
    {
      std::ostringstream params;
      params << "t_rms=" << cfg.t_rms << ";seeds=" << cfg.seeds << ";median_cycles=" << median_cycles;
      rows.push_back({Method::kRodeo, budget, median(logs), cfg.seed, params.str()});
    }

    {
      AdiabaticConfig ac;
      ac.total_time = budget;
      ac.convergence_tol = cfg.adiabatic_tol;
      const ComplexVector target_vector = eig.vector(target);
      const auto evolved = adiabatic_evolve(psi, initial, object, ac, target_vector);
      // Orthogonal remainder, not sqrt(1 - overlap), to avoid cancellation.
      const ComplexVector rest = evolved.state - target_vector * target_vector.dot(evolved.state);
      std::ostringstream params;
      params << "steps=" << evolved.steps;
      rows.push_back({Method::kAdiabatic, budget, std::log10(rest.norm()), cfg.seed, params.str()});
    }

    {
      QpeConfig qc = qpe_base;
      qc.phase_bits = 0;
      while (qc.phase_bits < 24) {
        QpeConfig next = qc;
        ++next.phase_bits;
        if (next.total_time() > budget) break;
        qc = next;
      }
      double log_delta = untouched;
      if (qc.phase_bits > 0) {
        const auto r = qpe_filter(start, eig, qc, qpe_nearest_outcome(qc, target_energy));
        log_delta = std::log10(residual(r.posterior, target).delta);
      }
      std::ostringstream params;
      params << "bits=" << qc.phase_bits << ";base_time=" << qc.base_time();
      rows.push_back({Method::kQpe, budget, log_delta, cfg.seed, params.str()});
    }

    std::ostringstream params;
    params << "cycles=" << median_cycles;
    rows.push_back({Method::kEstimateFA, budget, std::log10(estimate_fa(p, median_cycles)), cfg.seed,
                    params.str()});
    rows.push_back({Method::kEstimateFG, budget, std::log10(estimate_fg(p, median_cycles)), cfg.seed,
                    params.str()});
  }
  return rows;
}

PreconditionRow precondition_then_rodeo(const ComplexVector& psi, const HermitianOperator& initial,
                                        const HermitianOperator& object,
                                        const EigenDecomposition& eig, Index target, double t_ae,
                                        double t_rms, const std::vector<int>& cycle_counts,
                                        int seeds, std::uint64_t seed, const Parallelism& par) {
  if (target < 0 || target >= eig.dim()) throw DimensionError("precondition: target out of range");
  if (!(t_ae >= 0.0) || !std::isfinite(t_ae)) throw ValidationError("t_AE must be non-negative");
  if (seeds < 1) throw ValidationError("precondition: at least one seed is required");
  ComplexVector prepared = psi;
  if (t_ae > 0.0) {
    AdiabaticConfig ac;
    ac.total_time = t_ae;
    ac.convergence_tol = 1e-7;
    prepared = adiabatic_evolve(psi, initial, object, ac, eig.vector(target)).state;
    prepared.normalize();
  }
  const SpectralState start = project_to_eigenbasis(prepared, eig);

  PreconditionRow row;
  row.t_ae = t_ae;
  row.initial_overlap = start.weight(target);
  RodeoConfig rc;
  rc.t_rms = t_rms;
  rc.filter_energy = eig.energies[target];

  for (std::size_t c = 0; c < cycle_counts.size(); ++c) {
    const int n = cycle_counts[c];
    if (n < 0) throw ValidationError("precondition: cycle counts must be non-negative");
    OverlapCell cell;
    cell.cycles = n;
    if (n == 0) {
      cell.mean = row.initial_overlap;
      row.cells.push_back(cell);
      continue;
    }
    const auto overlaps = parallel_map<double>(
        static_cast<std::size_t>(seeds), par, [&](std::size_t i) {
          RodeoConfig local = rc;
          local.cycles = n;
          const auto schedule =
              draw_schedule(n, t_rms, derive_seed(seed, {static_cast<std::uint64_t>(i)}));
          return residual(run_postselected(start, eig, local, schedule).state, target).overlap;
        });
    double sum = 0.0;
    double sum2 = 0.0;
    for (double o : overlaps) {
      sum += o;
      sum2 += o * o;
    }
    const double m = static_cast<double>(seeds);
    cell.mean = sum / m;
    if (seeds > 1)
      cell.stderr_value = std::sqrt(std::max(0.0, (sum2 - m * cell.mean * cell.mean) / (m - 1.0)) / m);
    row.cells.push_back(cell);
  }
  return row;
}

}  // namespace rodeo
