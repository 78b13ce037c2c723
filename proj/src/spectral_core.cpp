#include "rodeo/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rodeo/errors.hpp"

namespace rodeo {

namespace {

constexpr double kNormTolerance = 1e-10;

Index find_root(std::vector<Index>& parent, Index i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

// Multiplies v by a unit phase so its largest-magnitude entry is real positive.
void fix_phase(Eigen::Ref<ComplexVector> v) {
  double largest = 0.0;
  for (Index i = 0; i < v.size(); ++i) largest = std::max(largest, std::abs(v(i)));
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag >= largest - 1e-12) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(mag, 0.0);
      return;
    }
  }
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix entries, double tolerance) {
  if (entries.rows() < 1 || entries.rows() != entries.cols()) {
    std::ostringstream msg;
    msg << "Hermitian operator must be square and non-empty, got " << entries.rows() << "x"
        << entries.cols();
    throw DimensionError(msg.str());
  }
  if (entries.rows() > kMaxDimension) {
    std::ostringstream msg;
    msg << "dimension " << entries.rows() << " exceeds the supported maximum " << kMaxDimension;
    throw DimensionError(msg.str());
  }
  const Index d = entries.rows();
  double worst = 0.0;
  Index worst_row = 0;
  Index worst_col = 0;
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r <= c; ++r) {
      const Complex a = entries(r, c);
      const Complex b = entries(c, r);
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real()) ||
          !std::isfinite(b.imag())) {
        std::ostringstream msg;
        msg << "non-finite entry at (" << r << "," << c << ")";
        throw ValidationError(msg.str());
      }
      const double gap = std::abs(a - std::conj(b));
      if (gap > worst) {
        worst = gap;
        worst_row = r;
        worst_col = c;
      }
    }
  }
  if (worst > tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "matrix is not Hermitian: entries (" << worst_row << "," << worst_col << ") and ("
        << worst_col << "," << worst_row << ") differ from conjugate symmetry by " << worst;
    throw ValidationError(msg.str());
  }
  entries_ = (entries + entries.adjoint()) * 0.5;
}

double HermitianOperator::max_abs() const { return entries_.cwiseAbs().maxCoeff(); }

bool HermitianOperator::is_real() const {
  return (entries_.imag().array() == 0.0).all();
}

std::vector<std::vector<Index>> coupled_blocks(const std::vector<const ComplexMatrix*>& operators) {
  if (operators.empty()) return {};
  const Index d = operators.front()->rows();
  std::vector<Index> parent(static_cast<std::size_t>(d));
  std::iota(parent.begin(), parent.end(), Index{0});
  for (const ComplexMatrix* op : operators) {
    if (op->rows() != d || op->cols() != d) throw DimensionError("coupled_blocks: size mismatch");
    for (Index c = 0; c < d; ++c) {
      for (Index r = 0; r < c; ++r) {
        if ((*op)(r, c) == Complex(0.0) && (*op)(c, r) == Complex(0.0)) continue;
        const Index a = find_root(parent, r);
        const Index b = find_root(parent, c);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<Index>> blocks;
  std::vector<Index> block_of(static_cast<std::size_t>(d), -1);
  for (Index i = 0; i < d; ++i) {
    const Index root = find_root(parent, i);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[block_of[root]].push_back(i);
  }
  return blocks;
}

EigenDecomposition eigendecompose(const HermitianOperator& h) {
  const Index d = h.dim();
  const ComplexMatrix& m = h.matrix();
  const bool real = h.is_real();

  struct Pair {
    double energy;
    Index block;
    Index column;
  };
  std::vector<Pair> order;
  order.reserve(static_cast<std::size_t>(d));
  std::vector<ComplexMatrix> block_vectors;
  const auto blocks = coupled_blocks({&m});

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = blocks[b];
    const Index n = static_cast<Index>(idx.size());
    ComplexMatrix sub(n, n);
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < n; ++r) sub(r, c) = m(idx[r], idx[c]);

    Eigen::VectorXd values;
    ComplexMatrix vectors;
    if (real) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub.real());
      if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver failed to converge");
      values = solver.eigenvalues();
      vectors = solver.eigenvectors().cast<Complex>();
    } else {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sub);
      if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver failed to converge");
      values = solver.eigenvalues();
      vectors = solver.eigenvectors();
    }
    for (Index k = 0; k < n; ++k) order.push_back({values(k), static_cast<Index>(b), k});
    block_vectors.push_back(std::move(vectors));
  }

  std::stable_sort(order.begin(), order.end(),
                   [](const Pair& a, const Pair& b) { return a.energy < b.energy; });

  EigenDecomposition eig;
  eig.energies.reserve(static_cast<std::size_t>(d));
  eig.vectors = ComplexMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    const Pair& p = order[static_cast<std::size_t>(j)];
    const auto& idx = blocks[static_cast<std::size_t>(p.block)];
    const ComplexMatrix& vecs = block_vectors[static_cast<std::size_t>(p.block)];
    for (std::size_t r = 0; r < idx.size(); ++r)
      eig.vectors(idx[r], j) = vecs(static_cast<Index>(r), p.column);
    fix_phase(eig.vectors.col(j));
    eig.energies.push_back(p.energy);
  }
  return eig;
}

SpectralState::SpectralState(ComplexVector amplitudes, double survival_probability)
    : amplitudes_(std::move(amplitudes)), survival_(survival_probability) {
  if (!(survival_ >= 0.0 && survival_ <= 1.0 + 1e-12))
    throw ValidationError("survival probability must lie in [0, 1]");
  survival_ = std::min(survival_, 1.0);
  const double norm2 = amplitudes_.squaredNorm();
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "spectral state is not normalized: squared norm " << norm2;
    throw ValidationError(msg.str());
  }
}

double SpectralWeights::total() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

SpectralState project_to_eigenbasis(const ComplexVector& psi, const EigenDecomposition& eig) {
  if (psi.size() != eig.dim()) {
    std::ostringstream msg;
    msg << "state dimension " << psi.size() << " does not match operator dimension " << eig.dim();
    throw DimensionError(msg.str());
  }
  const double norm2 = psi.squaredNorm();
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "input state is not normalized: squared norm " << norm2;
    throw ValidationError(msg.str());
  }
  return SpectralState(eig.vectors.adjoint() * psi, 1.0);
}

ComplexVector reconstruct(const SpectralState& state, const EigenDecomposition& eig) {
  if (state.dim() != eig.dim()) throw DimensionError("reconstruct: dimension mismatch");
  return eig.vectors * state.amplitudes();
}

SpectralState evolve_phase(const SpectralState& state, const EigenDecomposition& eig, double t) {
  if (!std::isfinite(t)) throw ValidationError("evolution time must be finite");
  if (state.dim() != static_cast<Index>(eig.energies.size()))
    throw DimensionError("evolve_phase: dimension mismatch");
  ComplexVector a = state.amplitudes();
  for (Index j = 0; j < a.size(); ++j) a(j) *= std::polar(1.0, -eig.energies[j] * t);
  return SpectralState(std::move(a), state.survival_probability());
}

std::vector<SpectralLevel> merge_levels(const std::vector<double>& energies,
                                        const std::vector<double>& weights) {
  std::vector<SpectralLevel> levels;
  for (std::size_t j = 0; j < energies.size(); ++j) {
    const double e = energies[j];
    if (!levels.empty()) {
      // Compare against the first member so a chain of near-ties cannot drift.
      const double anchor = energies[static_cast<std::size_t>(levels.back().members.front())];
      if (std::abs(e - anchor) <= kDegeneracyTolerance * std::max(1.0, std::abs(anchor))) {
        auto& level = levels.back();
        level.weight += weights[j];
        level.members.push_back(static_cast<Index>(j));
        continue;
      }
    }
    levels.push_back({e, weights[j], {static_cast<Index>(j)}});
  }
  return levels;
}

SpectralWeights weights_of(const SpectralState& state, const EigenDecomposition& eig) {
  if (state.dim() != static_cast<Index>(eig.energies.size()))
    throw DimensionError("weights_of: dimension mismatch");
  SpectralWeights w;
  w.energies = eig.energies;
  w.weights.resize(eig.energies.size());
  for (Index j = 0; j < state.dim(); ++j) w.weights[j] = state.weight(j);
  w.levels = merge_levels(w.energies, w.weights);
  return w;
}

SpectralWeights make_weights(std::vector<double> energies, std::vector<double> weights) {
  if (energies.size() != weights.size() || energies.empty())
    throw DimensionError("make_weights: energies and weights must be non-empty and equal length");
  std::vector<std::size_t> order(energies.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
  SpectralWeights w;
  double total = 0.0;
  for (std::size_t i : order) {
    if (!std::isfinite(energies[i]) || !(weights[i] >= 0.0))
      throw ValidationError("make_weights: energies must be finite and weights non-negative");
    w.energies.push_back(energies[i]);
    w.weights.push_back(weights[i]);
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "make_weights: weights sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
  w.levels = merge_levels(w.energies, w.weights);
  return w;
}

}  // namespace rodeo
