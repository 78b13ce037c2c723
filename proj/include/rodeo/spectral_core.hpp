#pragma once

// Dense Hermitian linear algebra shared by every module: eigendecomposition,
// eigenbasis projection, phase evolution and spectral weights.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rodeo {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

// Largest supported dimension (12 qubits).
inline constexpr Index kMaxDimension = 4096;

// Dense d x d complex Hermitian matrix. Construction validates Hermiticity
// and stores the exactly symmetrized matrix (H + H^dagger) / 2.
class HermitianOperator {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  explicit HermitianOperator(ComplexMatrix entries, double tolerance = kDefaultTolerance);

  const ComplexMatrix& matrix() const noexcept { return entries_; }
  Index dim() const noexcept { return entries_.rows(); }
  double max_abs() const;
  bool is_real() const;

  Complex operator()(Index row, Index col) const { return entries_(row, col); }

 private:
  ComplexMatrix entries_;
};

// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
// Each eigenvector has its largest-magnitude entry real and positive.
struct EigenDecomposition {
  std::vector<double> energies;
  ComplexMatrix vectors;

  Index dim() const noexcept { return vectors.rows(); }
  ComplexVector vector(Index j) const { return vectors.col(j); }
};

// Partitions the basis into blocks no operator couples across. Two indices
// share a block when any operator has a nonzero entry between them.
std::vector<std::vector<Index>> coupled_blocks(const std::vector<const ComplexMatrix*>& operators);

EigenDecomposition eigendecompose(const HermitianOperator& h);

// A state written in an eigenbasis plus the joint probability of the
// post-selections that produced it.
class SpectralState {
 public:
  SpectralState() = default;
  SpectralState(ComplexVector amplitudes, double survival_probability);

  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  double survival_probability() const noexcept { return survival_; }
  Index dim() const noexcept { return amplitudes_.size(); }
  Complex amplitude(Index j) const { return amplitudes_(j); }

  // Probability |a_j|^2.
  double weight(Index j) const { return std::norm(amplitudes_(j)); }

 private:
  ComplexVector amplitudes_;
  double survival_ = 1.0;
};

// One eigenvalue after merging exact degeneracies.
struct SpectralLevel {
  double energy = 0.0;
  double weight = 0.0;
  std::vector<Index> members;
};

// w_j = |a_j|^2 per eigenvector, plus the same weights merged by level.
struct SpectralWeights {
  std::vector<double> energies;
  std::vector<double> weights;
  std::vector<SpectralLevel> levels;

  std::size_t size() const noexcept { return weights.size(); }
  double total() const;
};

// Relative tolerance under which two eigenvalues count as one level.
inline constexpr double kDegeneracyTolerance = 1e-9;

SpectralState project_to_eigenbasis(const ComplexVector& psi, const EigenDecomposition& eig);

// Inverse of project_to_eigenbasis: sum_j a_j |v_j>.
ComplexVector reconstruct(const SpectralState& state, const EigenDecomposition& eig);

// a_j <- exp(-i E_j t) a_j.
SpectralState evolve_phase(const SpectralState& state, const EigenDecomposition& eig, double t);

SpectralWeights weights_of(const SpectralState& state, const EigenDecomposition& eig);

// Builds weights directly from (energy, weight) pairs; energies need not be
// sorted. Used for synthetic spectra and tests.
SpectralWeights make_weights(std::vector<double> energies, std::vector<double> weights);

// Groups ascending energies into levels using kDegeneracyTolerance.
std::vector<SpectralLevel> merge_levels(const std::vector<double>& energies,
                                        const std::vector<double>& weights);

}  // namespace rodeo
