#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rodeo/errors.hpp"
#include "rodeo/hamiltonians.hpp"
#include "rodeo/spectral_core.hpp"

using namespace rodeo;

namespace {

HermitianOperator from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto n = static_cast<Index>(rows.size());
  ComplexMatrix m(n, n);
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (const auto& v : row) m(r, c++) = v;
    ++r;
  }
  return HermitianOperator(m);
}

}  // namespace

TEST(HermitianOperator, RejectsNonHermitianAndNamesWorstPair) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  m(2, 0) = 0.5;
  try {
    HermitianOperator h(m);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("(0,2)"), std::string::npos) << what;
    EXPECT_NE(what.find("(2,0)"), std::string::npos) << what;
  }
}

TEST(HermitianOperator, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(HermitianOperator(ComplexMatrix::Zero(2, 3)), DimensionError);
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = std::nan("");
  EXPECT_THROW(HermitianOperator{m}, ValidationError);
}

TEST(Eigendecompose, PauliZ) {
  const auto eig = eigendecompose(from_rows({{1, 0}, {0, -1}}));
  ASSERT_EQ(eig.energies.size(), 2u);
  EXPECT_DOUBLE_EQ(eig.energies[0], -1.0);
  EXPECT_DOUBLE_EQ(eig.energies[1], 1.0);
  EXPECT_NEAR(std::abs(eig.vectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(eig.vectors(0, 1)), 1.0, 1e-15);
}

TEST(Eigendecompose, PauliX) {
  const auto eig = eigendecompose(from_rows({{0, 1}, {1, 0}}));
  EXPECT_NEAR(eig.energies[0], -1.0, 1e-14);
  EXPECT_NEAR(eig.energies[1], 1.0, 1e-14);
  const double s = 1.0 / std::sqrt(2.0);
  // Largest entry real positive, so the phase is pinned.
  EXPECT_NEAR(std::abs(eig.vectors(0, 0) + eig.vectors(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.vectors(0, 1) - s), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.vectors(1, 1) - s), 0.0, 1e-14);
}

TEST(Eigendecompose, RandomInvariants) {
  std::mt19937_64 rng(11);
  for (int d : {1, 2, 5, 17, 64}) {
    const ComplexMatrix m = oracle::random_hermitian(d, rng, 2.0);
    const HermitianOperator h(m);
    const auto eig = eigendecompose(h);
    EXPECT_TRUE(std::is_sorted(eig.energies.begin(), eig.energies.end()));
    const ComplexMatrix gram = eig.vectors.adjoint() * eig.vectors;
    EXPECT_LE((gram - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    ComplexMatrix rebuilt = ComplexMatrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
      const ComplexVector v = eig.vector(j);
      rebuilt += eig.energies[j] * v * v.adjoint();
      EXPECT_LE((h.matrix() * v - eig.energies[j] * v).norm(), 1e-9 * (1.0 + std::abs(eig.energies[j])));
      Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      EXPECT_NEAR(v(arg).imag(), 0.0, 1e-14);
      EXPECT_GT(v(arg).real(), 0.0);
    }
    EXPECT_LE((rebuilt - h.matrix()).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, h.max_abs()));
  }
}

TEST(Eigendecompose, BlockStructureMatchesDenseSolver) {
  // Block-diagonal input goes through the per-block path; eigenvalues must
  // agree with a dense solve of the whole matrix.
  std::mt19937_64 rng(5);
  ComplexMatrix m = ComplexMatrix::Zero(7, 7);
  m.block(0, 0, 3, 3) = oracle::random_hermitian(3, rng);
  m.block(3, 3, 4, 4) = oracle::random_hermitian(4, rng);
  const auto eig = eigendecompose(HermitianOperator(m));
  const auto ref = oracle::solve(m);
  for (Index j = 0; j < 7; ++j) EXPECT_NEAR(eig.energies[j], ref.eigenvalues()(j), 1e-12);
}

TEST(CoupledBlocks, SplitsDiagonalAndJoinsCoupled) {
  ComplexMatrix a = ComplexMatrix::Zero(4, 4);
  a(0, 2) = a(2, 0) = 1.0;
  const auto blocks = coupled_blocks({&a});
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(blocks[0], (std::vector<Index>{0, 2}));
}

TEST(Projection, EigenvectorGivesUnitAmplitude) {
  std::mt19937_64 rng(3);
  const HermitianOperator h(oracle::random_hermitian(6, rng));
  const auto eig = eigendecompose(h);
  const auto s = project_to_eigenbasis(eig.vector(3), eig);
  for (Index j = 0; j < 6; ++j) EXPECT_NEAR(s.weight(j), j == 3 ? 1.0 : 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.survival_probability(), 1.0);
}

TEST(Projection, UniformStateOnPauliX) {
  const auto eig = eigendecompose(from_rows({{0, 1}, {1, 0}}));
  ComplexVector psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto s = project_to_eigenbasis(psi, eig);
  EXPECT_NEAR(s.weight(0), 0.0, 1e-14);
  EXPECT_NEAR(s.weight(1), 1.0, 1e-14);
}

TEST(Projection, ValidatesInput) {
  const auto eig = eigendecompose(from_rows({{0, 1}, {1, 0}}));
  EXPECT_THROW(project_to_eigenbasis(ComplexVector::Ones(3) / std::sqrt(3.0), eig), DimensionError);
  EXPECT_THROW(project_to_eigenbasis(ComplexVector::Ones(2), eig), ValidationError);
}

TEST(Projection, RoundTripAndParseval) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 64);
    const auto eig = eigendecompose(HermitianOperator(oracle::random_hermitian(d, rng)));
    const ComplexVector psi = oracle::random_state(d, rng);
    const auto s = project_to_eigenbasis(psi, eig);
    EXPECT_NEAR(s.amplitudes().squaredNorm(), 1.0, 1e-10);
    EXPECT_LE((reconstruct(s, eig) - psi).norm(), 1e-10);
  }
}

TEST(EvolvePhase, IdentityInverseAndPhase) {
  std::mt19937_64 rng(23);
  const auto eig = eigendecompose(HermitianOperator(oracle::random_hermitian(8, rng)));
  const auto s = project_to_eigenbasis(oracle::random_state(8, rng), eig);
  EXPECT_LE((evolve_phase(s, eig, 0.0).amplitudes() - s.amplitudes()).norm(), 0.0);
  const auto back = evolve_phase(evolve_phase(s, eig, 1.7), eig, -1.7);
  EXPECT_LE((back.amplitudes() - s.amplitudes()).norm(), 1e-12);

  const auto single = project_to_eigenbasis(eig.vector(2), eig);
  const auto moved = evolve_phase(single, eig, 0.9);
  const Complex ratio = moved.amplitude(2) / single.amplitude(2);
  EXPECT_NEAR(std::abs(ratio), 1.0, 1e-14);
  EXPECT_NEAR(std::arg(ratio), std::remainder(-eig.energies[2] * 0.9, 2 * std::numbers::pi), 1e-12);
}

TEST(EvolvePhase, NormDriftOverManySteps) {
  std::mt19937_64 rng(29);
  const auto eig = eigendecompose(HermitianOperator(oracle::random_hermitian(16, rng, 3.0)));
  auto s = project_to_eigenbasis(oracle::random_state(16, rng), eig);
  for (int k = 0; k < 1000; ++k) s = evolve_phase(s, eig, 0.37);
  EXPECT_NEAR(s.amplitudes().squaredNorm(), 1.0, 1e-12);
}

TEST(Weights, UnitAndEqualSplit) {
  const auto eig = eigendecompose(from_rows({{1, 0}, {0, 2}}));
  ComplexVector a(2);
  a << Complex(1, 0) / std::sqrt(2.0), Complex(0, 1) / std::sqrt(2.0);
  const auto w = weights_of(SpectralState(a, 1.0), eig);
  EXPECT_NEAR(w.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(w.weights[1], 0.5, 1e-15);
  EXPECT_NEAR(w.total(), 1.0, 1e-15);
}

TEST(Weights, DegenerateLevelsMerge) {
  const auto w = make_weights({0.0, 1.0, 1.0 + 1e-12, 2.0}, {0.1, 0.2, 0.3, 0.4});
  ASSERT_EQ(w.levels.size(), 3u);
  EXPECT_NEAR(w.levels[1].weight, 0.5, 1e-15);
  EXPECT_EQ(w.levels[1].members.size(), 2u);
  EXPECT_EQ(w.size(), 4u);
}

TEST(Weights, MakeWeightsValidates) {
  EXPECT_THROW(make_weights({0.0, 1.0}, {0.5, 0.6}), ValidationError);
  EXPECT_THROW(make_weights({0.0}, {-1.0}), ValidationError);
  EXPECT_THROW(make_weights({}, {}), DimensionError);
}

TEST(SpectralState, Invariants) {
  ComplexVector a(2);
  a << 1.0, 1.0;
  EXPECT_THROW(SpectralState(a, 1.0), ValidationError);
  a /= std::sqrt(2.0);
  EXPECT_THROW(SpectralState(a, 1.5), ValidationError);
  EXPECT_NO_THROW(SpectralState(a, 0.25));
}
