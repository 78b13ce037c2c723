#pragma once

// Model Hamiltonians, product states and the JSON coordinate file format.
//
// Spin conventions: sigma^z|0> = +|0>, sigma^z|1> = -|1>. Spin sites are
// numbered from 1 and site 1 is the most significant bit of the basis index,
// so the bitstring "0101" is basis index 0b0101. Lattice sites of the
// single-particle Anderson model are numbered from 0.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rodeo/spectral_core.hpp"

namespace rodeo {

inline constexpr int kMaxSpinSites = 12;

struct HeisenbergParams {
  int sites = 10;
  double J = 1.0;
  double h = 3.0;
  bool periodic = true;
};

struct ExplicitDisorder {
  std::vector<double> values;
};

// I.i.d. Gaussian on-site energies with mean zero.
struct GaussianDisorder {
  double rms = 0.5;
  std::uint64_t seed = 0;
};

struct AndersonParams {
  int sites = 100;
  std::variant<ExplicitDisorder, GaussianDisorder> disorder = GaussianDisorder{};
};

// The on-site energies c_0..c_{L-1}. Bit-identical for identical parameters.
std::vector<double> realize_disorder(const AndersonParams& p);

struct DisorderSummary {
  double mean = 0.0;
  double rms = 0.0;
  double min = 0.0;
  double max = 0.0;
};
DisorderSummary summarize_disorder(const std::vector<double>& c);

// J sum_<jk> sigma_j . sigma_k + h sum_j sigma^z_j over nearest-neighbour
// bonds. Periodic bonds are unordered pairs, so L = 2 has a single bond.
HermitianOperator build_heisenberg(const HeisenbergParams& p);

// -1 hopping between neighbouring sites (periodic), c_k on the diagonal.
HermitianOperator build_anderson(const AndersonParams& p);

// sum_{j=1}^{L} (-1)^j sigma^z_j; ground state |0101...> with energy -L.
HermitianOperator build_staggered_field(int sites);

// Unit basis vector for a bitstring over {0,1}; site 1 is the leftmost char.
ComplexVector build_product_state(std::string_view bits);

// Unit vector on lattice site k (0-based).
ComplexVector build_site_state(Index dim, Index site);

// Lowest on-site energy; ties go to the lowest index.
Index find_kmin(const AndersonParams& p);
Index find_kmin(const std::vector<double>& c);

// JSON {"dim": d, "entries": [[row, col, re, im], ...]}, 0-based indices.
// Entries may cover one triangle only; the mirror is filled by conjugation.
HermitianOperator parse_hamiltonian_json(std::string_view text);
HermitianOperator load_hamiltonian(const std::filesystem::path& path);

// Writes the upper triangle (diagonal included) of every nonzero entry.
std::string hamiltonian_to_json(const HermitianOperator& h);
void save_hamiltonian(const HermitianOperator& h, const std::filesystem::path& path);

}  // namespace rodeo
