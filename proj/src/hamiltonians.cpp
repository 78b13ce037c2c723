#include "rodeo/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "rodeo/errors.hpp"
#include "rodeo/random.hpp"

namespace rodeo {

namespace {

using Bond = std::pair<int, int>;

void check_spin_sites(int sites) {
  if (sites < 2) throw ValidationError("spin chain needs at least 2 sites");
  if (sites > kMaxSpinSites) {
    std::ostringstream msg;
    msg << "spin chain of " << sites << " sites exceeds the supported maximum of "
        << kMaxSpinSites;
    throw DimensionError(msg.str());
  }
}

// Bit position of 1-based site j in an L-site basis index.
inline int bit_of_site(int site, int sites) { return sites - site; }

std::set<Bond> nearest_neighbour_bonds(int sites, bool periodic) {
  std::set<Bond> bonds;
  for (int j = 1; j < sites; ++j) bonds.insert({j, j + 1});
  if (periodic) bonds.insert({std::min(1, sites), std::max(1, sites)});
  return bonds;
}

}  // namespace

std::vector<double> realize_disorder(const AndersonParams& p) {
  if (p.sites < 2) throw ValidationError("Anderson lattice needs at least 2 sites");
  if (const auto* e = std::get_if<ExplicitDisorder>(&p.disorder)) {
    if (static_cast<int>(e->values.size()) != p.sites) {
      std::ostringstream msg;
      msg << "explicit disorder has " << e->values.size() << " values for " << p.sites << " sites";
      throw DimensionError(msg.str());
    }
    for (double c : e->values)
      if (!std::isfinite(c)) throw ValidationError("disorder values must be finite");
    return e->values;
  }
  const auto& g = std::get<GaussianDisorder>(p.disorder);
  if (!(g.rms > 0.0) || !std::isfinite(g.rms))
    throw ValidationError("disorder rms must be positive");
  Rng rng = make_rng(derive_seed(g.seed, {0x616e646572736f6eULL}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(p.sites));
  for (double& x : c) x = g.rms * normal(rng);
  return c;
}

DisorderSummary summarize_disorder(const std::vector<double>& c) {
  DisorderSummary s;
  if (c.empty()) return s;
  double sum = 0.0;
  double sum2 = 0.0;
  s.min = c.front();
  s.max = c.front();
  for (double x : c) {
    sum += x;
    sum2 += x * x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(c.size());
  s.rms = std::sqrt(sum2 / static_cast<double>(c.size()));
  return s;
}

HermitianOperator build_heisenberg(const HeisenbergParams& p) {
  check_spin_sites(p.sites);
  const int L = p.sites;
  const Index dim = Index{1} << L;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  const auto bonds = nearest_neighbour_bonds(L, p.periodic);

  for (Index s = 0; s < dim; ++s) {
    double diagonal = 0.0;
    for (int j = 1; j <= L; ++j) {
      const bool up = ((s >> bit_of_site(j, L)) & 1) == 0;
      diagonal += p.h * (up ? 1.0 : -1.0);
    }
    for (const auto& [a, b] : bonds) {
      const int ba = bit_of_site(a, L);
      const int bb = bit_of_site(b, L);
      const bool same = ((s >> ba) & 1) == ((s >> bb) & 1);
      diagonal += p.J * (same ? 1.0 : -1.0);
      // sigma^x sigma^x + sigma^y sigma^y = 2 (sigma^+ sigma^- + h.c.)
      if (!same) {
        const Index flipped = s ^ ((Index{1} << ba) | (Index{1} << bb));
        h(flipped, s) += 2.0 * p.J;
      }
    }
    h(s, s) += diagonal;
  }
  return HermitianOperator(std::move(h));
}

HermitianOperator build_anderson(const AndersonParams& p) {
  const auto c = realize_disorder(p);
  const Index L = p.sites;
  ComplexMatrix h = ComplexMatrix::Zero(L, L);
  for (Index k = 0; k < L; ++k) {
    h(k, k) = c[static_cast<std::size_t>(k)];
    const Index next = (k + 1) % L;
    h(next, k) += -1.0;
    h(k, next) += -1.0;
  }
  // L = 2: both neighbours of a site coincide and the loop adds the bond twice.
  if (L == 2) {
    h(0, 1) = -1.0;
    h(1, 0) = -1.0;
  }
  return HermitianOperator(std::move(h));
}

HermitianOperator build_staggered_field(int sites) {
  check_spin_sites(sites);
  const Index dim = Index{1} << sites;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    double v = 0.0;
    for (int j = 1; j <= sites; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const bool up = ((s >> bit_of_site(j, sites)) & 1) == 0;
      v += sign * (up ? 1.0 : -1.0);
    }
    h(s, s) = v;
  }
  return HermitianOperator(std::move(h));
}

ComplexVector build_product_state(std::string_view bits) {
  if (bits.empty()) throw ValidationError("product state bitstring is empty");
  if (bits.size() > static_cast<std::size_t>(kMaxSpinSites)) {
    std::ostringstream msg;
    msg << "product state of " << bits.size() << " sites exceeds the supported maximum";
    throw DimensionError(msg.str());
  }
  Index index = 0;
  for (char ch : bits) {
    if (ch != '0' && ch != '1') {
      std::ostringstream msg;
      msg << "product state bitstring contains non-binary character '" << ch << "'";
      throw ValidationError(msg.str());
    }
    index = (index << 1) | (ch == '1' ? 1 : 0);
  }
  ComplexVector v = ComplexVector::Zero(Index{1} << bits.size());
  v(index) = 1.0;
  return v;
}

ComplexVector build_site_state(Index dim, Index site) {
  if (site < 0 || site >= dim) {
    std::ostringstream msg;
    msg << "site " << site << " out of range for dimension " << dim;
    throw DimensionError(msg.str());
  }
  ComplexVector v = ComplexVector::Zero(dim);
  v(site) = 1.0;
  return v;
}

Index find_kmin(const std::vector<double>& c) {
  if (c.empty()) throw DimensionError("find_kmin: empty disorder");
  Index best = 0;
  for (Index k = 1; k < static_cast<Index>(c.size()); ++k)
    if (c[k] < c[best]) best = k;
  return best;
}

Index find_kmin(const AndersonParams& p) { return find_kmin(realize_disorder(p)); }

HermitianOperator parse_hamiltonian_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("Hamiltonian file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("entries"))
    throw ParseError("Hamiltonian file must be an object with \"dim\" and \"entries\"");
  if (!doc["dim"].is_number_integer()) throw ParseError("\"dim\" must be an integer");
  const auto dim = doc["dim"].get<long long>();
  if (dim < 1 || dim > kMaxDimension) {
    std::ostringstream msg;
    msg << "\"dim\" = " << dim << " outside [1, " << kMaxDimension << "]";
    throw DimensionError(msg.str());
  }
  const auto& entries = doc["entries"];
  if (!entries.is_array()) throw ParseError("\"entries\" must be an array");

  std::map<std::pair<Index, Index>, Complex> given;
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || !e[2].is_number() || !e[3].is_number())
      throw ParseError("each entry must be [row, col, re, im] with integer indices");
    const auto row = e[0].get<long long>();
    const auto col = e[1].get<long long>();
    if (row < 0 || col < 0 || row >= dim || col >= dim) {
      std::ostringstream msg;
      msg << "entry (" << row << "," << col << ") outside a " << dim << "x" << dim << " matrix";
      throw DimensionError(msg.str());
    }
    const Complex value(e[2].get<double>(), e[3].get<double>());
    if (!given.emplace(std::make_pair(Index(row), Index(col)), value).second) {
      std::ostringstream msg;
      msg << "duplicate entry (" << row << "," << col << ")";
      throw ParseError(msg.str());
    }
  }

  constexpr double kFileTolerance = 1e-9;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (const auto& [rc, value] : given) {
    const auto [r, c] = rc;
    const auto mirror = given.find({c, r});
    if (r == c) {
      if (std::abs(value.imag()) > kFileTolerance) {
        std::ostringstream msg;
        msg << "diagonal entry (" << r << "," << r << ") has imaginary part " << value.imag();
        throw ValidationError(msg.str());
      }
      m(r, r) = value.real();
    } else if (mirror == given.end()) {
      m(r, c) = value;
      m(c, r) = std::conj(value);
    } else {
      if (std::abs(value - std::conj(mirror->second)) > kFileTolerance) {
        std::ostringstream msg;
        msg << "entries (" << r << "," << c << ") and (" << c << "," << r
            << ") violate Hermiticity";
        throw ValidationError(msg.str());
      }
      m(r, c) = value;
    }
  }
  return HermitianOperator(std::move(m), kFileTolerance);
}

HermitianOperator load_hamiltonian(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open Hamiltonian file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_hamiltonian_json(buffer.str());
}

std::string hamiltonian_to_json(const HermitianOperator& h) {
  nlohmann::json doc;
  doc["dim"] = h.dim();
  auto entries = nlohmann::json::array();
  for (Index r = 0; r < h.dim(); ++r) {
    for (Index c = r; c < h.dim(); ++c) {
      const Complex v = h(r, c);
      if (v == Complex(0.0)) continue;
      entries.push_back({r, c, v.real(), v.imag()});
    }
  }
  doc["entries"] = std::move(entries);
  return doc.dump();
}

void save_hamiltonian(const HermitianOperator& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write Hamiltonian file " + path.string());
  out << hamiltonian_to_json(h) << '\n';
  if (!out) throw Error("failed writing Hamiltonian file " + path.string());
}

}  // namespace rodeo
