#include "rodeo/output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "rodeo/errors.hpp"

namespace rodeo {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ValidationError("CSV header must have at least one column");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw ValidationError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::text() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  const std::string text = table.text();
  write_file(path, text);
  return sha256_hex(text);
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command_line"] = command_line;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  j["duration_seconds"] = duration_seconds;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : outputs)
    j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["results"] = results;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::ordered_json& j) {
  try {
    RunManifest m;
    m.command_line = j.at("command_line").get<std::vector<std::string>>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.duration_seconds = j.at("duration_seconds").get<double>();
    for (const auto& o : j.at("outputs"))
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(),
                           o.at("bytes").get<std::size_t>()});
    if (j.contains("results")) m.results = j.at("results");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
}

void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
  write_file(path, m.to_json().dump(2) + "\n");
}

RunManifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return RunManifest::from_json(j);
}

std::vector<DigestMismatch> check_digests(const RunManifest& m,
                                          const std::filesystem::path& manifest_path) {
  std::vector<DigestMismatch> bad;
  const auto base = manifest_path.parent_path();
  for (const auto& o : m.outputs) {
    std::filesystem::path p(o.path);
    if (p.is_relative() && !base.empty()) p = base / p;
    if (!std::filesystem::exists(p)) {
      bad.push_back({o.path, "missing"});
      continue;
    }
    const std::string text = read_file(p);
    if (sha256_hex(text) != o.sha256) bad.push_back({o.path, "digest mismatch"});
  }
  return bad;
}

}  // namespace rodeo
