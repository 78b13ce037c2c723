#pragma once

// CSV emission with shortest round-trip number formatting, SHA-256 digests
// and JSON run manifests.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rodeo {

// Shortest decimal string that parses back to exactly x ("nan", "inf",
// "-inf" for non-finite values).
std::string format_double(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  // Cells must match the header width.
  void add_row(std::vector<std::string> cells);

  // Header line then rows, '\n' terminated.
  std::string text() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string sha256_hex(std::string_view bytes);

// Writes bytes to path, truncating. Throws rodeo::Error on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Writes table.text() to path and returns its digest.
std::string emit_csv(const CsvTable& table, const std::filesystem::path& path);

inline constexpr const char* kArtifactVersion = "0.1.0";

struct OutputRecord {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::vector<std::string> command_line;
  std::string subcommand;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;
  double duration_seconds = 0.0;
  std::vector<OutputRecord> outputs;
  // Scalar results that do not fit the CSV (final estimate, background...).
  nlohmann::ordered_json results = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::ordered_json& j);
};

void save_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

struct DigestMismatch {
  std::string path;
  std::string reason;
};

// Re-hashes every output relative to the manifest's directory when the
// recorded path is relative.
std::vector<DigestMismatch> check_digests(const RunManifest& m,
                                          const std::filesystem::path& manifest_path);

}  // namespace rodeo
