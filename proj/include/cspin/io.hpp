#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cspin/classical.hpp"
#include "cspin/metastable.hpp"
#include "cspin/spectra.hpp"
#include "cspin/spin_core.hpp"
#include "cspin/sweep.hpp"

namespace cspin::io {

using nlohmann::json;
namespace fs = std::filesystem;

/// Shortest round-trip-safe text: 17 significant digits, "nan"/"inf" spelled out.
std::string format_double(double x);

/// Column layout of every CSV the toolkit writes.
struct Schema {
  std::string name;
  std::vector<std::string> columns;
};

namespace schema {
const Schema& purity_map();
const Schema& gap_map();
const Schema& frequency_cut();
const Schema& trajectory();
const Schema& size_scan();
const Schema& husimi();
const Schema& classical();
const Schema& fan();
const Schema& diagnostics_map();
const Schema& plateau();
const Schema& period5_dynamics();
/// Every schema by name; throws on an unknown name.
const Schema& by_name(const std::string& name);
}  // namespace schema

struct Table {
  Schema schema;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

/// Writes header plus rows; throws Io on failure or on a row of the wrong width.
void write_csv(const fs::path& path, const Table& table);

/// Parses a CSV written by write_csv back into a table with the given schema;
/// the header has to match exactly.
Table read_csv(const fs::path& path, const Schema& schema);

Table purity_table(const SweepResult& result);
Table gap_table(const SweepResult& result);
Table frequency_cut_table(const SweepResult& result);
Table size_scan_table(const SweepResult& result);
Table trajectory_table(const std::vector<TrajectoryRow>& rows);
Table husimi_table(const HusimiGrid& grid);
Table classical_table(const ComparisonReport& report);
Table fan_table(const std::vector<double>& omega_tau, const RealMatrix& jz_over_n);

/// Eigenvalues as [re, im], rates and frequencies of the first `modes` entries (all when negative).
json spectrum_json(const ChannelSpectrum& spectrum, const ChannelParams& params, Index modes = -1);

/// q, c constants, r, rates, diagnostics and mixture weights of the stationary state.
json manifold_json(const MetastableManifold& manifold);

json params_json(const ChannelParams& params);

/// Dumps the first `modes` right (and left, when available) eigenmatrices as
/// little-endian complex double arrays, row-major with shape [modes, dim, dim],
/// plus a JSON sidecar describing shape and gauge. Returns the files written.
std::vector<fs::path> write_eigenmatrices(const fs::path& stem, const ChannelSpectrum& spectrum, Index modes);

/// Reads one array written by write_eigenmatrices back as a list of matrices.
std::vector<Matrix> read_eigenmatrices(const fs::path& bin_path);

void write_json(const fs::path& path, const json& doc);
json read_json(const fs::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

/// manifest.json: {figure, params, files: [{path, sha256, schema}], timing}.
class Manifest {
 public:
  Manifest(fs::path dir, std::string figure, json params);

  const fs::path& dir() const noexcept { return dir_; }

  /// Writes `table` to dir/name and records it.
  void add_csv(const std::string& name, const Table& table);
  void add_json(const std::string& name, const json& doc, const std::string& schema_name);
  /// Records a file that already exists under dir.
  void add_file(const std::string& name, const std::string& schema_name);
  void set_timing(const std::string& key, double seconds);
  void set_params(json params) { params_ = std::move(params); }
  json& params() noexcept { return params_; }

  json to_json() const;
  /// Hashes every listed file and writes dir/manifest.json.
  void write() const;

 private:
  fs::path dir_;
  std::string figure_;
  json params_;
  std::vector<std::pair<std::string, std::string>> files_;
  json timing_ = json::object();
};

/// Checks that every file listed in a manifest exists and matches its checksum.
bool verify_manifest(const fs::path& manifest_path, std::string* problem = nullptr);

}  // namespace cspin::io
