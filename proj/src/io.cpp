#include "cspin/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "cspin/error.hpp"

namespace cspin::io {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace schema {

namespace {
const std::map<std::string, Schema>& registry() {
  static const std::map<std::string, Schema> all = [] {
    const std::vector<Schema> list = {
        {"purity_map", {"g_tau", "omega_tau", "purity"}},
        {"gap_map", {"g_tau", "omega_tau", "gap_ratio", "gamma1_over_delta1", "valid"}},
        {"frequency_cut", {"omega_tau", "gamma1_tau", "nu1_tau", "gap_ratio"}},
        {"trajectory", {"n", "jz_over_N", "jy_over_N", "sigma_z"}},
        {"size_scan", {"n_spins", "g_tau", "gamma_pq_tau"}},
        {"husimi", {"theta", "phi", "q_value", "aitoff_x", "aitoff_y"}},
        {"classical",
         {"t_over_tau", "p1", "p2", "p3", "jz_exact", "jz_mm", "jz_classical", "jy_exact", "jy_mm",
          "jy_classical"}},
        {"fan", {"omega_tau", "n", "jz_over_N"}},
        {"diagnostics_map", {"g_tau", "omega_tau", "d_ss", "d_cyc", "lambda_n", "delta_r"}},
        {"plateau", {"n", "jz_exact", "jz_plateau", "jy_exact", "jy_plateau"}},
        {"period5_dynamics", {"n", "jz_exact", "jz_mm", "jz_mixture", "jy_exact", "jy_mm", "jy_mixture"}},
    };
    std::map<std::string, Schema> m;
    for (const auto& s : list) m.emplace(s.name, s);
    return m;
  }();
  return all;
}
}  // namespace

const Schema& by_name(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(ErrorKind::InvalidArgument, "unknown CSV schema '" + name + "'");
  return it->second;
}

const Schema& purity_map() { return by_name("purity_map"); }
const Schema& gap_map() { return by_name("gap_map"); }
const Schema& frequency_cut() { return by_name("frequency_cut"); }
const Schema& trajectory() { return by_name("trajectory"); }
const Schema& size_scan() { return by_name("size_scan"); }
const Schema& husimi() { return by_name("husimi"); }
const Schema& classical() { return by_name("classical"); }
const Schema& fan() { return by_name("fan"); }
const Schema& diagnostics_map() { return by_name("diagnostics_map"); }
const Schema& plateau() { return by_name("plateau"); }
const Schema& period5_dynamics() { return by_name("period5_dynamics"); }

}  // namespace schema

void Table::add(std::vector<double> row) {
  if (row.size() != schema.columns.size()) {
    throw Error(ErrorKind::DimensionMismatch, "row width " + std::to_string(row.size()) + " does not match schema '" +
                                                  schema.name + "'");
  }
  rows.push_back(std::move(row));
}

void write_csv(const fs::path& path, const Table& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const auto& cols = table.schema.columns;
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != cols.size()) throw Error(ErrorKind::DimensionMismatch, "ragged row in " + path.string());
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Table read_csv(const fs::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  Table t{schema, {}};
  std::string line;
  std::getline(in, line);
  std::string expected;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) expected += (c ? "," : "") + schema.columns[c];
  if (line != expected) {
    throw Error(ErrorKind::Io, path.string() + ": header '" + line + "' does not match schema '" + schema.name + "'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "nan") {
        row.push_back(std::nan(""));
      } else if (cell == "inf" || cell == "-inf") {
        row.push_back(cell[0] == '-' ? -HUGE_VAL : HUGE_VAL);
      } else {
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw Error(ErrorKind::Io, path.string() + ": bad number '" + cell + "'");
        }
        row.push_back(v);
      }
    }
    t.add(std::move(row));
  }
  return t;
}

Table purity_table(const SweepResult& result) {
  Table t{schema::purity_map(), {}};
  for (const auto& r : result.records) t.add({r.g_tau, r.omega_tau, r.purity});
  return t;
}

Table gap_table(const SweepResult& result) {
  Table t{schema::gap_map(), {}};
  for (const auto& r : result.records) {
    t.add({r.g_tau, r.omega_tau, r.ratio, r.Gamma_1 / std::abs(r.delta_1), r.valid ? 1.0 : 0.0});
  }
  return t;
}

Table frequency_cut_table(const SweepResult& result) {
  Table t{schema::frequency_cut(), {}};
  for (const auto& r : result.records) t.add({r.omega_tau, r.gamma_1, r.nu_1, r.ratio});
  return t;
}

Table size_scan_table(const SweepResult& result) {
  Table t{schema::size_scan(), {}};
  for (const auto& r : result.records) t.add({static_cast<double>(r.n_spins), r.g_tau, r.gamma_pq});
  return t;
}

Table trajectory_table(const std::vector<TrajectoryRow>& rows) {
  Table t{schema::trajectory(), {}};
  for (const auto& r : rows) t.add({static_cast<double>(r.n), r.jz_over_n, r.jy_over_n, r.sigma_z});
  return t;
}

Table husimi_table(const HusimiGrid& grid) {
  Table t{schema::husimi(), {}};
  for (std::size_t i = 0; i < grid.thetas.size(); ++i) {
    for (std::size_t j = 0; j < grid.phis.size(); ++j) {
      const AitoffPoint a = aitoff_project(grid.thetas[i], grid.phis[j]);
      t.add({grid.thetas[i], grid.phis[j], grid.values(static_cast<Index>(i), static_cast<Index>(j)), a.x, a.y});
    }
  }
  return t;
}

Table classical_table(const ComparisonReport& report) {
  Table t{schema::classical(), {}};
  for (const auto& r : report.rows) {
    t.add({static_cast<double>(r.t_over_tau), r.p[0], r.p[1], r.p[2], r.jz_exact, r.jz_mm, r.jz_classical, r.jy_exact,
           r.jy_mm, r.jy_classical});
  }
  return t;
}

Table fan_table(const std::vector<double>& omega_tau, const RealMatrix& jz_over_n) {
  if (static_cast<Index>(omega_tau.size()) != jz_over_n.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "fan_table: omega axis does not match data rows");
  }
  Table t{schema::fan(), {}};
  for (Index i = 0; i < jz_over_n.rows(); ++i) {
    for (Index n = 0; n < jz_over_n.cols(); ++n) {
      t.add({omega_tau[static_cast<std::size_t>(i)], static_cast<double>(n), jz_over_n(i, n)});
    }
  }
  return t;
}

namespace {

// JSON has no NaN; non-finite values become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

json params_json(const ChannelParams& params) {
  return {{"n_spins", params.n_spins}, {"omega_tau", params.omega_tau}, {"g_tau", params.g_tau}};
}

json spectrum_json(const ChannelSpectrum& spectrum, const ChannelParams& params, Index modes) {
  const Index m = modes < 0 ? spectrum.size() : std::min(modes, spectrum.size());
  json values = json::array();
  json rates = json::array();
  json freqs = json::array();
  for (Index j = 0; j < m; ++j) {
    values.push_back({spectrum.eigenvalue(j).real(), spectrum.eigenvalue(j).imag()});
    rates.push_back(number(spectrum.rate(j)));
    freqs.push_back(spectrum.frequency(j));
  }
  json defective = json::array();
  for (Index j : spectrum.defective_modes()) defective.push_back(j);
  return {{"params", params_json(params)}, {"power", spectrum.power()}, {"dim", spectrum.dim()},
          {"modes", m},                    {"eigenvalues", values},     {"rates", rates},
          {"frequencies", freqs},          {"defective", defective}};
}

json manifold_json(const MetastableManifold& m) {
  json modes = json::array();
  for (Index j : m.modes) modes.push_back(j);
  const auto& d = m.diagnostics;
  json diag = {{"d_ss", d.d_ss},
               {"d_cyc", d.d_cyc},
               {"lambda_N", d.lambda_n},
               {"min_mu_eig", d.min_mu_eig},
               {"cyclic", numbers(d.cyclic)},
               {"mu_min_eigs", numbers(d.mu_min_eigs)},
               {"projector_min_eigs", numbers(d.projector_min_eigs)}};
  if (m.q == 3) diag["delta_r"] = d.delta_r;
  json out = {{"q", m.q},
              {"cycle_step", m.cycle_step},
              {"modes", modes},
              {"c", numbers(m.c)},
              {"Gamma", numbers(m.Gamma)},
              {"delta", numbers(m.delta)},
              {"Gamma_star", number(m.Gamma_star)},
              {"relabeled", m.relabeled},
              {"diagnostics", diag}};
  if (m.q == 3) out["ratio_r"] = m.ratio_r;
  for (std::size_t j = 0; j < m.Gamma.size(); ++j) {
    out["Gamma_" + std::to_string(j + 1)] = number(m.Gamma[j]);
    out["delta_" + std::to_string(j + 1)] = number(m.delta[j]);
  }
  json weights = json::array();
  for (const auto& p : m.projectors) weights.push_back(trace_product(p, m.rho_ss).real());
  out["stationary_weights"] = weights;
  return out;
}

std::vector<fs::path> write_eigenmatrices(const fs::path& stem, const ChannelSpectrum& spectrum, Index modes) {
  if (!spectrum.has_vectors()) throw Error(ErrorKind::InvalidArgument, "spectrum carries no eigenvectors");
  const Index d = spectrum.dim();
  const Index m = modes < 0 ? spectrum.size() : std::min(modes, spectrum.size());
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  std::vector<fs::path> written;

  auto dump = [&](const std::string& kind, auto&& get) {
    fs::path bin = stem;
    bin += "_" + kind + ".bin";
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + bin.string());
    for (Index j = 0; j < m; ++j) {
      const Matrix a = get(j);
      for (Index r = 0; r < d; ++r) {
        for (Index c = 0; c < d; ++c) {
          const double re_im[2] = {a(r, c).real(), a(r, c).imag()};
          out.write(reinterpret_cast<const char*>(re_im), sizeof re_im);
        }
      }
    }
    if (!out) throw Error(ErrorKind::Io, "write failed: " + bin.string());
    written.push_back(bin);
  };

  dump("right", [&](Index j) { return spectrum.right(j); });
  const bool lefts = spectrum.left_coefficients().cols() > 0 && spectrum.defective_modes().empty();
  if (lefts) dump("left", [&](Index j) { return spectrum.left(j); });

  json side = {{"dtype", "complex128"},
               {"byte_order", "little"},
               {"layout", "row-major"},
               {"shape", {m, d, d}},
               {"power", spectrum.power()},
               {"gauge",
                {{"right", "unit Frobenius norm, largest-magnitude entry real positive; mode 0 unit trace"},
                 {"left", "Tr[L_j R_k] = delta_jk; mode 0 is the identity"}}},
               {"files", {{"right", written[0].filename().string()}}}};
  if (lefts) side["files"]["left"] = written[1].filename().string();
  json values = json::array();
  for (Index j = 0; j < m; ++j) values.push_back({spectrum.eigenvalue(j).real(), spectrum.eigenvalue(j).imag()});
  side["eigenvalues"] = values;
  fs::path sidecar = stem;
  sidecar += ".json";
  write_json(sidecar, side);
  written.push_back(sidecar);
  return written;
}

std::vector<Matrix> read_eigenmatrices(const fs::path& bin_path) {
  fs::path sidecar = bin_path;
  std::string stem = sidecar.stem().string();
  const auto us = stem.rfind('_');
  if (us == std::string::npos) throw Error(ErrorKind::Io, "unexpected eigenmatrix file name " + bin_path.string());
  sidecar = bin_path.parent_path() / (stem.substr(0, us) + ".json");
  const json side = read_json(sidecar);
  const Index m = side.at("shape").at(0).get<Index>();
  const Index d = side.at("shape").at(1).get<Index>();
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + bin_path.string());
  std::vector<Matrix> out;
  for (Index j = 0; j < m; ++j) {
    Matrix a(d, d);
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) {
        double re_im[2];
        in.read(reinterpret_cast<char*>(re_im), sizeof re_im);
        a(r, c) = Complex(re_im[0], re_im[1]);
      }
    }
    if (!in) throw Error(ErrorKind::Io, "truncated eigenmatrix file " + bin_path.string());
    out.push_back(std::move(a));
  }
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorKind::Io, "SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

Manifest::Manifest(fs::path dir, std::string figure, json params)
    : dir_(std::move(dir)), figure_(std::move(figure)), params_(std::move(params)) {
  fs::create_directories(dir_);
}

void Manifest::add_csv(const std::string& name, const Table& table) {
  write_csv(dir_ / name, table);
  add_file(name, table.schema.name);
}

void Manifest::add_json(const std::string& name, const json& doc, const std::string& schema_name) {
  write_json(dir_ / name, doc);
  add_file(name, schema_name);
}

void Manifest::add_file(const std::string& name, const std::string& schema_name) {
  if (!fs::exists(dir_ / name)) throw Error(ErrorKind::Io, "manifest entry missing: " + (dir_ / name).string());
  for (auto& f : files_) {
    if (f.first == name) {
      f.second = schema_name;
      return;
    }
  }
  files_.emplace_back(name, schema_name);
}

void Manifest::set_timing(const std::string& key, double seconds) { timing_[key] = seconds; }

json Manifest::to_json() const {
  json files = json::array();
  for (const auto& [name, schema_name] : files_) {
    files.push_back({{"path", name}, {"sha256", sha256_file(dir_ / name)}, {"schema", schema_name}});
  }
  return {{"figure", figure_}, {"params", params_}, {"files", files}, {"timing", timing_}};
}

void Manifest::write() const { write_json(dir_ / "manifest.json", to_json()); }

bool verify_manifest(const fs::path& manifest_path, std::string* problem) {
  auto fail = [&](const std::string& why) {
    if (problem) *problem = why;
    return false;
  };
  json doc;
  try {
    doc = read_json(manifest_path);
  } catch (const Error& e) {
    return fail(e.what());
  }
  for (const char* key : {"figure", "params", "files", "timing"}) {
    if (!doc.contains(key)) return fail(std::string("missing key '") + key + "'");
  }
  if (!doc["files"].is_array() || doc["files"].empty()) return fail("no files listed");
  const fs::path dir = manifest_path.parent_path();
  for (const auto& f : doc["files"]) {
    const fs::path p = dir / f.at("path").get<std::string>();
    if (!fs::exists(p)) return fail("missing file " + p.string());
    if (sha256_file(p) != f.at("sha256").get<std::string>()) return fail("checksum mismatch for " + p.string());
  }
  return true;
}

}  // namespace cspin::io
