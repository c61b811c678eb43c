#include "cspin/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>

#include "cspin/error.hpp"
#include "cspin/spin_core.hpp"

namespace cspin {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

double parse_number(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    bad("cannot parse '" + context + "' as a number or angle");
  }
  if (used != s.size()) bad("cannot parse '" + context + "' as a number or angle");
  return v;
}

template <typename T>
void take(const json& doc, const char* key, T& field) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("config key '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
  if (!doc.is_object()) bad(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) bad("unknown config key '" + key + "'" + (where.empty() ? "" : " in " + where));
  }
}

}  // namespace

double parse_angle(const std::string& text) {
  static const std::regex ws("\\s+");
  const std::string s = std::regex_replace(text, ws, "");
  if (s.empty()) bad("empty angle");
  static const std::regex frac(R"(^([+-]?)(\d*\.?\d*)\*?pi(?:/(\d*\.?\d+))?$)");
  std::smatch m;
  if (std::regex_match(s, m, frac)) {
    double a = 1.0;
    if (m[2].length() > 0) a = parse_number(m[2].str(), text);
    double b = 1.0;
    if (m[3].matched) b = parse_number(m[3].str(), text);
    if (b == 0.0) bad("angle '" + text + "' divides by zero");
    const double v = std::numbers::pi * a / b;
    return m[1] == "-" ? -v : v;
  }
  return parse_number(s, text);
}

void RunConfig::validate() const {
  params.validate();
  if (q < 1) bad("q must be >= 1");
  if (threads < 0) bad("threads must be >= 0");
  if (leading_modes < 2) bad("leading_modes must be >= 2");
  if (steps < 0) bad("steps must be >= 0");
  if (stride < 1) bad("stride must be >= 1");
  if (burn_in < 0) bad("burn_in must be >= 0");
  if (grid.n_g < 1 || grid.n_omega < 1) bad("grid sizes must be >= 1");
  if (grid.g_max < grid.g_min || grid.omega_max < grid.omega_min) bad("grid bounds are reversed");
  if (husimi_theta < 2 || husimi_phi < 2) bad("Husimi grid needs at least 2 points per axis");
  if (scale != "quick" && scale != "default") bad("scale must be 'quick' or 'default'");
  for (int n : n_list) {
    if (n < 1) bad("n_list entries must be >= 1");
  }
}

json to_json(const RunConfig& c) {
  const Tolerances& t = c.tolerances;
  return {
      {"subcommand", c.subcommand},
      {"n_spins", c.params.n_spins},
      {"omega_tau", c.params.omega_tau},
      {"g_tau", c.params.g_tau},
      {"p", c.p},
      {"q", c.q},
      {"out", c.out},
      {"threads", c.threads},
      {"dense", c.dense},
      {"leading_modes", c.leading_modes},
      {"steps", c.steps},
      {"stride", c.stride},
      {"burn_in", c.burn_in},
      {"initial_state", c.initial_state},
      {"grid",
       {{"g_min", c.grid.g_min},
        {"g_max", c.grid.g_max},
        {"n_g", c.grid.n_g},
        {"omega_min", c.grid.omega_min},
        {"omega_max", c.grid.omega_max},
        {"n_omega", c.grid.n_omega}}},
      {"n_list", c.n_list},
      {"g_list", c.g_list},
      {"husimi_theta", c.husimi_theta},
      {"husimi_phi", c.husimi_phi},
      {"figure", c.figure},
      {"scale", c.scale},
      {"tolerances",
       {{"cluster_tol", t.cluster_tol},
        {"pinv_cutoff", t.pinv_cutoff},
        {"match_tol", t.match_tol},
        {"mm_negativity", t.mm_negativity},
        {"lobe_fraction", t.lobe_fraction}}},
  };
}

RunConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"subcommand", "n_spins", "omega_tau", "g_tau", "p", "q", "out", "threads", "dense",
                  "leading_modes", "steps", "stride", "burn_in", "initial_state", "grid", "n_list", "g_list",
                  "husimi_theta", "husimi_phi", "figure", "scale", "tolerances"},
                 "");
  RunConfig c;
  take(doc, "subcommand", c.subcommand);
  take(doc, "n_spins", c.params.n_spins);
  if (doc.contains("omega_tau")) {
    const json& w = doc.at("omega_tau");
    if (w.is_number()) {
      c.params.omega_tau = w.get<double>();
    } else if (w.is_string()) {
      c.params.omega_tau = parse_angle(w.get<std::string>());
    } else {
      bad("config key 'omega_tau' must be a number or an angle string");
    }
  }
  take(doc, "g_tau", c.params.g_tau);
  take(doc, "p", c.p);
  take(doc, "q", c.q);
  take(doc, "out", c.out);
  take(doc, "threads", c.threads);
  take(doc, "dense", c.dense);
  take(doc, "leading_modes", c.leading_modes);
  take(doc, "steps", c.steps);
  take(doc, "stride", c.stride);
  take(doc, "burn_in", c.burn_in);
  take(doc, "initial_state", c.initial_state);
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    reject_unknown(g, {"g_min", "g_max", "n_g", "omega_min", "omega_max", "n_omega"}, "grid");
    take(g, "g_min", c.grid.g_min);
    take(g, "g_max", c.grid.g_max);
    take(g, "n_g", c.grid.n_g);
    take(g, "omega_min", c.grid.omega_min);
    take(g, "omega_max", c.grid.omega_max);
    take(g, "n_omega", c.grid.n_omega);
  }
  take(doc, "n_list", c.n_list);
  take(doc, "g_list", c.g_list);
  take(doc, "husimi_theta", c.husimi_theta);
  take(doc, "husimi_phi", c.husimi_phi);
  take(doc, "figure", c.figure);
  take(doc, "scale", c.scale);
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    reject_unknown(t, {"cluster_tol", "pinv_cutoff", "match_tol", "mm_negativity", "lobe_fraction"}, "tolerances");
    take(t, "cluster_tol", c.tolerances.cluster_tol);
    take(t, "pinv_cutoff", c.tolerances.pinv_cutoff);
    take(t, "match_tol", c.tolerances.match_tol);
    take(t, "mm_negativity", c.tolerances.mm_negativity);
    take(t, "lobe_fraction", c.tolerances.lobe_fraction);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    bad("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

Matrix make_initial_state(const SpinSector& sector, const std::string& spec) {
  if (spec == "up") return projector(basis_state(sector, 0));
  if (spec == "down") return projector(basis_state(sector, sector.dim() - 1));
  const auto comma = spec.find(',');
  if (comma == std::string::npos) bad("initial state must be 'up', 'down' or 'theta,phi'");
  const double theta = parse_angle(spec.substr(0, comma));
  const double phi = parse_angle(spec.substr(comma + 1));
  return projector(coherent_state(sector, theta, phi));
}

}  // namespace cspin
