#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cspin/channel.hpp"

namespace cspin {

/// Parses "2.0943951", "2pi/3", "2*pi/3", "-pi/2", "0.5pi" or "pi".
/// Fractions of pi are evaluated as pi * a / b.
double parse_angle(const std::string& text);

/// Numerical knobs that are configuration rather than physics.
struct Tolerances {
  double cluster_tol = 1e-8;       // eigenvalue clustering in the decomposition
  double pinv_cutoff = 1e-12;      // cluster biorthonormalization
  double match_tol = 1e-8;         // right/left Ritz value pairing
  double mm_negativity = 0.05;     // allowed negative weight in the manifold projection
  double lobe_fraction = 0.5;      // Husimi level for lobe counting
  bool operator==(const Tolerances&) const = default;
};

/// Axis-aligned (g, omega) box sampled on n_g x n_omega points.
struct GridSpec {
  double g_min = 0.02;
  double g_max = 0.4;
  int n_g = 60;
  double omega_min = 0.02;
  double omega_max = 3.14159265358979323846;
  int n_omega = 120;
  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  std::string subcommand;
  ChannelParams params{30, 2.0 * 3.14159265358979323846 / 3.0, 0.2};
  int p = 2;
  int q = 3;
  std::string out = "out";
  int threads = 0;
  bool dense = false;
  int leading_modes = 10;

  // trajectories and dynamics
  long steps = 200;
  long stride = 1;
  long burn_in = 10;
  std::string initial_state = "up";  // "up": |J,J>, "down": |J,-J>, or "theta,phi" coherent state

  GridSpec grid;
  std::vector<int> n_list;
  std::vector<double> g_list;

  int husimi_theta = 101;
  int husimi_phi = 201;

  std::string figure;
  std::string scale = "default";  // "quick" or "default"

  Tolerances tolerances;

  bool operator==(const RunConfig&) const = default;

  /// Throws InvalidArgument on inconsistent values.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Starts from defaults and overwrites the keys present; unknown keys and
/// wrongly typed values throw InvalidArgument. omega_tau may be a number or
/// an angle string.
RunConfig config_from_json(const nlohmann::json& doc);

RunConfig load_config(const std::string& path);

/// Initial density matrix from "up" (|J,J>), "down" (|J,-J>) or "theta,phi".
Matrix make_initial_state(const SpinSector& sector, const std::string& spec);

}  // namespace cspin
