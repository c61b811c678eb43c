#include "cspin/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>

#include "cspin/classical.hpp"
#include "cspin/config.hpp"
#include "cspin/error.hpp"
#include "cspin/figures.hpp"
#include "cspin/io.hpp"
#include "cspin/metastable.hpp"
#include "cspin/spectra.hpp"
#include "cspin/sweep.hpp"

namespace cspin::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

// Flag values; unset ones fall back to the config file, then to defaults.
struct Flags {
  std::string config_path;
  std::optional<int> n_spins;
  std::optional<std::string> omega_tau;
  std::optional<double> g_tau;
  std::optional<int> p, q;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool dense = false;
  std::optional<int> leading_modes;
  std::optional<long> steps, stride, burn_in;
  std::optional<std::string> initial_state;
  std::optional<double> g_min, g_max;
  std::optional<std::string> omega_min, omega_max;
  std::optional<int> n_g, n_omega;
  std::optional<std::string> n_list, g_list;
  std::optional<int> husimi_theta, husimi_phi;
  std::optional<std::string> figure;
  std::optional<std::string> scale;
  std::optional<double> mm_negativity, match_tol, cluster_tol;
  std::string target = "stationary";
  int modes = 10;
  bool dump = false;
};

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(std::stoi(item, &used));
      } else {
        out.push_back(parse_angle(item));
        used = item.size();
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, std::string("bad entry '") + item + "' in " + what);
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " is empty");
  return out;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON run configuration (flags override its keys)");
  sub->add_option("--n-spins", f.n_spins, "number of system spins N");
  sub->add_option("--omega-tau", f.omega_tau, "omega tau, decimal or e.g. 2pi/3");
  sub->add_option("--g-tau", f.g_tau, "g tau");
  sub->add_option("--p", f.p, "resonance numerator p");
  sub->add_option("--q", f.q, "resonance order q");
  sub->add_option("--out", f.out, "output root directory");
  sub->add_option("--threads", f.threads, "worker threads (default: CSPIN_THREADS or hardware)");
  sub->add_flag("--dense", f.dense, "full eigendecomposition instead of the matrix-free solver");
  sub->add_option("--leading-modes", f.leading_modes, "eigenpairs kept by the matrix-free solver");
  sub->add_option("--mm-negativity", f.mm_negativity, "allowed negative weight in the manifold projection");
  sub->add_option("--match-tol", f.match_tol, "right/left Ritz value pairing tolerance");
  sub->add_option("--cluster-tol", f.cluster_tol, "eigenvalue clustering tolerance");
}

void add_grid(CLI::App* sub, Flags& f) {
  sub->add_option("--g-min", f.g_min);
  sub->add_option("--g-max", f.g_max);
  sub->add_option("--n-g", f.n_g);
  sub->add_option("--omega-min", f.omega_min, "decimal or fraction of pi");
  sub->add_option("--omega-max", f.omega_max, "decimal or fraction of pi");
  sub->add_option("--n-omega", f.n_omega);
}

void add_dynamics(CLI::App* sub, Flags& f) {
  sub->add_option("--steps", f.steps, "number of periods");
  sub->add_option("--stride", f.stride, "record every stride-th period");
  sub->add_option("--initial-state", f.initial_state, "up, down, or theta,phi");
}

void add_husimi_grid(CLI::App* sub, Flags& f) {
  sub->add_option("--husimi-theta", f.husimi_theta, "Husimi grid points in theta");
  sub->add_option("--husimi-phi", f.husimi_phi, "Husimi grid points in phi");
}

RunConfig resolve(const std::string& sub, const Flags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
  c.subcommand = sub;
  if (f.n_spins) c.params.n_spins = *f.n_spins;
  if (f.omega_tau) c.params.omega_tau = parse_angle(*f.omega_tau);
  if (f.g_tau) c.params.g_tau = *f.g_tau;
  if (f.p) c.p = *f.p;
  if (f.q) c.q = *f.q;
  if (f.out) c.out = *f.out;
  if (f.threads) c.threads = *f.threads;
  if (f.dense) c.dense = true;
  if (f.leading_modes) c.leading_modes = *f.leading_modes;
  if (f.steps) c.steps = *f.steps;
  if (f.stride) c.stride = *f.stride;
  if (f.burn_in) c.burn_in = *f.burn_in;
  if (f.initial_state) c.initial_state = *f.initial_state;
  if (f.g_min) c.grid.g_min = *f.g_min;
  if (f.g_max) c.grid.g_max = *f.g_max;
  if (f.n_g) c.grid.n_g = *f.n_g;
  if (f.omega_min) c.grid.omega_min = parse_angle(*f.omega_min);
  if (f.omega_max) c.grid.omega_max = parse_angle(*f.omega_max);
  if (f.n_omega) c.grid.n_omega = *f.n_omega;
  if (f.n_list) c.n_list = parse_list<int>(*f.n_list, "--n-list");
  if (f.g_list) c.g_list = parse_list<double>(*f.g_list, "--g-list");
  if (f.husimi_theta) c.husimi_theta = *f.husimi_theta;
  if (f.husimi_phi) c.husimi_phi = *f.husimi_phi;
  if (f.figure) c.figure = *f.figure;
  if (f.scale) c.scale = *f.scale;
  if (f.mm_negativity) c.tolerances.mm_negativity = *f.mm_negativity;
  if (f.match_tol) c.tolerances.match_tol = *f.match_tol;
  if (f.cluster_tol) c.tolerances.cluster_tol = *f.cluster_tol;
  c.validate();
  return c;
}

SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions s;
  s.threads = c.threads;
  s.dense = c.dense;
  s.leading_modes = c.leading_modes;
  return s;
}

SweepGrid sweep_grid(const RunConfig& c) {
  SweepGrid g;
  g.n_spins = c.params.n_spins;
  g.p = c.p;
  g.q = c.q;
  g.g_tau = c.grid.n_g == 1 ? std::vector<double>{c.grid.g_min} : linspace(c.grid.g_min, c.grid.g_max, c.grid.n_g);
  g.omega_tau = c.grid.n_omega == 1 ? std::vector<double>{c.grid.omega_min}
                                    : linspace(c.grid.omega_min, c.grid.omega_max, c.grid.n_omega);
  return g;
}

ChannelSpectrum point_spectrum(const ResetChannel& ch, const RunConfig& c, int k, bool lefts = true) {
  if (c.dense || ch.dim() * ch.dim() <= k + 6) {
    DecomposeOptions d;
    d.cluster_tol = c.tolerances.cluster_tol;
    d.pinv_cutoff = c.tolerances.pinv_cutoff;
    d.strict = false;
    d.vectors = true;
    return decompose(build_superoperator(ch), d);
  }
  ArnoldiOptions a;
  a.match_tol = c.tolerances.match_tol;
  a.lefts = lefts;
  return leading_eigs_matrix_free(ch, 1, k, a);
}

HusimiGridSpec husimi_spec(const RunConfig& c) { return {c.husimi_theta, c.husimi_phi}; }

std::vector<std::string> grid_summary_errors(const SweepResult& r) {
  std::vector<std::string> errors;
  for (const auto& rec : r.records) {
    if (!rec.error.empty()) {
      errors.push_back("N=" + std::to_string(rec.n_spins) + " g=" + io::format_double(rec.g_tau) +
                       " omega=" + io::format_double(rec.omega_tau) + ": " + rec.error);
    }
  }
  return errors;
}

void note_sweep(io::Manifest& m, const SweepResult& r) {
  m.set_timing("sweep", r.seconds);
  const auto errors = grid_summary_errors(r);
  m.params()["threads_used"] = r.threads;
  m.params()["failed_points"] = errors;
}

// Executes one subcommand and returns the manifest document.
json execute(const RunConfig& c, const Flags& f) {
  if (c.subcommand == "reproduce-figure") {
    FigureOptions fo;
    fo.scale = c.scale;
    fo.threads = c.threads;
    fo.dense = c.dense;
    fo.tolerances = c.tolerances;
    fo.husimi = husimi_spec(c);
    if (c.figure.empty()) throw Error(ErrorKind::InvalidArgument, "reproduce-figure needs a figure id");
    return reproduce_figure(c.figure, c.out, fo);
  }

  const Timer timer;
  json params = to_json(c);
  io::Manifest m(fs::path(c.out) / c.subcommand, c.subcommand, params);
  m.add_json("config.json", params, "run_config");
  const std::string& s = c.subcommand;

  if (s == "trajectory") {
    const SpinSector sector(c.params.n_spins);
    const auto rows = trajectory(c.params, make_initial_state(sector, c.initial_state), c.steps, c.stride);
    m.add_csv("trajectory.csv", io::trajectory_table(rows));
  } else if (s == "spectrum") {
    const ResetChannel ch(c.params);
    const int k = std::max(4, f.modes);
    const ChannelSpectrum sp = point_spectrum(ch, c, k, f.dump);
    json doc = io::spectrum_json(sp, c.params, k);
    const LeadingRates lr = leading_rate_and_gap(sp);
    doc["leading"] = {{"gamma_1", lr.gamma_1}, {"nu_1", lr.nu_1}, {"index_1", lr.index_1},
                      {"gamma_star", lr.gamma_star}, {"index_star", lr.index_star}, {"ratio", lr.ratio}};
    const StroboscopicRates sr = stroboscopic_rates(sp, c.p, c.q);
    json gam = json::array(), del = json::array();
    for (Index j = 0; j < static_cast<Index>(sr.Gamma.size()) && j < k; ++j) {
      gam.push_back(sr.Gamma[j]);
      del.push_back(sr.delta[j]);
    }
    doc["stroboscopic"] = {{"p", c.p}, {"q", c.q}, {"Gamma", gam}, {"delta", del}};
    m.add_json("spectrum.json", doc, "spectrum");
    if (f.dump) {
      for (const auto& p : io::write_eigenmatrices(m.dir() / "eigenmatrices", sp, k)) {
        m.add_file(p.filename().string(), p.extension() == ".json" ? "eigenmatrix_sidecar" : "eigenmatrix_binary");
      }
    }
  } else if (s == "purity-map") {
    const SweepResult r = purity_map(sweep_grid(c), sweep_options(c));
    m.add_csv("purity_map.csv", io::purity_table(r));
    note_sweep(m, r);
  } else if (s == "gap-map") {
    const SweepResult r = gap_maps(sweep_grid(c), sweep_options(c));
    m.add_csv("gap_map.csv", io::gap_table(r));
    note_sweep(m, r);
  } else if (s == "frequency-cut") {
    const SweepGrid g = sweep_grid(c);
    const SweepResult r = frequency_cut(c.params.n_spins, c.params.g_tau, g.omega_tau, sweep_options(c));
    m.add_csv("frequency_cut.csv", io::frequency_cut_table(r));
    note_sweep(m, r);
  } else if (s == "size-scan") {
    const std::vector<int> ns = c.n_list.empty() ? std::vector<int>{10, 14, 18, 22, 26, 30} : c.n_list;
    const std::vector<double> gs = c.g_list.empty() ? std::vector<double>{c.params.g_tau} : c.g_list;
    const SweepResult r = size_scan(ns, c.p, c.q, gs, sweep_options(c));
    m.add_csv("size_scan.csv", io::size_scan_table(r));
    note_sweep(m, r);
  } else if (s == "metastable") {
    const ResetChannel ch(c.params);
    const ChannelSpectrum sp = point_spectrum(ch, c, c.leading_modes);
    MetastableManifold mf;
    if (c.q == 3) {
      mf = analyze_period3(ch, sp);
    } else if (c.q == 5) {
      mf = extract_ems5(sp, {}, &ch);
    } else {
      throw Error(ErrorKind::InvalidArgument, "metastable supports q = 3 or q = 5");
    }
    m.add_json("manifold.json", io::manifold_json(mf), "manifold");
    for (int j = 0; j < mf.q; ++j) {
      const std::string idx = std::to_string(j + 1);
      m.add_csv("husimi_mu" + idx + ".csv", io::husimi_table(husimi_q(mf.mus[j] / double(mf.q), husimi_spec(c))));
      m.add_csv("husimi_P" + idx + ".csv", io::husimi_table(husimi_q(mf.projectors[j], husimi_spec(c))));
    }
  } else if (s == "classical-compare") {
    const ResetChannel ch(c.params);
    const ChannelSpectrum sp = point_spectrum(ch, c, c.leading_modes);
    const MetastableManifold mf = analyze_period3(ch, sp);
    const Matrix rho0 = make_initial_state(ch.sector(), c.initial_state);
    mm_project(mf, rho0, c.tolerances.mm_negativity);
    const ComparisonReport rep = compare_to_exact(ch, sp, mf, rho0, c.steps, c.burn_in, c.stride);
    m.add_csv("classical.csv", io::classical_table(rep));
    const ClassicalProcess proc = build_process(std::max(0.0, mf.Gamma[0]), mf.delta[0]);
    m.add_json("report.json",
               {{"burn_in", rep.burn_in},
                {"valid", rep.valid},
                {"warning", rep.warning},
                {"Gamma_1", mf.Gamma[0]},
                {"delta_1", mf.delta[0]},
                {"stationary_current", stationary_current(proc)},
                {"max_dev",
                 {{"classical_jz", rep.max_dev_classical_jz},
                  {"classical_jy", rep.max_dev_classical_jy},
                  {"mm_jz", rep.max_dev_mm_jz},
                  {"mm_jy", rep.max_dev_mm_jy}}},
                {"manifold", io::manifold_json(mf)}},
               "classical_report");
  } else if (s == "husimi") {
    const ResetChannel ch(c.params);
    Matrix op;
    if (f.target == "stationary") {
      op = ch.dim() * ch.dim() <= 4000 || c.dense ? stationary_state_direct(ch)
                                                  : stationary_state(point_spectrum(ch, c, c.leading_modes, false));
    } else if (f.target == "initial") {
      op = make_initial_state(ch.sector(), c.initial_state);
    } else {
      throw Error(ErrorKind::InvalidArgument, "--target must be 'stationary' or 'initial'");
    }
    const HusimiGrid grid = husimi_q(op, husimi_spec(c));
    m.add_csv("husimi.csv", io::husimi_table(grid));
    m.params()["lobes"] = count_lobes(grid, c.tolerances.lobe_fraction);
    m.params()["purity"] = purity(op);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown subcommand '" + s + "'");
  }
  m.set_timing("total", timer.seconds());
  m.write();
  return m.to_json();
}

json error_json(std::string_view kind, const std::string& message, int code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodically reset central spin model: spectra, metastable manifolds, sweeps and figure data",
               "cspin"};
  app.require_subcommand(1, 1);
  app.footer("Environment: CSPIN_THREADS sets the default worker count.");
  Flags f;

  std::map<std::string, CLI::App*> subs;
  subs["trajectory"] = app.add_subcommand("trajectory", "stroboscopic <Jz>/N, <Jy>/N and central spin <sigma_z>");
  subs["spectrum"] = app.add_subcommand("spectrum", "leading eigenvalues, rates and frequencies of the channel");
  subs["purity-map"] = app.add_subcommand("purity-map", "stationary purity over a (g, omega) grid");
  subs["gap-map"] = app.add_subcommand("gap-map", "Gamma_*/Gamma_1 and Gamma_1/|delta_1| over a (g, omega) grid");
  subs["frequency-cut"] = app.add_subcommand("frequency-cut", "gamma_1, nu_1 and gap ratio along omega");
  subs["size-scan"] = app.add_subcommand("size-scan", "dominant oscillating decay rate against N at omega = pi p/q");
  subs["metastable"] = app.add_subcommand("metastable", "metastable lobes, projectors and diagnostics (q = 3 or 5)");
  subs["classical-compare"] =
      app.add_subcommand("classical-compare", "exact dynamics against manifold projection and classical process");
  subs["husimi"] = app.add_subcommand("husimi", "Husimi Q function of the stationary or initial state");
  std::string figure_help = "figure data with manifest; ids:";
  for (const auto& info : figure_catalog()) figure_help += " " + info.id;
  subs["reproduce-figure"] = app.add_subcommand("reproduce-figure", figure_help);

  for (auto& [name, sub] : subs) add_common(sub, f);
  add_dynamics(subs["trajectory"], f);
  add_dynamics(subs["classical-compare"], f);
  subs["classical-compare"]->add_option("--burn-in", f.burn_in, "stroboscopic steps excluded from the deviations");
  subs["spectrum"]->add_option("--modes", f.modes, "number of eigenpairs reported");
  subs["spectrum"]->add_flag("--dump-eigenmatrices", f.dump, "write binary eigenmatrices with a JSON sidecar");
  for (const char* s : {"purity-map", "gap-map", "frequency-cut"}) add_grid(subs[s], f);
  subs["size-scan"]->add_option("--n-list", f.n_list, "comma separated N values");
  subs["size-scan"]->add_option("--g-list", f.g_list, "comma separated g tau values");
  for (const char* s : {"metastable", "husimi", "reproduce-figure"}) add_husimi_grid(subs[s], f);
  subs["husimi"]->add_option("--target", f.target, "stationary or initial");
  subs["husimi"]->add_option("--initial-state", f.initial_state, "up, down, or theta,phi");
  subs["reproduce-figure"]->add_option("figure", f.figure, "figure id")->required();
  subs["reproduce-figure"]->add_option("--scale", f.scale, "quick or default");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::string sub_name;
  for (auto& [name, sub] : subs) {
    if (sub->parsed()) sub_name = name;
  }

  RunConfig config;
  try {
    config = resolve(sub_name, f);
    if (sub_name == "reproduce-figure" && !is_figure_id(config.figure)) {
      throw Error(ErrorKind::InvalidArgument, "unknown figure id '" + config.figure + "'");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n\n" << subs[sub_name]->help();
    out << error_json(to_string(e.kind()), e.what(), kExitUsage).dump() << '\n';
    return kExitUsage;
  }

  try {
    const json manifest = execute(config, f);
    const fs::path dir = sub_name == "reproduce-figure" ? fs::path(config.out) / config.figure
                                                        : fs::path(config.out) / sub_name;
    out << json{{"status", "ok"}, {"manifest", (dir / "manifest.json").string()}, {"files", manifest["files"].size()}}
               .dump()
        << '\n';
    return kExitOk;
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::InvalidArgument ? kExitUsage : kExitNumerical;
    out << error_json(to_string(e.kind()), e.what(), code).dump() << '\n';
    return code;
  } catch (const std::exception& e) {
    out << error_json("Internal", e.what(), kExitNumerical).dump() << '\n';
    return kExitNumerical;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace cspin::cli
