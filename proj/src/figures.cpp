#include "cspin/figures.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cspin/classical.hpp"
#include "cspin/error.hpp"
#include "cspin/metastable.hpp"
#include "cspin/spectra.hpp"
#include "cspin/sweep.hpp"

namespace cspin {

namespace {

using io::json;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
  const FigureOptions& opt;
  bool quick;

  SweepOptions sweep() const {
    SweepOptions s;
    s.threads = opt.threads;
    s.dense = opt.dense;
    return s;
  }
  HusimiGridSpec husimi() const { return quick ? HusimiGridSpec{21, 41} : opt.husimi; }
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Leading modes of E^q with left eigenmatrices, dense on request.
ChannelSpectrum point_spectrum(const ResetChannel& ch, const Context& ctx, int k = 10) {
  if (ctx.opt.dense || ch.dim() * ch.dim() <= k + 6) {
    DecomposeOptions d;
    d.cluster_tol = ctx.opt.tolerances.cluster_tol;
    d.pinv_cutoff = ctx.opt.tolerances.pinv_cutoff;
    d.strict = false;
    return decompose(build_superoperator(ch), d);
  }
  ArnoldiOptions a;
  a.match_tol = ctx.opt.tolerances.match_tol;
  return leading_eigs_matrix_free(ch, 1, k, a);
}

Matrix up_state(const ResetChannel& ch) { return make_initial_state(ch.sector(), "up"); }

json markers_json() {
  return json::array({{{"label", "d"}, {"g_tau", 0.25}, {"omega_tau", 0.1}},
                      {{"label", "e"}, {"g_tau", 0.3}, {"omega_tau", 0.5}},
                      {{"label", "f"}, {"g_tau", 0.2}, {"omega_tau", 2.0 * kPi / 3.0}}});
}

json resonances_json() {
  return json::array({{{"p", 2}, {"q", 5}, {"omega_tau", 2.0 * kPi / 5.0}},
                      {{"p", 2}, {"q", 3}, {"omega_tau", 2.0 * kPi / 3.0}},
                      {{"p", 4}, {"q", 5}, {"omega_tau", 4.0 * kPi / 5.0}}});
}

json grid_json(const SweepGrid& g) {
  return {{"n_spins", g.n_spins},
          {"g_tau", {{"min", g.g_tau.front()}, {"max", g.g_tau.back()}, {"count", g.g_tau.size()}}},
          {"omega_tau", {{"min", g.omega_tau.front()}, {"max", g.omega_tau.back()}, {"count", g.omega_tau.size()}}}};
}

void add_husimi(io::Manifest& m, const std::string& name, const Matrix& op, const Context& ctx) {
  m.add_csv(name, io::husimi_table(husimi_q(op, ctx.husimi())));
}

// Fig. 1(b): central spin and collective magnetization below and at the (2,3) resonance.
void fig1b(io::Manifest& m, const Context& ctx, json& params) {
  const int n = 30;
  const double g = 0.2;
  const long steps = ctx.quick ? 60 : 3000;
  params = {{"n_spins", n}, {"g_tau", g}, {"steps", steps}, {"initial_state", "|J,J>"},
            {"upper", {{"omega_tau", 1.5}}}, {"lower", {{"omega_tau", 2.0 * kPi / 3.0}}}};
  const SpinSector sector(n);
  const Matrix rho0 = make_initial_state(sector, "up");
  m.add_csv("upper_trajectory.csv", io::trajectory_table(trajectory({n, 1.5, g}, rho0, steps)));
  m.add_csv("lower_trajectory.csv", io::trajectory_table(trajectory({n, 2.0 * kPi / 3.0, g}, rho0, steps)));
}

// Fig. 2(a): stationary purity over (g, omega).
void fig2a(io::Manifest& m, const Context& ctx, json& params) {
  SweepGrid grid;
  grid.n_spins = ctx.quick ? 8 : 30;
  grid.g_tau = linspace(0.02, 0.4, ctx.quick ? 3 : 60);
  grid.omega_tau = linspace(0.02, kPi, ctx.quick ? 4 : 120);
  const SweepResult r = purity_map(grid, ctx.sweep());
  params = grid_json(grid);
  params["markers"] = markers_json();
  params["resonances"] = resonances_json();
  m.add_csv("purity_map.csv", io::purity_table(r));
  m.set_timing("sweep", r.seconds);
}

// Fig. 2(b): relaxation fan of <Jz>/N along omega at g = 0.2.
void fig2b(io::Manifest& m, const Context& ctx, json& params) {
  const int n = ctx.quick ? 8 : 30;
  const double g = 0.2;
  const long steps = ctx.quick ? 20 : 1500;
  const std::vector<double> omegas = linspace(0.02, kPi, ctx.quick ? 5 : 200);
  const RealMatrix fan = relaxation_fan(n, g, omegas, make_initial_state(SpinSector(n), "up"), steps, ctx.sweep());
  params = {{"n_spins", n}, {"g_tau", g}, {"steps", steps}, {"initial_state", "|J,J>"},
            {"omega_tau", {{"min", omegas.front()}, {"max", omegas.back()}, {"count", omegas.size()}}},
            {"resonances", resonances_json()}};
  m.add_csv("fan.csv", io::fan_table(omegas, fan));
}

// Fig. 2(c): gamma_1, gamma_*/gamma_1 and nu_1 along omega at g = 0.2.
void fig2c(io::Manifest& m, const Context& ctx, json& params) {
  const int n = ctx.quick ? 8 : 30;
  const double g = 0.2;
  const std::vector<double> omegas = linspace(0.05, kPi, ctx.quick ? 6 : 400);
  const SweepResult r = frequency_cut(n, g, omegas, ctx.sweep());
  params = {{"n_spins", n}, {"g_tau", g},
            {"omega_tau", {{"min", omegas.front()}, {"max", omegas.back()}, {"count", omegas.size()}}},
            {"reference_nu1_tau", 2.0 * kPi / 3.0}};
  m.add_csv("frequency_cut.csv", io::frequency_cut_table(r));
  m.set_timing("sweep", r.seconds);
}

// Fig. 2(d)-(f): Husimi functions of the stationary state at the three markers.
void fig2def(io::Manifest& m, const Context& ctx, json& params) {
  const int n = ctx.quick ? 8 : 30;
  params = {{"n_spins", n}, {"markers", markers_json()}};
  for (const auto& mk : markers_json()) {
    const ResetChannel ch({n, mk["omega_tau"].get<double>(), mk["g_tau"].get<double>()});
    const Matrix rho = stationary_state_direct(ch);
    add_husimi(m, "husimi_" + mk["label"].get<std::string>() + ".csv", rho, ctx);
  }
}

// Fig. 3(a,b): time-scale separation and detuning ratio of the period-tripled map.
void fig3ab(io::Manifest& m, const Context& ctx, json& params) {
  SweepGrid grid;
  grid.n_spins = ctx.quick ? 8 : 30;
  grid.p = 2;
  grid.q = 3;
  grid.g_tau = linspace(0.05, 0.4, ctx.quick ? 3 : 40);
  grid.omega_tau = linspace(1.7, 2.5, ctx.quick ? 4 : 80);
  const SweepResult r = gap_maps(grid, ctx.sweep());
  params = grid_json(grid);
  params["p"] = grid.p;
  params["q"] = grid.q;
  params["mask_threshold"] = std::sqrt(3.0);
  m.add_csv("gap_map.csv", io::gap_table(r));
  m.set_timing("sweep", r.seconds);
}

// Fig. 3(c,d) with the plateau inset.
void fig3cd(io::Manifest& m, const Context& ctx, json& params) {
  const int n = 30;
  const double g = 0.25, w = 2.0 * kPi / 3.0;
  const ResetChannel ch({n, w, g});
  const ChannelSpectrum sp = point_spectrum(ch, ctx);
  const MetastableManifold mf = analyze_period3(ch, sp);
  const Matrix rho0 = up_state(ch);
  const long horizon = ctx.quick ? 200 : 300000;  // stroboscopic steps of 3 tau
  const long stride = ctx.quick ? 1 : 50;
  const ComparisonReport rep = compare_to_exact(ch, sp, mf, rho0, horizon, 10, stride);
  m.add_csv("classical_compare.csv", io::classical_table(rep));

  const PlateauWindow win = plateau_window(mf);
  const long zoom_to = win.begin + 60;
  const DynamicsReport dyn = compare_manifold_dynamics(ch, sp, mf, rho0, zoom_to, win.begin, win.begin, zoom_to,
                                                       std::numeric_limits<long>::max(), win.begin, zoom_to,
                                                       ctx.opt.tolerances.mm_negativity);
  io::Table inset{io::schema::plateau(), {}};
  for (const auto& row : dyn.rows) {
    if (row.n < win.begin) continue;
    inset.add({static_cast<double>(row.n), row.jz_exact, row.jz_mixture, row.jy_exact, row.jy_mixture});
  }
  m.add_csv("plateau.csv", inset);
  m.add_json("manifold.json", io::manifold_json(mf), "manifold");

  params = {{"n_spins", n},
            {"g_tau", g},
            {"omega_tau", w},
            {"initial_state", "|J,J>"},
            {"horizon_strobe_steps", horizon},
            {"stride", stride},
            {"burn_in", rep.burn_in},
            {"plateau_window", {win.begin, win.end}},
            {"classical_valid", rep.valid},
            {"max_dev",
             {{"classical_jz", rep.max_dev_classical_jz},
              {"classical_jy", rep.max_dev_classical_jy},
              {"mm_jz", rep.max_dev_mm_jz},
              {"mm_jy", rep.max_dev_mm_jy}}}};
}

// Fig. 3(e)-(j): lobes mu_j/3 and projectors P_j.
void fig3ej(io::Manifest& m, const Context& ctx, json& params) {
  const int n = 30;
  const double g = 0.25, w = 2.0 * kPi / 3.0;
  const ResetChannel ch({n, w, g});
  const MetastableManifold mf = analyze_period3(ch, point_spectrum(ch, ctx));
  for (int j = 0; j < 3; ++j) add_husimi(m, "husimi_mu" + std::to_string(j + 1) + ".csv", mf.mus[j] / 3.0, ctx);
  for (int j = 0; j < 3; ++j) add_husimi(m, "husimi_P" + std::to_string(j + 1) + ".csv", mf.projectors[j], ctx);
  m.add_json("manifold.json", io::manifold_json(mf), "manifold");
  params = {{"n_spins", n}, {"g_tau", g}, {"omega_tau", w}};
}

// Fig. S1: accuracy of the period-3 decomposition over the resonance.
void figS1(io::Manifest& m, const Context& ctx, json& params) {
  SweepGrid grid;
  grid.n_spins = 30;
  grid.g_tau = ctx.quick ? std::vector<double>{0.24, 0.25} : linspace(0.1, 0.4, 30);
  grid.omega_tau = ctx.quick ? std::vector<double>{2.08, 2.0943951023931953} : linspace(1.9, 2.3, 40);
  grid.validate();
  const std::size_t ng = grid.g_tau.size(), nw = grid.omega_tau.size();
  std::vector<std::array<double, 4>> vals(ng * nw, {kNaN, kNaN, kNaN, kNaN});
  const Stopwatch sw;
  parallel_for(ng * nw, resolve_threads(ctx.opt.threads), [&](std::size_t i) {
    try {
      const ResetChannel ch({grid.n_spins, grid.omega_tau[i % nw], grid.g_tau[i / nw]});
      const ChannelSpectrum sp = point_spectrum(ch, ctx);
      const MetastableManifold mf = analyze_period3(ch, sp);
      const auto& d = mf.diagnostics;
      vals[i] = {d.d_ss, d.cyclic.at(0), d.lambda_n, d.delta_r};
    } catch (const Error&) {
      // Outside the complex-leading-mode region the entry stays NaN.
    }
  });
  io::Table t{io::schema::diagnostics_map(), {}};
  for (std::size_t i = 0; i < vals.size(); ++i) {
    t.add({grid.g_tau[i / nw], grid.omega_tau[i % nw], vals[i][0], vals[i][1], vals[i][2], vals[i][3]});
  }
  m.add_csv("diagnostics_map.csv", t);
  m.set_timing("sweep", sw.seconds());
  params = grid_json(grid);
  params["d_cyc"] = "T(E mu_1, mu_2)";
}

// Fig. S2: period-5 lobes and projectors, with the N = 70 fan and stationary state.
void figS2(io::Manifest& m, const Context& ctx, json& params) {
  const int n = 70;
  const double g = 0.18, w = 4.0 * kPi / 5.0;
  const ResetChannel ch({n, w, g});
  const ChannelSpectrum sp = point_spectrum(ch, ctx);
  const MetastableManifold mf = extract_ems5(sp, {}, &ch);
  for (int j = 0; j < 5; ++j) add_husimi(m, "husimi_mu" + std::to_string(j + 1) + ".csv", mf.mus[j] / 5.0, ctx);
  for (int j = 0; j < 5; ++j) add_husimi(m, "husimi_P" + std::to_string(j + 1) + ".csv", mf.projectors[j], ctx);
  add_husimi(m, "husimi_rho_ss.csv", mf.rho_ss, ctx);
  m.add_json("manifold.json", io::manifold_json(mf), "manifold");
  m.add_json("spectrum.json", io::spectrum_json(sp, ch.params()), "spectrum");

  const long steps = ctx.quick ? 10 : 400;
  const std::vector<double> omegas = linspace(0.02, kPi, ctx.quick ? 3 : 150);
  const RealMatrix fan = relaxation_fan(n, g, omegas, up_state(ch), steps, ctx.sweep());
  m.add_csv("fan.csv", io::fan_table(omegas, fan));

  params = {{"n_spins", n}, {"g_tau", g}, {"omega_tau", w}, {"fan_steps", steps},
            {"fan_omega_tau", {{"min", omegas.front()}, {"max", omegas.back()}, {"count", omegas.size()}}},
            {"resonances", resonances_json()}};
}

// Fig. S3: period-5 dynamics, exact against projection and mixture.
void figS3(io::Manifest& m, const Context& ctx, json& params) {
  const int n = 70;
  const double g = 0.18, w = 4.0 * kPi / 5.0;
  const ResetChannel ch({n, w, g});
  const ChannelSpectrum sp = point_spectrum(ch, ctx);
  const MetastableManifold mf = extract_ems5(sp, {}, &ch);
  const PlateauWindow win = plateau_window(mf, 1.0, 0.1);
  const long n_max = ctx.quick ? 200 : 40000;
  const long stride = ctx.quick ? 5 : 20;
  const long zoom_from = ctx.quick ? 100 : win.begin;
  const long zoom_to = zoom_from + 50;
  const DynamicsReport dyn = compare_manifold_dynamics(ch, sp, mf, up_state(ch), n_max, 100, win.begin, win.end,
                                                       stride, zoom_from, zoom_to, ctx.opt.tolerances.mm_negativity);
  io::Table strobe{io::schema::period5_dynamics(), {}};
  io::Table zoom{io::schema::period5_dynamics(), {}};
  for (const auto& r : dyn.rows) {
    const std::vector<double> row{static_cast<double>(r.n), r.jz_exact, r.jz_mm, r.jz_mixture,
                                  r.jy_exact, r.jy_mm, r.jy_mixture};
    if (r.n % stride == 0 && r.n % 5 == 0) strobe.add(row);
    if (r.n >= zoom_from && r.n <= zoom_to) zoom.add(row);
  }
  m.add_csv("dynamics.csv", strobe);
  m.add_csv("zoom.csv", zoom);
  m.add_json("manifold.json", io::manifold_json(mf), "manifold");
  params = {{"n_spins", n},
            {"g_tau", g},
            {"omega_tau", w},
            {"initial_state", "|J,J>"},
            {"n_max", n_max},
            {"stride", stride},
            {"zoom", {zoom_from, zoom_to}},
            {"plateau_window", {win.begin, win.end}},
            {"p0", dyn.p0},
            {"max_dev",
             {{"mm_jz", dyn.max_dev_mm_jz},
              {"mm_jy", dyn.max_dev_mm_jy},
              {"mixture_jz", dyn.max_dev_mixture_jz},
              {"mixture_jy", dyn.max_dev_mixture_jy}}}};
}

// Fig. S4: decay rate of the dominant oscillating mode against N.
void figS4(io::Manifest& m, const Context& ctx, json& params) {
  std::vector<int> ns;
  if (ctx.quick) {
    ns = {4, 6, 8};
  } else {
    for (int k = 10; k <= 70; k += 4) ns.push_back(k);
  }
  const std::vector<double> gs{0.15, 0.2};
  const std::array<std::pair<int, int>, 3> pqs{{{2, 5}, {2, 3}, {4, 5}}};
  double seconds = 0.0;
  json panels = json::array();
  for (const auto& [p, q] : pqs) {
    const SweepResult r = size_scan(ns, p, q, gs, ctx.sweep());
    seconds += r.seconds;
    const std::string name = "size_scan_" + std::to_string(p) + "_" + std::to_string(q) + ".csv";
    m.add_csv(name, io::size_scan_table(r));
    panels.push_back({{"file", name}, {"p", p}, {"q", q}, {"omega_tau", kPi * p / q}});
  }
  m.set_timing("sweep", seconds);
  params = {{"n_spins", ns}, {"g_tau", gs}, {"panels", panels}};
}

// Fig. S5: purity maps for several N.
void figS5(io::Manifest& m, const Context& ctx, json& params) {
  const std::vector<int> ns = ctx.quick ? std::vector<int>{4, 6} : std::vector<int>{10, 30, 50, 70};
  json panels = json::array();
  for (int n : ns) {
    SweepGrid grid;
    grid.n_spins = n;
    grid.g_tau = linspace(0.02, 0.4, ctx.quick ? 2 : 20);
    grid.omega_tau = linspace(0.02, kPi, ctx.quick ? 3 : 40);
    const SweepResult r = purity_map(grid, ctx.sweep());
    const std::string name = "purity_map_N" + std::to_string(n) + ".csv";
    m.add_csv(name, io::purity_table(r));
    m.set_timing("sweep_N" + std::to_string(n), r.seconds);
    json panel = grid_json(grid);
    panel["file"] = name;
    panels.push_back(panel);
  }
  params = {{"panels", panels}};
}

using Driver = void (*)(io::Manifest&, const Context&, json&);

struct Entry {
  FigureInfo info;
  Driver driver;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> all = {
      {{"fig1b", "central spin and system magnetization at omega tau = 1.5 and 2pi/3"}, fig1b},
      {{"fig2a", "stationary purity map, N = 30"}, fig2a},
      {{"fig2b", "relaxation fan of <Jz>/N along omega at g tau = 0.2"}, fig2b},
      {{"fig2c", "gamma_1, gap ratio and nu_1 along omega at g tau = 0.2"}, fig2c},
      {{"fig2def", "Husimi functions of the stationary state at the three markers"}, fig2def},
      {{"fig3ab", "Gamma_*/Gamma_1 and Gamma_1/|delta_1| maps around the (2,3) resonance"}, fig3ab},
      {{"fig3cd", "exact, projected and classical dynamics with the plateau inset"}, fig3cd},
      {{"fig3ej", "Husimi functions of mu_j/3 and P_j"}, fig3ej},
      {{"figS1", "accuracy maps of the period-3 decomposition"}, figS1},
      {{"figS2", "period-5 lobes and projectors, N = 70 fan and stationary state"}, figS2},
      {{"figS3", "period-5 dynamics: exact, projection and mixture"}, figS3},
      {{"figS4", "size scans of the dominant oscillating rate"}, figS4},
      {{"figS5", "purity maps for N = 10, 30, 50, 70"}, figS5},
  };
  return all;
}

}  // namespace

const std::vector<FigureInfo>& figure_catalog() {
  static const std::vector<FigureInfo> infos = [] {
    std::vector<FigureInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

bool is_figure_id(const std::string& id) {
  for (const auto& e : registry()) {
    if (e.info.id == id) return true;
  }
  return false;
}

json reproduce_figure(const std::string& id, const fs::path& out_root, const FigureOptions& options) {
  const Entry* entry = nullptr;
  for (const auto& e : registry()) {
    if (e.info.id == id) entry = &e;
  }
  if (!entry) {
    std::ostringstream msg;
    msg << "unknown figure id '" << id << "'; known:";
    for (const auto& e : registry()) msg << ' ' << e.info.id;
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  if (options.scale != "quick" && options.scale != "default") {
    throw Error(ErrorKind::InvalidArgument, "scale must be 'quick' or 'default'");
  }
  const Context ctx{options, options.scale == "quick"};
  io::Manifest manifest(out_root / id, id, json::object());
  json params;
  const Stopwatch sw;
  entry->driver(manifest, ctx, params);
  params["scale"] = options.scale;
  params["threads"] = resolve_threads(options.threads);
  params["dense"] = options.dense;
  manifest.set_params(std::move(params));
  manifest.set_timing("total", sw.seconds());
  manifest.write();
  return manifest.to_json();
}

}  // namespace cspin
