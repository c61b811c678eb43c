#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <numbers>
#include <sstream>

#include "cspin/cli.hpp"
#include "cspin/figures.hpp"
#include "cspin/io.hpp"

using namespace cspin;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("cspin_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"bogus"}).code == cli::kExitUsage);
  CHECK(run_cli({"spectrum", "--n-spins", "abc"}).code == cli::kExitUsage);

  const Outcome bad = run_cli({"spectrum", "--n-spins", "0", "--out", scratch_dir("usage").string()});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.doc()["error"]["kind"] == "invalid_argument");
  CHECK(bad.doc()["error"]["exit_code"] == 2);

  CHECK(run_cli({"spectrum", "--omega-tau", "2pi/"}).code == cli::kExitUsage);
  CHECK(run_cli({"reproduce-figure", "fig99"}).code == cli::kExitUsage);
  CHECK(run_cli({"spectrum", "--config", "/nonexistent/config.json"}).code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("numerical failures exit with 1") {
  const fs::path dir = scratch_dir("numerical");
  const Outcome r =
      run_cli({"metastable", "--n-spins", "8", "--omega-tau", "1.2", "--g-tau", "0.2", "--q", "3", "--out", dir.string()});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.doc()["error"]["kind"] == "matching_failed");
  fs::remove_all(dir);
}

TEST_CASE("spectrum subcommand at the (2,3) resonance") {
  const fs::path dir = scratch_dir("spectrum");
  const Outcome r = run_cli({"spectrum", "--n-spins", "30", "--omega-tau", "2pi/3", "--g-tau", "0.2", "--modes", "6",
                             "--dump-eigenmatrices", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.doc()["status"] == "ok");
  const json sp = io::read_json(dir / "spectrum" / "spectrum.json");
  CHECK(std::abs(sp["leading"]["nu_1"].get<double>() - 2.0 * std::numbers::pi / 3.0) < 1e-3);
  CHECK(sp["leading"]["ratio"].get<double>() > 100.0);
  CHECK(sp["eigenvalues"].size() == 6);
  CHECK(fs::exists(dir / "spectrum" / "eigenmatrices_right.bin"));
  CHECK(io::read_json(dir / "spectrum" / "config.json")["n_spins"] == 30);
  std::string problem;
  CHECK(io::verify_manifest(dir / "spectrum" / "manifest.json", &problem));
  fs::remove_all(dir);
}

TEST_CASE("config file with flag overrides") {
  const fs::path dir = scratch_dir("config");
  io::write_json(dir / "run.json", json{{"n_spins", 5}, {"omega_tau", "pi/2"}, {"g_tau", 0.3}, {"steps", 7}});
  const Outcome r =
      run_cli({"trajectory", "--config", (dir / "run.json").string(), "--steps", "9", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  const io::Table t = io::read_csv(dir / "trajectory" / "trajectory.csv", io::schema::trajectory());
  CHECK(t.rows.size() == 10);
  const json used = io::read_json(dir / "trajectory" / "config.json");
  CHECK(used["n_spins"] == 5);
  CHECK(used["steps"] == 9);

  io::write_json(dir / "bad.json", json{{"n_spinz", 5}});
  CHECK(run_cli({"trajectory", "--config", (dir / "bad.json").string()}).code == cli::kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("sweep subcommands write their schemas") {
  const fs::path dir = scratch_dir("sweeps");
  const std::string out = dir.string();
  REQUIRE(run_cli({"purity-map", "--n-spins", "4", "--n-g", "2", "--n-omega", "3", "--out", out}).code == 0);
  CHECK(io::read_csv(dir / "purity-map" / "purity_map.csv", io::schema::purity_map()).rows.size() == 6);
  REQUIRE(run_cli({"gap-map", "--n-spins", "4", "--n-g", "2", "--n-omega", "2", "--g-min", "0.1", "--omega-min",
                   "pi/2", "--omega-max", "2pi/3", "--out", out})
              .code == 0);
  CHECK(io::read_csv(dir / "gap-map" / "gap_map.csv", io::schema::gap_map()).rows.size() == 4);
  REQUIRE(run_cli({"size-scan", "--n-list", "4,6", "--g-list", "0.15,0.2", "--out", out}).code == 0);
  CHECK(io::read_csv(dir / "size-scan" / "size_scan.csv", io::schema::size_scan()).rows.size() == 4);
  REQUIRE(run_cli({"husimi", "--n-spins", "4", "--husimi-theta", "11", "--husimi-phi", "21", "--out", out}).code == 0);
  CHECK(io::read_csv(dir / "husimi" / "husimi.csv", io::schema::husimi()).rows.size() == 11 * 21);
  fs::remove_all(dir);
}

TEST_CASE("figure catalog") {
  for (const char* id : {"fig1b", "fig2a", "fig2b", "fig2c", "fig2def", "fig3ab", "fig3cd", "fig3ej", "figS1", "figS2",
                         "figS3", "figS4", "figS5"}) {
    CHECK(is_figure_id(id));
  }
  CHECK_FALSE(is_figure_id("fig4"));
}

TEST_CASE("reproduce-figure quick runs are reproducible") {
  const fs::path dir = scratch_dir("figures");
  for (const char* id : {"fig1b", "fig2def"}) {
    INFO(id);
    const fs::path a = dir / "a", b = dir / "b";
    REQUIRE(run_cli({"reproduce-figure", id, "--scale", "quick", "--threads", "1", "--out", a.string()}).code == 0);
    REQUIRE(run_cli({"reproduce-figure", id, "--scale", "quick", "--threads", "2", "--out", b.string()}).code == 0);
    const json ma = io::read_json(a / id / "manifest.json");
    const json mb = io::read_json(b / id / "manifest.json");
    CHECK(ma["figure"] == id);
    std::string problem;
    CHECK(io::verify_manifest(a / id / "manifest.json", &problem));
    REQUIRE(ma["files"].size() == mb["files"].size());
    for (std::size_t i = 0; i < ma["files"].size(); ++i) {
      const std::string name = ma["files"][i]["path"];
      if (name.ends_with(".csv")) CHECK(ma["files"][i]["sha256"] == mb["files"][i]["sha256"]);
    }
  }
  CHECK(fs::exists(dir / "a" / "fig1b" / "upper_trajectory.csv"));
  CHECK(fs::exists(dir / "a" / "fig2def" / "husimi_e.csv"));
  fs::remove_all(dir);
}
