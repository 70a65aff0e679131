#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "h2flow/config.hpp"
#include "h2flow/errors.hpp"
#include "h2flow/io.hpp"
#include "h2flow/simulation.hpp"

using namespace h2flow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("h2flow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Snapshot two_cell_snapshot() {
  Snapshot s;
  s.time_years = 1e4;
  s.requested_years = 1e4;
  s.x = Eigen::Vector2d(0.5, 1.5);
  s.s_l = Eigen::Vector2d(0.97, 1.0);
  s.s_g = Eigen::Vector2d(1.0 - 0.97, 0.0);
  s.p_l = Eigen::Vector2d(1.0123456789012345e6, 1e6);
  s.p_g = Eigen::Vector2d(1.3e6, 1e6);
  s.chi_h_l = Eigen::Vector2d(1.5e-5, 3.3e-7);
  s.rho_h_total = Eigen::Vector2d(3.1e-3, 5e-5);
  return s;
}

}  // namespace

TEST_CASE("default configuration") {
  const Config c = parse_config("profile = benchmark\n");
  CHECK(c == profile_config("benchmark"));
  CHECK(c == parse_config(""));
  CHECK(c.n_cells == 200);
  CHECK(c.length == 200.0);
  CHECK(c.medium.permeability == 5e-20);
  CHECK(c.medium.porosity == 0.15);
  CHECK(c.medium.vg_pressure == 2e6);
  CHECK(c.medium.vg_n == 1.49);
  CHECK(c.medium.residual_liquid_sat == 0.4);
  CHECK(c.medium.residual_gas_sat == 0.0);
  CHECK(c.fluid.liquid_density == 1e3);
  CHECK(c.fluid.henry_molar == 7.65e-6);
  CHECK(c.fluid.diffusion == 3e-9);
  CHECK(c.schedule.dt_years == 5000.0);
  CHECK(c.boundary.q_h_in_per_year == 5.57e-6);
  CHECK(c.initial.chi_h_l == 0.0);

  const Config printed = profile_config("table1-as-printed");
  CHECK(printed.fluid.viscosity_liquid == 1e-9);
  CHECK(printed.fluid.viscosity_gas == 9e-9);
  CHECK_THROWS_AS(profile_config("nope"), ValidationError);
}

TEST_CASE("overrides and errors") {
  const Config c = parse_config("# comment\nmedium.n = 2.0\nschedule.snapshot_years = 1e4, 2e4\n");
  CHECK(c.medium.vg_m == 0.5);
  CHECK(c.schedule.snapshot_years == std::vector<double>{1e4, 2e4});

  CHECK_THROWS_AS(parse_config("medium.n = 0.9\n"), ValidationError);
  try {
    parse_config("medium.n = 0.9\n");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "medium.n");
  }
  try {
    parse_config("grid.n_cells = 10\nbogus.key = 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config("grid.n_cells = ten\n"), ParseError);
  CHECK_THROWS_AS(parse_config("grid.n_cells = 3\ngrid.n_cells = 4\n"), ParseError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ParseError);
  CHECK_THROWS_AS(parse_config("solver.c_function = max\n"), ParseError);
  CHECK(parse_config("solver.c_function = fischer_burmeister\n").solver.c_function ==
        CFunction::fischer_burmeister);
  CHECK_THROWS_AS(load_config("/nonexistent/h2flow.cfg"), IoError);
}

TEST_CASE("serialization round-trips") {
  Config c = parse_config("schedule.dt_years = 5000\nfluid.diffusion_closure = water_molar\n");
  const Config back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(back.schedule.dt_years == 5000.0);
  CHECK(back.fluid.diffusion_closure == DiffusionClosure::water_molar);
  c.fluid.diffusion = 1.0 / 3.0 * 1e-8;
  CHECK(parse_config(serialize_config(c)).fluid.diffusion == c.fluid.diffusion);
}

TEST_CASE("snapshot CSV") {
  const fs::path dir = scratch_dir("snapshot");
  const Snapshot s = two_cell_snapshot();
  const std::string path = (dir / snapshot_filename(s)).string();
  CHECK(snapshot_filename(s) == "snapshot_10000y.csv");
  write_snapshot_csv(s, path);
  const auto lines = lines_of(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kSnapshotHeader);
  CHECK(slurp(path).find('\r') == std::string::npos);

  // Read-back reproduces the file exactly through the same formatter.
  Snapshot back = read_snapshot_csv(path);
  back.requested_years = s.requested_years;
  const std::string again = (dir / "again.csv").string();
  write_snapshot_csv(back, again);
  CHECK(slurp(again) == slurp(path));
  CHECK(back.p_l[0] == doctest::Approx(s.p_l[0]).epsilon(1e-12));
  for (Eigen::Index i = 0; i < 2; ++i)
    CHECK(std::abs(back.s_g[i] - (1.0 - back.s_l[i])) <= 1e-12);
  CHECK_THROWS_AS(write_snapshot_csv(s, (dir / "missing" / "x.csv").string()), IoError);
}

TEST_CASE("logs of an empty run") {
  const fs::path dir = scratch_dir("empty");
  write_convergence_log({}, (dir / "c.csv").string());
  write_event_log(EventLog{}, (dir / "e.csv").string());
  CHECK(lines_of(dir / "c.csv") == std::vector<std::string>{kConvergenceHeader});
  CHECK(read_convergence_log((dir / "c.csv").string()).empty());
  CHECK(read_event_log((dir / "e.csv").string()).size() == 1);  // injection_end only
}

TEST_CASE("convergence log numbering") {
  StepRecord rec;
  rec.step = 1;
  rec.time = 5000 * kSecondsPerYear;
  rec.report.iterations = 3;
  rec.report.residual_history = {1e-1, 1e-3, 1e-7, 1e-14};
  rec.report.active_set_history = {0, 2, 2, 2};
  const fs::path dir = scratch_dir("convergence");
  write_convergence_log({rec}, (dir / "c.csv").string());
  const auto rows = read_convergence_log((dir / "c.csv").string());
  REQUIRE(rows.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(rows[static_cast<std::size_t>(k)].iter == k + 1);
  CHECK(rows[3].residual == 1e-14);
  CHECK(rows[1].active_cells == 2);
  CHECK(rows[0].time_years == doctest::Approx(5000.0));
}

TEST_CASE("run outputs are complete and deterministic") {
  Config c = profile_config("benchmark");
  c.n_cells = 20;
  c.length = 20.0;
  c.schedule.total_years = 3e4;
  c.schedule.injection_end_years = 2e4;
  c.schedule.snapshot_years = {1e4, 3e4};
  const RunResult r = run(c);
  REQUIRE(r.completed);

  const fs::path a = scratch_dir("run_a");
  const fs::path b = scratch_dir("run_b");
  write_run_outputs(r, a.string());
  write_run_outputs(run(c), b.string());
  for (const char* f : {"snapshot_10000y.csv", "snapshot_30000y.csv", "convergence.csv",
                        "events.csv", "iterations.csv", "config_used.txt", "plot.gp"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(parse_config(slurp(a / "config_used.txt")) == c);

  // The plot script names only files that were written, one curve per snapshot.
  const std::string script = slurp(a / "plot.gp");
  std::size_t pos = 0, curves = 0;
  while ((pos = script.find("'snapshot_", pos)) != std::string::npos) {
    const std::size_t end = script.find('\'', pos + 1);
    CHECK(fs::exists(a / script.substr(pos + 1, end - pos - 1)));
    pos = end;
    ++curves;
  }
  CHECK(curves == 3 * r.snapshots.size());
  CHECK(script.find("iterations.csv") != std::string::npos);
}
