#include "h2flow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "h2flow/config.hpp"
#include "h2flow/errors.hpp"

namespace h2flow {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, const char* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != header) throw IoError(path, "unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path, "malformed number '" + s + "'");
  }
}

}  // namespace

std::string format_float(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string snapshot_filename(const Snapshot& snapshot) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%.0fy.csv", snapshot.requested_years);
  return buf;
}

void write_snapshot_csv(const Snapshot& s, const std::string& path) {
  auto out = open_out(path);
  out << kSnapshotHeader << '\n';
  for (Eigen::Index i = 0; i < s.x.size(); ++i) {
    out << format_float(s.x[i]) << ',' << format_float(s.s_l[i]) << ',' << format_float(s.s_g[i])
        << ',' << format_float(s.p_l[i]) << ',' << format_float(s.p_g[i]) << ','
        << format_float(s.chi_h_l[i]) << ',' << format_float(s.rho_h_total[i]) << '\n';
  }
  finish(out, path);
}

Snapshot read_snapshot_csv(const std::string& path) {
  const auto rows = read_csv(path, kSnapshotHeader);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Snapshot s;
  for (auto* v : {&s.x, &s.s_l, &s.s_g, &s.p_l, &s.p_g, &s.chi_h_l, &s.rho_h_total}) v->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.size() != 7) throw IoError(path, "expected 7 columns");
    s.x[i] = to_double(r[0], path);
    s.s_l[i] = to_double(r[1], path);
    s.s_g[i] = to_double(r[2], path);
    s.p_l[i] = to_double(r[3], path);
    s.p_g[i] = to_double(r[4], path);
    s.chi_h_l[i] = to_double(r[5], path);
    s.rho_h_total[i] = to_double(r[6], path);
  }
  return s;
}

void write_convergence_log(const std::vector<StepRecord>& steps, const std::string& path) {
  auto out = open_out(path);
  out << kConvergenceHeader << '\n';
  for (const StepRecord& s : steps) {
    const auto& hist = s.report.residual_history;
    for (std::size_t k = 0; k < hist.size(); ++k)
      out << s.step << ',' << format_float(s.time / kSecondsPerYear) << ',' << k + 1 << ','
          << format_float(hist[k]) << ',' << s.report.active_set_history[k] << '\n';
  }
  finish(out, path);
}

std::vector<ConvergenceRow> read_convergence_log(const std::string& path) {
  std::vector<ConvergenceRow> rows;
  for (const auto& r : read_csv(path, kConvergenceHeader)) {
    if (r.size() != 5) throw IoError(path, "expected 5 columns");
    rows.push_back({static_cast<int>(to_double(r[0], path)), to_double(r[1], path),
                    static_cast<int>(to_double(r[2], path)), to_double(r[3], path),
                    static_cast<long>(to_double(r[4], path))});
  }
  return rows;
}

void write_event_log(const EventLog& events, const std::string& path) {
  auto out = open_out(path);
  out << kEventHeader << '\n';
  auto row = [&](const char* name, const std::optional<double>& t) {
    if (t) out << name << ',' << format_float(*t) << '\n';
  };
  row("first_gas_appearance", events.first_gas_appearance);
  row("injection_end", events.injection_end);
  row("last_gas_disappearance", events.last_gas_disappearance);
  row("stationarity", events.stationarity);
  finish(out, path);
}

std::vector<std::pair<std::string, double>> read_event_log(const std::string& path) {
  std::vector<std::pair<std::string, double>> events;
  for (const auto& r : read_csv(path, kEventHeader)) {
    if (r.size() != 2) throw IoError(path, "expected 2 columns");
    events.emplace_back(r[0], to_double(r[1], path));
  }
  return events;
}

void write_iterations_csv(const std::vector<StepRecord>& steps, const std::string& path) {
  auto out = open_out(path);
  out << kIterationsHeader << '\n';
  for (const StepRecord& s : steps)
    out << s.step << ',' << format_float(s.time / kSecondsPerYear) << ',' << s.report.iterations
        << '\n';
  finish(out, path);
}

std::string emit_plot_script(const RunResult& run, const std::string& out_dir) {
  const std::string path = (fs::path(out_dir) / "plot.gp").string();
  auto out = open_out(path);
  out << "# gnuplot script; run from this directory: gnuplot plot.gp\n"
      << "set datafile separator ','\n"
      << "set key outside right\n"
      << "set terminal pngcairo size 1500,450\n"
      << "set output 'profiles.png'\n"
      << "set multiplot layout 1,3\n";

  auto panel = [&](const char* title, const char* ylabel, int column) {
    out << "set title '" << title << "'\n"
        << "set xlabel 'x (m)'\n"
        << "set ylabel '" << ylabel << "'\n"
        << "plot ";
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
      const Snapshot& s = run.snapshots[i];
      char label[64];
      std::snprintf(label, sizeof label, "t = %g y", s.requested_years);
      out << (i ? ", \\\n     " : "") << "'" << snapshot_filename(s) << "' using 1:" << column
          << " skip 1 with lines title '" << label << "'";
    }
    out << "\n";
  };
  if (run.snapshots.empty()) {
    out << "set multiplot next\n";
  } else {
    panel("H2 density", "rho_h (kg/m^3)", 7);
    panel("Gas saturation", "s_g (-)", 3);
    panel("Liquid pressure", "p_l (Pa)", 4);
  }
  out << "unset multiplot\n"
      << "set terminal pngcairo size 900,450\n"
      << "set output 'iterations.png'\n"
      << "set title 'Newton-min iterations per time step'\n"
      << "set xlabel 'time (years)'\n"
      << "set ylabel 'iterations'\n"
      << "plot 'iterations.csv' using 2:3 skip 1 with linespoints title 'iterations'\n";
  finish(out, path);
  return path;
}

void write_run_outputs(const RunResult& run, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());
  const fs::path dir(out_dir);
  for (const Snapshot& s : run.snapshots)
    write_snapshot_csv(s, (dir / snapshot_filename(s)).string());
  write_convergence_log(run.steps, (dir / "convergence.csv").string());
  write_event_log(run.events, (dir / "events.csv").string());
  write_iterations_csv(run.steps, (dir / "iterations.csv").string());
  {
    const std::string path = (dir / "config_used.txt").string();
    auto out = open_out(path);
    out << serialize_config(run.config);
    finish(out, path);
  }
  emit_plot_script(run, out_dir);
}

}  // namespace h2flow
