#ifndef H2FLOW_IO_HPP
#define H2FLOW_IO_HPP

// CSV outputs of a run and the gnuplot script that draws them. Floats are
// written with "%.12e"; all files use LF line endings.

#include <string>
#include <vector>

#include "h2flow/simulation.hpp"

namespace h2flow {

inline constexpr const char* kSnapshotHeader =
    "x_m,s_l,s_g,p_l_Pa,p_g_Pa,chi_h_l,rho_h_total_kg_m3";
inline constexpr const char* kConvergenceHeader = "step,time_years,iter,residual,active_cells";
inline constexpr const char* kEventHeader = "event,time_years";
inline constexpr const char* kIterationsHeader = "step,time_years,newton_iterations";

std::string format_float(double v);

void write_snapshot_csv(const Snapshot& snapshot, const std::string& path);
/// Reads the columns back; time fields are left at zero.
Snapshot read_snapshot_csv(const std::string& path);
std::string snapshot_filename(const Snapshot& snapshot);

/// One row per Newton iterate of every accepted step. `iter` numbers the
/// iterates from 1 (the warm start) so the row with iter = k holds the
/// residual after k - 1 linear solves.
void write_convergence_log(const std::vector<StepRecord>& steps, const std::string& path);

struct ConvergenceRow {
  int step = 0;
  double time_years = 0.0;
  int iter = 0;
  double residual = 0.0;
  long active_cells = 0;
};
std::vector<ConvergenceRow> read_convergence_log(const std::string& path);

void write_event_log(const EventLog& events, const std::string& path);
/// Event name -> time in years; events that did not occur are absent.
std::vector<std::pair<std::string, double>> read_event_log(const std::string& path);

void write_iterations_csv(const std::vector<StepRecord>& steps, const std::string& path);

/// gnuplot script drawing the three profile panels (one curve per snapshot)
/// and the Newton iterations per step. Returns the script path.
std::string emit_plot_script(const RunResult& run, const std::string& out_dir);

/// Writes snapshots, logs, the resolved config and the plot script.
void write_run_outputs(const RunResult& run, const std::string& out_dir);

}  // namespace h2flow

#endif  // H2FLOW_IO_HPP
