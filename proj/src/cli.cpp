#include "h2flow/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "h2flow/config.hpp"
#include "h2flow/errors.hpp"
#include "h2flow/io.hpp"
#include "h2flow/simulation.hpp"
#include "h2flow/verification.hpp"

namespace h2flow {

namespace {

constexpr double kJacobianTolerance = 1e-6;
constexpr double kAgreementTolerance = 1e-8;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Config resolve_config(const std::string& path, const std::string& profile) {
  if (path.empty()) return parse_config("", profile);
  return load_config(path, profile);
}

int do_run(const std::string& config_path, const std::string& out_dir,
           const std::string& profile, std::ostream& out, std::ostream& err) {
  const Config config = resolve_config(config_path, profile);
  out << "h2flow " << H2FLOW_VERSION << " run, profile " << config.profile << "\n"
      << "seconds per year: " << std::setprecision(9) << kSecondsPerYear << " (Julian)\n";
  const RunResult result = run(config);
  out << std::setprecision(6) << "residual scales: water " << result.scales.water
      << " kg/(m^3 s), hydrogen " << result.scales.hydrogen << " kg/(m^3 s), complementarity "
      << result.scales.complementarity << " kg/m^3\n";
  write_run_outputs(result, out_dir);

  const auto& ev = result.events;
  auto show = [&](const char* name, const std::optional<double>& t) {
    out << "  " << name << ": " << (t ? std::to_string(*t) + " years" : std::string("none"))
        << "\n";
  };
  out << "steps: " << result.steps.size() << ", final time "
      << result.final_time / kSecondsPerYear << " years\n";
  show("first gas appearance", ev.first_gas_appearance);
  show("last gas disappearance", ev.last_gas_disappearance);
  show("stationarity", ev.stationarity);
  const MassAudit audit = mass_audit(result);
  out << "mass balance error: water " << audit.water.error << " kg/m^2, hydrogen "
      << audit.hydrogen.error << " kg/m^2 (injected " << audit.injected_hydrogen << " kg/m^2)\n"
      << "outputs written to " << out_dir << "\n";
  if (!result.completed) {
    err << "run aborted: " << result.failure << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int do_check_jacobian(const std::string& config_path, const std::string& profile, int samples,
                      std::ostream& out) {
  const Config config = resolve_config(config_path, profile);
  const JacobianCheck check = check_jacobian(config, samples);
  out << "samples: " << check.samples.size() << "\n"
      << std::setprecision(6) << "max relative error: " << check.worst.max_rel_error
      << " at (" << check.worst.row << ", " << check.worst.col << "), analytic "
      << check.worst.analytic << ", fd " << check.worst.fd << "\n";
  const bool ok = check.worst.max_rel_error <= kJacobianTolerance;
  out << (ok ? "PASS" : "FAIL") << " (tolerance " << kJacobianTolerance << ")\n";
  return ok ? kExitOk : kExitNumerical;
}

int do_solve_ncp(const std::string& path, std::ostream& out, std::ostream& err) {
  const AffineNcpSpec spec = parse_affine_ncp(read_file(path));
  const BruteForceResult brute = brute_force_ncp(spec.problem, spec.x0);
  const auto print = [&](const char* name, const Eigen::VectorXd& x) {
    out << name << ":";
    for (Eigen::Index i = 0; i < x.size(); ++i) out << " " << std::setprecision(12) << x[i];
    out << "\n";
  };
  NewtonResult<double> newton;
  try {
    newton = newton_min_solve(spec.problem, spec.x0, NewtonOptions{1e-12, 100}, DenseLuSolver{});
  } catch (const SolverError& e) {
    err << "newton-min failed: " << e.what() << "\n";
    out << "brute-force solutions: " << brute.solutions.size() << "\n";
    for (const auto& s : brute.solutions) print("  brute-force", s);
    return kExitNumerical;
  }
  print("newton-min", newton.x);
  out << "newton-min iterations: " << newton.report.iterations << "\n"
      << "brute-force solutions: " << brute.solutions.size() << "\n";
  for (const auto& s : brute.solutions) print("  brute-force", s);
  bool agrees = false;
  for (const auto& s : brute.solutions)
    agrees = agrees || (s - newton.x).lpNorm<Eigen::Infinity>() <= kAgreementTolerance;
  out << (agrees ? "AGREE" : "DISAGREE") << "\n";
  return agrees ? kExitOk : kExitNumerical;
}

}  // namespace

AffineNcpSpec parse_affine_ncp(const std::string& text) {
  std::vector<std::vector<double>> rows[3];
  std::vector<double> x0;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    const auto colon = line.find(':');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (colon == std::string::npos) throw ParseError(line_no, "expected 'H:', 'F:', 'G:' or 'x0:'");
    std::string tag = line.substr(0, colon);
    tag.erase(0, tag.find_first_not_of(" \t"));
    tag.erase(tag.find_last_not_of(" \t") + 1);
    std::string body = line.substr(colon + 1);

    auto numbers = [&](const std::string& s) {
      std::istringstream ns(s);
      std::vector<double> v;
      std::string tok;
      while (ns >> tok) {
        try {
          std::size_t used = 0;
          v.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw ParseError(line_no, "malformed number '" + tok + "'");
        }
      }
      return v;
    };

    if (tag == "x0") {
      x0 = numbers(body);
      continue;
    }
    const int which = tag == "H" ? 0 : tag == "F" ? 1 : tag == "G" ? 2 : -1;
    if (which < 0) throw ParseError(line_no, "unknown row tag '" + tag + "'");
    const auto bar = body.find('|');
    if (bar == std::string::npos) throw ParseError(line_no, "missing '| constant'");
    std::vector<double> coeffs = numbers(body.substr(0, bar));
    const std::vector<double> constant = numbers(body.substr(bar + 1));
    if (constant.size() != 1) throw ParseError(line_no, "expected one constant after '|'");
    if (width == 0) width = coeffs.size();
    if (coeffs.size() != width || width == 0)
      throw ParseError(line_no, "all rows need the same number of coefficients");
    coeffs.push_back(constant[0]);
    rows[which].push_back(std::move(coeffs));
  }
  if (rows[1].size() != rows[2].size() || rows[1].empty())
    throw ParseError(line_no, "need matching, non-empty F and G rows");
  if (rows[0].size() + rows[1].size() != width)
    throw ParseError(line_no, "unknowns must equal #H + #F");

  auto to_matrix = [&](const std::vector<std::vector<double>>& r, Eigen::MatrixXd& a,
                       Eigen::VectorXd& b) {
    a.resize(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(width));
    b.resize(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (std::size_t j = 0; j < width; ++j)
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[i][j];
      b[static_cast<Eigen::Index>(i)] = r[i][width];
    }
  };
  Eigen::MatrixXd ah, af, ag;
  Eigen::VectorXd bh, bf, bg;
  to_matrix(rows[0], ah, bh);
  to_matrix(rows[1], af, bf);
  to_matrix(rows[2], ag, bg);

  Eigen::VectorXd start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
  if (!x0.empty()) {
    if (x0.size() != width) throw ParseError(line_no, "x0 needs one value per unknown");
    start = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(width));
  }
  return {DenseNcp<double>::affine(ah, bh, af, bf, ag, bg), start};
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-phase hydrogen migration with Newton-min complementarity solves", "h2flow"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", profile, ncp_path;
  int samples = 20;

  auto* run_cmd = app.add_subcommand("run", "Run a simulation and write its outputs");
  run_cmd->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--profile", profile, "Parameter profile (benchmark, table1-as-printed)");

  auto* jac_cmd = app.add_subcommand("check-jacobian", "Compare the analytic Jacobian with finite differences");
  jac_cmd->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  jac_cmd->add_option("--samples", samples, "Number of random states")->check(CLI::PositiveNumber);
  jac_cmd->add_option("--profile", profile, "Parameter profile");

  auto* ncp_cmd = app.add_subcommand("solve-ncp", "Solve a small affine NCP and compare with brute force");
  ncp_cmd->add_option("--file", ncp_path, "NCP description")->required();

  auto* version_cmd = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*version_cmd) {
      out << "h2flow " << H2FLOW_VERSION << "\n";
      return kExitOk;
    }
    if (*run_cmd) return do_run(config_path, out_dir, profile, out, err);
    if (*jac_cmd) return do_check_jacobian(config_path, profile, samples, out);
    if (*ncp_cmd) return do_solve_ncp(ncp_path, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StepFailure& e) {
    err << "step failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace h2flow
