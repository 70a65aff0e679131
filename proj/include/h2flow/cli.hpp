#ifndef H2FLOW_CLI_HPP
#define H2FLOW_CLI_HPP

#include <iosfwd>
#include <string>

#include "h2flow/ncp.hpp"

namespace h2flow {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumerical = 2,
  kExitIo = 3,
};

/// Affine NCP read by `solve-ncp`. One row per line, coefficients then the
/// constant after a bar:
///
///   H: 1 1 0 | -2
///   F: 0 1 0 | 0
///   G: 2 1 1 | -3
///   x0: 0 0 0          (optional start, zeros otherwise)
///
/// The number of unknowns is #H + #F and #F must equal #G.
struct AffineNcpSpec {
  DenseNcp<double> problem;
  Eigen::VectorXd x0;
};

AffineNcpSpec parse_affine_ncp(const std::string& text);

/// Command-line entry point; returns one of ExitCode.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace h2flow

#endif  // H2FLOW_CLI_HPP
