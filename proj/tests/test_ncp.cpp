#include <doctest.h>

#include <random>

#include "h2flow/errors.hpp"
#include "h2flow/ncp.hpp"

using namespace h2flow;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
VectorXd v2(double a, double b) { return (VectorXd(2) << a, b).finished(); }
VectorXd v1(double a) { return VectorXd::Constant(1, a); }
}  // namespace

TEST_CASE("min C-function") {
  CHECK(cfun_min(v2(0, 5), v2(3, 0)) == v2(0, 0));
  CHECK(cfun_min(v2(-1, 2), v2(4, 3)) == v2(-1, 2));
  CHECK_THROWS_AS(cfun_min(v2(0, 0), v1(0)), DimensionError);
}

TEST_CASE("Fischer-Burmeister C-function") {
  CHECK(cfun_fischer_burmeister(v1(3), v1(4))[0] == doctest::Approx(-2.0));
  CHECK(cfun_fischer_burmeister(v1(0), v1(0))[0] == 0.0);
  CHECK(cfun_fischer_burmeister(v1(2), v1(0))[0] == doctest::Approx(0.0));
}

TEST_CASE("C-functions vanish exactly on complementary pairs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(0.0, 10.0);
  std::bernoulli_distribution coin;
  for (int i = 0; i < 10000; ++i) {
    double a = mag(rng), b = mag(rng);
    const int pattern = i % 3;  // 0: complementary, 1: both positive, 2: one negative
    if (pattern == 0) (coin(rng) ? a : b) = 0.0;
    if (pattern == 2) (coin(rng) ? a : b) *= -1.0;
    if (pattern == 2 && a == 0.0 && b == 0.0) continue;
    const bool complementary = a >= 0 && b >= 0 && a * b == 0;
    const double m = cfun_min(v1(a), v1(b))[0];
    const double fb = cfun_fischer_burmeister(v1(a), v1(b))[0];
    CHECK((m == 0.0) == complementary);
    CHECK((std::abs(fb) <= 1e-12 * (a + std::abs(b) + 1.0)) == complementary);
  }
}

TEST_CASE("active sets") {
  const ActiveSets s = active_sets(v2(0.2, 0.0), v2(0.1, 0.5));
  CHECK(s.active == std::vector<Eigen::Index>{0});
  CHECK(s.inactive == std::vector<Eigen::Index>{1});

  const VectorXd ties = VectorXd::LinSpaced(5, 0, 4);
  CHECK(active_sets(ties, ties).active.empty());
  CHECK(active_sets(ties, ties).inactive.size() == 5);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-3, 3);
  VectorXd f(50), g(50);
  for (int i = 0; i < 50; ++i) f[i] = d(rng), g[i] = d(rng);
  const ActiveSets r = active_sets(f, g);
  CHECK(r.active.size() + r.inactive.size() == 50);
  for (auto i : r.active) CHECK(g[i] < f[i]);
  for (auto i : r.inactive) CHECK(g[i] >= f[i]);
}

TEST_CASE("Jacobian row selection") {
  MatrixXd fp(1, 3), gp(1, 3);
  fp << 1, 2, 3;
  gp << 4, 5, 6;
  CHECK(select_jacobian_rows(fp, gp, v1(1), v1(2)) == fp);
  CHECK(select_jacobian_rows(fp, gp, v1(2), v1(1)) == gp);
  CHECK(select_jacobian_rows(fp, gp, v1(1), v1(1)) == fp);

  const RowWeights<double> wm = row_weights(CFunction::min, v2(1, 2), v2(2, 1));
  CHECK(wm.f == v2(1, 0));
  CHECK(wm.g == v2(0, 1));
  const RowWeights<double> wfb = row_weights(CFunction::fischer_burmeister, v2(3, 0), v2(4, 0));
  CHECK(wfb.f[0] == doctest::Approx(3.0 / 5.0 - 1.0));
  CHECK(wfb.g[0] == doctest::Approx(4.0 / 5.0 - 1.0));
  CHECK(wfb.f[1] == -1.0);
  CHECK(wfb.g[1] == 0.0);
}

TEST_CASE("residual norm") {
  CHECK(residual_norm(VectorXd::Zero(4), VectorXd::Zero(2)) == 0.0);
  VectorXd phi = VectorXd::Zero(3);
  phi[1] = 1e-5;
  CHECK(residual_norm(VectorXd::Zero(6), phi) == doctest::Approx(1e-5));
  ResidualScales<double> s{VectorXd::Constant(2, 10.0), VectorXd::Constant(1, 0.5)};
  CHECK(residual_norm(v2(-20, 1), v1(0.25), s) == doctest::Approx(2.0));
}

TEST_CASE("Newton-min on small problems") {
  const NewtonOptions opts{1e-12, 50, CFunction::min};
  SUBCASE("x perp (x - 2)") {
    const auto p = DenseNcp<double>::lcp(MatrixXd::Constant(1, 1, 1.0), v1(-2));
    const auto r = newton_min_solve(p, v1(5), opts, DenseLuSolver{});
    CHECK(r.report.converged);
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.report.residual_history.size() == static_cast<std::size_t>(r.report.iterations) + 1);
  }
  SUBCASE("x perp (2x + 1)") {
    const auto p = DenseNcp<double>::lcp(MatrixXd::Constant(1, 1, 2.0), v1(1));
    const auto r = newton_min_solve(p, v1(3), opts, DenseLuSolver{});
    CHECK(r.x[0] == doctest::Approx(0.0));
  }
  SUBCASE("2x2 LCP") {
    MatrixXd m(2, 2);
    m << 2, 1, 1, 2;
    const auto p = DenseNcp<double>::lcp(m, v2(-3, -3));
    for (CFunction c : {CFunction::min, CFunction::fischer_burmeister}) {
      const auto r = newton_min_solve(p, v2(0, 0), NewtonOptions{1e-12, 50, c}, DenseLuSolver{});
      CHECK(r.x[0] == doctest::Approx(1.0));
      CHECK(r.x[1] == doctest::Approx(1.0));
    }
  }
  SUBCASE("starting at the solution costs no linear solve") {
    const auto p = DenseNcp<double>::lcp(MatrixXd::Constant(1, 1, 1.0), v1(-2));
    const auto r = newton_min_solve(p, v1(2), opts, DenseLuSolver{});
    CHECK(r.report.iterations == 0);
  }
  SUBCASE("failures") {
    const auto p = DenseNcp<double>::lcp(MatrixXd::Zero(1, 1), v1(-1));
    CHECK_THROWS_AS(newton_min_solve(p, v1(1), opts, DenseLuSolver{}), SolverError);
    const auto q = DenseNcp<double>::lcp(MatrixXd::Constant(1, 1, 1.0), v1(-2));
    CHECK_THROWS_AS(newton_min_solve(q, v2(1, 1), opts, DenseLuSolver{}), DimensionError);
  }
}
