#include <doctest.h>

#include <random>

#include "h2flow/block_tridiag.hpp"
#include "h2flow/errors.hpp"

using namespace h2flow;
using Matrix = BlockTridiagMatrix<double, 3>;

namespace {

Matrix random_dominant(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](Matrix::BlockType& b) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b(i, j) = u(rng);
  };
  Matrix a(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fill(a.diag(i));
    a.diag(i) += 8.0 * Matrix::BlockType::Identity();
    if (i + 1 < n) {
      fill(a.lower(i));
      fill(a.upper(i));
    }
  }
  return a;
}

}  // namespace

TEST_CASE("identity solve returns the right-hand side") {
  const Matrix a = Matrix::Identity(4);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(12, -3.0, 8.0);
  CHECK(block_thomas_solve(a, b) == b);
}

TEST_CASE("two-block system matches dense LU") {
  std::mt19937_64 rng(1);
  const Matrix a = random_dominant(2, rng);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(6);
  const Eigen::VectorXd x = block_thomas_solve(a, b);
  const Eigen::VectorXd ref = a.toDense().fullPivLu().solve(b);
  CHECK((x - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("random systems up to 256 blocks") {
  std::mt19937_64 rng(2);
  for (Eigen::Index n : {1, 3, 17, 64, 256}) {
    const Matrix a = random_dominant(n, rng);
    const Eigen::VectorXd b = Eigen::VectorXd::Random(3 * n);
    const Eigen::VectorXd x = block_thomas_solve(a, b);
    CHECK((a * x - b).norm() <= 1e-11 * b.norm());
    CHECK((x - dense_solve(a, b)).norm() <= 1e-10 * x.norm());
  }
}

TEST_CASE("matrix-vector product agrees with the dense expansion") {
  std::mt19937_64 rng(4);
  const Matrix a = random_dominant(5, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(15);
  CHECK((a * x - a.toDense() * x).norm() <= 1e-13 * x.norm());
  const Eigen::MatrixXd d = a.toDense();
  for (Eigen::Index i = 0; i < 15; ++i)
    for (Eigen::Index j = 0; j < 15; ++j)
      if (std::abs(i / 3 - j / 3) > 1) CHECK(d(i, j) == 0.0);
}

TEST_CASE("singular and malformed systems") {
  Matrix a = Matrix::Identity(3);
  a.diag(1).setZero();
  CHECK_THROWS_AS(block_thomas_solve(a, Eigen::VectorXd::Ones(9)), SingularLinearSystem);
  CHECK_THROWS_AS(block_thomas_solve(Matrix::Identity(3), Eigen::VectorXd::Ones(8)),
                  DimensionError);
  Matrix nan = Matrix::Identity(2);
  nan.upper(0)(0, 0) = std::nan("");
  CHECK_FALSE(nan.all_finite());
  CHECK_THROWS_AS(block_thomas_solve(nan, Eigen::VectorXd::Ones(6)), SingularLinearSystem);
  CHECK_THROWS_AS(a.block(0, 2), DimensionError);
}

TEST_CASE("badly scaled but regular blocks are accepted") {
  Matrix a = Matrix::Identity(2);
  a.diag(0).diagonal() << 1.0, 1e-9, 1e-14;
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(6);
  const Eigen::VectorXd x = block_thomas_solve(a, b);
  CHECK(x[2] == doctest::Approx(1e14));
}
