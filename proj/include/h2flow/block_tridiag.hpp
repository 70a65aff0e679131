#ifndef H2FLOW_BLOCK_TRIDIAG_HPP
#define H2FLOW_BLOCK_TRIDIAG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "h2flow/errors.hpp"

namespace h2flow {

/// Square block-tridiagonal matrix with fixed-size dense blocks.
///
/// Row block i holds lower(i-1) in column block i-1, diag(i) in column
/// block i and upper(i) in column block i+1.
template <typename Scalar, int Block = 3>
class BlockTridiagMatrix {
 public:
  using BlockType = Eigen::Matrix<Scalar, Block, Block>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  static constexpr int block_size = Block;

  BlockTridiagMatrix() = default;
  explicit BlockTridiagMatrix(Eigen::Index n_blocks)
      : diag_(n_blocks, BlockType::Zero()),
        lower_(n_blocks > 0 ? n_blocks - 1 : 0, BlockType::Zero()),
        upper_(n_blocks > 0 ? n_blocks - 1 : 0, BlockType::Zero()) {}

  static BlockTridiagMatrix Identity(Eigen::Index n_blocks) {
    BlockTridiagMatrix a(n_blocks);
    for (auto& d : a.diag_) d.setIdentity();
    return a;
  }

  Eigen::Index n_blocks() const { return static_cast<Eigen::Index>(diag_.size()); }
  Eigen::Index rows() const { return n_blocks() * Block; }
  Eigen::Index cols() const { return rows(); }

  BlockType& diag(Eigen::Index i) { return diag_[i]; }
  const BlockType& diag(Eigen::Index i) const { return diag_[i]; }
  BlockType& lower(Eigen::Index i) { return lower_[i]; }
  const BlockType& lower(Eigen::Index i) const { return lower_[i]; }
  BlockType& upper(Eigen::Index i) { return upper_[i]; }
  const BlockType& upper(Eigen::Index i) const { return upper_[i]; }

  /// Block coupling row block `row` to column block `col`; |row - col| <= 1.
  BlockType& block(Eigen::Index row, Eigen::Index col) {
    if (row == col) return diag_[row];
    if (col == row - 1) return lower_[col];
    if (col == row + 1) return upper_[row];
    throw DimensionError("BlockTridiagMatrix: block outside the tridiagonal band");
  }

  bool all_finite() const {
    auto finite = [](const std::vector<BlockType>& v) {
      for (const auto& b : v)
        if (!b.allFinite()) return false;
      return true;
    };
    return finite(diag_) && finite(lower_) && finite(upper_);
  }

  Vector operator*(const Vector& x) const {
    if (x.size() != cols()) throw DimensionError("BlockTridiagMatrix: operand size mismatch");
    Vector y(rows());
    const Eigen::Index n = n_blocks();
    for (Eigen::Index i = 0; i < n; ++i) {
      auto yi = y.template segment<Block>(i * Block);
      yi = diag_[i] * x.template segment<Block>(i * Block);
      if (i > 0) yi += lower_[i - 1] * x.template segment<Block>((i - 1) * Block);
      if (i + 1 < n) yi += upper_[i] * x.template segment<Block>((i + 1) * Block);
    }
    return y;
  }

  DenseMatrix toDense() const {
    DenseMatrix a = DenseMatrix::Zero(rows(), cols());
    const Eigen::Index n = n_blocks();
    for (Eigen::Index i = 0; i < n; ++i) {
      a.template block<Block, Block>(i * Block, i * Block) = diag_[i];
      if (i > 0) a.template block<Block, Block>(i * Block, (i - 1) * Block) = lower_[i - 1];
      if (i + 1 < n) a.template block<Block, Block>(i * Block, (i + 1) * Block) = upper_[i];
    }
    return a;
  }

 private:
  std::vector<BlockType> diag_;
  std::vector<BlockType> lower_;
  std::vector<BlockType> upper_;
};

namespace detail {

/// 1-norm condition number of a block after row then column equilibration.
/// Returns +inf for structurally or numerically singular blocks.
template <typename BlockType>
typename BlockType::Scalar equilibrated_condition(const BlockType& m) {
  using Scalar = typename BlockType::Scalar;
  constexpr int n = BlockType::RowsAtCompileTime;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (!m.allFinite()) return inf;
  BlockType s = m;
  for (int r = 0; r < n; ++r) {
    const Scalar mx = s.row(r).cwiseAbs().maxCoeff();
    if (mx == Scalar(0)) return inf;
    s.row(r) /= mx;
  }
  for (int c = 0; c < n; ++c) {
    const Scalar mx = s.col(c).cwiseAbs().maxCoeff();
    if (mx == Scalar(0)) return inf;
    s.col(c) /= mx;
  }
  Eigen::PartialPivLU<BlockType> lu(s);
  const BlockType inv = lu.inverse();
  if (!inv.allFinite()) return inf;
  const Scalar norm = s.cwiseAbs().colwise().sum().maxCoeff();
  const Scalar inv_norm = inv.cwiseAbs().colwise().sum().maxCoeff();
  return norm * inv_norm;
}

}  // namespace detail

inline constexpr double kSingularConditionThreshold = 1e14;

/// Solves A x = b by block LU without inter-block pivoting (block Thomas
/// algorithm). Each pivot block is factored with partial pivoting; a pivot
/// whose equilibrated condition number exceeds `max_condition` raises
/// SingularLinearSystem.
template <typename Scalar, int Block>
typename BlockTridiagMatrix<Scalar, Block>::Vector block_thomas_solve(
    const BlockTridiagMatrix<Scalar, Block>& a,
    const typename BlockTridiagMatrix<Scalar, Block>::Vector& b,
    double max_condition = kSingularConditionThreshold) {
  using BlockType = typename BlockTridiagMatrix<Scalar, Block>::BlockType;
  using BlockVector = Eigen::Matrix<Scalar, Block, 1>;
  using Vector = typename BlockTridiagMatrix<Scalar, Block>::Vector;

  const Eigen::Index n = a.n_blocks();
  if (b.size() != a.rows()) throw DimensionError("block_thomas_solve: rhs size mismatch");
  if (n == 0) return Vector();

  std::vector<BlockType> c_prime(n > 0 ? n - 1 : 0);
  std::vector<BlockVector> d_prime(n);

  BlockType pivot = a.diag(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) pivot = a.diag(i) - a.lower(i - 1) * c_prime[i - 1];
    const Scalar cond = detail::equilibrated_condition(pivot);
    if (!(cond <= Scalar(max_condition)))
      throw SingularLinearSystem("block_thomas_solve: pivot block " + std::to_string(i) +
                                 " is numerically singular");
    Eigen::PartialPivLU<BlockType> lu(pivot);
    BlockVector rhs = b.template segment<Block>(i * Block);
    if (i > 0) rhs -= a.lower(i - 1) * d_prime[i - 1];
    d_prime[i] = lu.solve(rhs);
    if (i + 1 < n) c_prime[i] = lu.solve(a.upper(i));
  }

  Vector x(a.rows());
  x.template segment<Block>((n - 1) * Block) = d_prime[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i)
    x.template segment<Block>(i * Block) =
        d_prime[i] - c_prime[i] * x.template segment<Block>((i + 1) * Block);
  return x;
}

/// Dense LU fallback on the expanded matrix.
template <typename Scalar, int Block>
typename BlockTridiagMatrix<Scalar, Block>::Vector dense_solve(
    const BlockTridiagMatrix<Scalar, Block>& a,
    const typename BlockTridiagMatrix<Scalar, Block>::Vector& b) {
  if (b.size() != a.rows()) throw DimensionError("dense_solve: rhs size mismatch");
  Eigen::FullPivLU<typename BlockTridiagMatrix<Scalar, Block>::DenseMatrix> lu(a.toDense());
  if (!lu.isInvertible()) throw SingularLinearSystem("dense_solve: matrix is singular");
  return lu.solve(b);
}

/// Linear-solver functor for newton_min_solve.
struct BlockThomasSolver {
  double max_condition = kSingularConditionThreshold;

  template <typename Scalar, int Block>
  typename BlockTridiagMatrix<Scalar, Block>::Vector operator()(
      const BlockTridiagMatrix<Scalar, Block>& a,
      const typename BlockTridiagMatrix<Scalar, Block>::Vector& b) const {
    return block_thomas_solve(a, b, max_condition);
  }
};

}  // namespace h2flow

#endif  // H2FLOW_BLOCK_TRIDIAG_HPP
