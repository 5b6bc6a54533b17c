#include "rcm/constraint_projection.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>
#include <fmt/format.h>

#include "rcm/errors.hpp"

namespace rcm {

namespace {

// Dependent rows of a rank-deficient system must agree with b to this level,
// relative to the size of b.
constexpr double kConsistencyTol = 1e-8;

void check_length(const ProjectorBasis& basis, const Vector& v, const char* what) {
  if (v.size() != basis.dim()) {
    throw DimensionError(
        fmt::format("{}: expected length {}, got {}", what, basis.dim(), v.size()));
  }
}

}  // namespace

void ConstraintSystem::validate() const {
  const auto m = A.rows();
  const auto n = A.cols();
  if (m < 1 || n < 1) {
    throw DimensionError("constraint matrix must have at least one row and one column");
  }
  if (m > n) {
    throw DimensionError(fmt::format("constraint matrix has more rows ({}) than columns ({})", m, n));
  }
  if (b.size() != m) {
    throw DimensionError(fmt::format("right-hand side has length {}, expected {}", b.size(), m));
  }
  if (!A.allFinite() || !b.allFinite()) {
    throw InvalidArgument("constraint system contains non-finite entries");
  }
}

ProjectorBasis factor(const ConstraintSystem& cs, double rank_tol) {
  cs.validate();
  if (!(rank_tol >= 0.0) || !std::isfinite(rank_tol)) {
    throw InvalidArgument("rank tolerance must be finite and nonnegative");
  }
  const int m = cs.rows();
  const int n = cs.cols();

  const Eigen::ColPivHouseholderQR<Matrix> qr(cs.A.transpose());
  const Matrix& packed = qr.matrixQR();

  // Pivoting keeps |R(i,i)| non-increasing, so the rank is a leading count.
  const double lead = std::abs(packed(0, 0));
  int rank = 0;
  while (rank < m && lead > 0.0 && std::abs(packed(rank, rank)) > rank_tol * lead) {
    ++rank;
  }
  if (rank == 0) {
    throw RankZero("constraint matrix is numerically zero");
  }

  ProjectorBasis basis;
  basis.rank = rank;
  const Matrix q = qr.householderQ();
  basis.q1 = q.leftCols(rank);
  basis.q2 = q.rightCols(n - rank);
  basis.r1 = packed.topRows(rank).triangularView<Eigen::Upper>();
  basis.perm = qr.colsPermutation();

  // b_r = (R1 R1^T)^{-1} R1 (E^T b), evaluated as the least-squares solution
  // of R1^T b_r = E^T b without squaring the conditioning.
  const Vector permuted_b = basis.perm.transpose() * cs.b;
  basis.b_reduced = basis.r1.transpose().householderQr().solve(permuted_b);

  if (rank < m) {
    const Vector x_min = basis.q1 * basis.b_reduced;
    const double mismatch = (cs.A * x_min - cs.b).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + cs.b.lpNorm<Eigen::Infinity>();
    if (!(mismatch <= kConsistencyTol * scale)) {
      throw InconsistentConstraints(fmt::format(
          "rank {} of {} rows: dependent rows violate b by {:.3e}", rank, m, mismatch));
    }
  }
  return basis;
}

Vector project_gradient(const ProjectorBasis& basis, const Vector& g) {
  check_length(basis, g, "project_gradient");
  if (basis.uses_null_basis()) {
    return basis.q2 * (basis.q2.transpose() * g);
  }
  return g - basis.q1 * (basis.q1.transpose() * g);
}

Matrix project_columns(const ProjectorBasis& basis, const Matrix& columns) {
  if (columns.rows() != basis.dim()) {
    throw DimensionError("project_columns: row count does not match the basis dimension");
  }
  if (basis.uses_null_basis()) {
    return basis.q2 * (basis.q2.transpose() * columns);
  }
  return columns - basis.q1 * (basis.q1.transpose() * columns);
}

Vector restore_feasibility(const ProjectorBasis& basis, const Vector& x0) {
  check_length(basis, x0, "restore_feasibility");
  return x0 - basis.q1 * (basis.q1.transpose() * x0 - basis.b_reduced);
}

Residuals residuals(const ProjectorBasis& basis, const ConstraintSystem& cs, const Vector& x,
                    const Vector& g) {
  check_length(basis, x, "residuals");
  Residuals out;
  out.kkt = project_gradient(basis, g).lpNorm<Eigen::Infinity>();
  out.feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace rcm
