#pragma once

#include <Eigen/Core>

#include "rcm/types.hpp"

namespace rcm {

/// The affine feasible set {x : A x = b}.
struct ConstraintSystem {
  Matrix A;
  Vector b;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }

  /// Throws DimensionError / InvalidArgument unless 1 <= m <= n, b has m
  /// entries and every entry is finite.
  void validate() const;
};

/// Orthonormal bases produced by a column-pivoted QR of A^T:
///
///   A^T E = [Q1 | Q2] [R1; 0],
///
/// Q1 spans range(A^T), Q2 spans null(A), and the constraint reduces to
/// Q1^T x = b_reduced. The projector onto null(A) is P = I - Q1 Q1^T = Q2 Q2^T;
/// it is never formed densely. Immutable once built.
struct ProjectorBasis {
  int rank = 0;
  Matrix q1;  // n x r
  Matrix q2;  // n x (n - r)
  Matrix r1;  // r x m, upper trapezoidal
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;  // E, size m
  Vector b_reduced;                                                     // length r

  int dim() const { return static_cast<int>(q1.rows()); }
  /// True when the complement basis is the cheaper one to apply (r > n/2).
  bool uses_null_basis() const { return 2 * rank > dim(); }
};

/// KKT and feasibility residuals, both in the infinity norm.
struct Residuals {
  double kkt = 0.0;
  double feas = 0.0;
};

inline constexpr double kDefaultRankTol = 1e-10;

/// Factor A^T with column pivoting. The rank is the number of leading
/// diagonal entries with |R(i,i)| > rank_tol * |R(0,0)|.
///
/// Throws RankZero if no entry survives, and InconsistentConstraints when a
/// rank-deficient A has dependent rows that contradict b.
ProjectorBasis factor(const ConstraintSystem& cs, double rank_tol = kDefaultRankTol);

/// P g, via g - Q1 (Q1^T g) when r <= n/2 and Q2 (Q2^T g) otherwise.
Vector project_gradient(const ProjectorBasis& basis, const Vector& g);

/// Column-wise P G for an n x k block.
Matrix project_columns(const ProjectorBasis& basis, const Matrix& columns);

/// Euclidean-nearest point of the feasible set to x0:
/// x0 - Q1 (Q1^T x0 - b_reduced).
Vector restore_feasibility(const ProjectorBasis& basis, const Vector& x0);

/// kkt = ||P g||_inf (equal to ||grad f + A^T lambda||_inf for the
/// least-squares multiplier), feas = ||A x - b||_inf.
Residuals residuals(const ProjectorBasis& basis, const ConstraintSystem& cs, const Vector& x,
                    const Vector& g);

}  // namespace rcm
