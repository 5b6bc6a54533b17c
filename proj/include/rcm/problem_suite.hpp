#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcm/constraint_projection.hpp"
#include "rcm/problem.hpp"

namespace rcm {

/// Number of constraint rows as a fraction of n.
enum class RowFraction { Half, Third, TwoThirds };

/// Benchmark constraint A = [A1 | A2], b = 2 ones(m): A1 is the m x m
/// tridiagonal matrix with 2 on the diagonal and 1 off it, A2 is m x (n - m)
/// with constant rows alternating all-ones and all-twos (1, 2, 1, 2, ...).
/// A has full row rank because A1 is positive definite.
///
/// Throws DimensionError if n < 2 or n is not divisible by the fraction's
/// denominator.
ConstraintSystem build_constraints(int n, RowFraction rows = RowFraction::Half);

struct CatalogEntry {
  std::string name;
  bool convex = false;
  int default_n = 2;
  /// Fixed-dimension problems accept only default_n.
  bool scalable = true;
  /// Extra divisibility requirement on n (beyond evenness).
  int n_multiple_of = 2;
  /// Published optimum at table_n, for reference only.
  std::optional<double> table_fstar;
  int table_n = 0;
  std::function<ProblemInstance(int n)> build;
};

/// The benchmark set: convex (sphere, sum_squares, trid,
/// rotated_hyper_ellipsoid, booth, matyas, zakharov, quartic_noise) followed by
/// non-convex (rosenbrock, dixon_price, griewank, levy, rastrigin, ackley,
/// powell, styblinski_tang, schwefel, beale, three_hump_camel, six_hump_camel).
const std::vector<CatalogEntry>& catalog();

/// Throws UnknownProblem for an unrecognized name.
const CatalogEntry& find_problem(std::string_view name);

/// Instance with the FORA12-style constraint and x0 = ones(n). Without n the
/// entry's default dimension is used; a fixed-dimension problem rejects any
/// other n with DimensionError.
ProblemInstance make_problem(std::string_view name, std::optional<int> n = std::nullopt);

struct QuadraticSolution {
  Vector x_star;
  double f_star = 0.0;  // 0.5 x^T Q x + c^T x, without any constant
};

/// Dense reference solution of min 0.5 x^T Q x + c^T x s.t. A x = b, by
/// null-space elimination with a Householder QR of A^T independent of
/// factor(). Requires full row rank A. Throws SingularKkt when Q is not
/// positive definite on null(A).
QuadraticSolution quadratic_oracle(const ConstraintSystem& cs, const Matrix& q, const Vector& c);

}  // namespace rcm
