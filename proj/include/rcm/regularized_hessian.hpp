#pragma once

#include <Eigen/QR>

#include "rcm/constraint_projection.hpp"
#include "rcm/types.hpp"

namespace rcm {

inline constexpr double kDefaultFdEps = 1e-6;

/// Dense approximation of P (d^2 f) P at one iterate.
struct ProjectedHessian {
  Matrix h;
  int eval_point_id = -1;
  double fd_eps = 0.0;  // 0 when the matrix came from an analytic Hessian
};

/// Forward-difference projected Hessian. Column i is
///
///   (P g(x + eps P e_i) - P g(x)) / eps,
///
/// assembled in index order from n + 1 gradient evaluations. The result is
/// not symmetrized. Throws NonFiniteGradient if any probe is non-finite.
ProjectedHessian fd_projected_hessian(const GradientFn& grad, const ProjectorBasis& basis,
                                      const Vector& x, double fd_eps = kDefaultFdEps,
                                      int eval_point_id = 0);

/// P hess P from an analytic Hessian.
ProjectedHessian exact_projected_hessian(const Matrix& hess, const ProjectorBasis& basis,
                                         int eval_point_id = 0);

/// Householder QR of B = (sigma0 / dt) I + H.
struct RegularizedFactor {
  Eigen::HouseholderQR<Matrix> qr;
  double dt_used = 0.0;
  double shift = 0.0;  // sigma0 / dt_used
  /// Set when the factor is carried over from an earlier iterate.
  bool stale = false;
};

/// Throws SingularFactor when some |R(i,i)| < 1e-14 ||B||_F.
RegularizedFactor build_and_factor(const ProjectedHessian& hessian, double sigma0, double dt);

/// d with B d = rhs.
Vector solve(const RegularizedFactor& factor, const Vector& rhs);

}  // namespace rcm
