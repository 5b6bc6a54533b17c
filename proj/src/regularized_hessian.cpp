#include "rcm/regularized_hessian.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rcm/errors.hpp"

namespace rcm {

namespace {

constexpr double kSingularRelTol = 1e-14;

Vector checked_gradient(const GradientFn& grad, const Vector& x, Eigen::Index n) {
  Vector g = grad(x);
  if (g.size() != n) {
    throw DimensionError(fmt::format("gradient returned length {}, expected {}", g.size(), n));
  }
  if (!g.allFinite()) {
    throw NonFiniteGradient("gradient is not finite at a finite-difference probe");
  }
  return g;
}

}  // namespace

ProjectedHessian fd_projected_hessian(const GradientFn& grad, const ProjectorBasis& basis,
                                      const Vector& x, double fd_eps, int eval_point_id) {
  const Eigen::Index n = basis.dim();
  if (x.size() != n) {
    throw DimensionError("fd_projected_hessian: point has the wrong length");
  }
  if (!(fd_eps > 0.0) || !std::isfinite(fd_eps)) {
    throw InvalidArgument("finite-difference increment must be positive");
  }

  const Vector pg0 = project_gradient(basis, checked_gradient(grad, x, n));
  const Matrix directions = project_columns(basis, Matrix::Identity(n, n));

  Matrix probes(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = x + fd_eps * directions.col(i);
    probes.col(i) = checked_gradient(grad, xi, n);
  }

  ProjectedHessian out;
  out.h = (project_columns(basis, probes).colwise() - pg0) / fd_eps;
  out.eval_point_id = eval_point_id;
  out.fd_eps = fd_eps;
  return out;
}

ProjectedHessian exact_projected_hessian(const Matrix& hess, const ProjectorBasis& basis,
                                         int eval_point_id) {
  const Eigen::Index n = basis.dim();
  if (hess.rows() != n || hess.cols() != n) {
    throw DimensionError("exact_projected_hessian: Hessian has the wrong shape");
  }
  if (!hess.allFinite()) {
    throw InvalidArgument("analytic Hessian is not finite");
  }
  // P H P = (P (P H)^T)^T, using symmetry of P.
  const Matrix ph = project_columns(basis, hess);
  ProjectedHessian out;
  out.h = project_columns(basis, ph.transpose()).transpose();
  out.eval_point_id = eval_point_id;
  return out;
}

RegularizedFactor build_and_factor(const ProjectedHessian& hessian, double sigma0, double dt) {
  if (!(sigma0 > 0.0) || !(dt > 0.0)) {
    throw InvalidArgument("regularization requires sigma0 > 0 and dt > 0");
  }
  const Eigen::Index n = hessian.h.rows();
  RegularizedFactor out;
  out.dt_used = dt;
  out.shift = sigma0 / dt;
  Matrix b = hessian.h;
  b.diagonal().array() += out.shift;
  const double scale = b.norm();
  if (!std::isfinite(scale)) {
    throw SingularFactor("regularized matrix is not finite");
  }
  out.qr.compute(b);
  const auto diag = out.qr.matrixQR().diagonal().cwiseAbs();
  if (n > 0 && !(diag.minCoeff() >= kSingularRelTol * scale)) {
    throw SingularFactor(fmt::format(
        "regularized matrix is singular: min |R(i,i)| = {:.3e}, ||B|| = {:.3e}", diag.minCoeff(),
        scale));
  }
  return out;
}

Vector solve(const RegularizedFactor& factor, const Vector& rhs) {
  if (rhs.size() != factor.qr.rows()) {
    throw DimensionError("solve: right-hand side has the wrong length");
  }
  return factor.qr.solve(rhs);
}

}  // namespace rcm
