#pragma once

#include "rcm/types.hpp"

namespace rcm {

/// Memory-one quasi-Newton pair defining
///
///   B = I - s s^T / (s^T s) + y y^T / (y^T y)   if |s^T y| > theta ||s||^2,
///   B = I                                       otherwise.
///
/// s is the accepted step, y the change of the projected gradient across it.
struct LbfgsPair {
  Vector s;
  Vector y;
  double sy = 0.0;
  double ss = 0.0;
  double yy = 0.0;
  bool usable = false;
};

/// Guard test |s^T y| > theta ||s||^2; a zero or empty s is never usable.
LbfgsPair make_lbfgs_pair(Vector s, Vector y, double theta);

/// The pair used before any step has been accepted (B = I).
LbfgsPair zero_lbfgs_pair(Eigen::Index n);

/// B^{-1} v in closed form (three inner products, O(n)).
Vector apply_inverse(const LbfgsPair& pair, const Vector& v);

/// B v.
Vector apply_forward(const LbfgsPair& pair, const Vector& v);

}  // namespace rcm
