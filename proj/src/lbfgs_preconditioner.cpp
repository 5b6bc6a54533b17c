#include "rcm/lbfgs_preconditioner.hpp"

#include <cmath>
#include <utility>

#include "rcm/errors.hpp"

namespace rcm {

LbfgsPair make_lbfgs_pair(Vector s, Vector y, double theta) {
  if (s.size() != y.size()) {
    throw DimensionError("lbfgs pair: s and y differ in length");
  }
  LbfgsPair pair;
  pair.sy = s.dot(y);
  pair.ss = s.squaredNorm();
  pair.yy = y.squaredNorm();
  pair.usable = pair.ss > 0.0 && std::abs(pair.sy) > theta * pair.ss;
  pair.s = std::move(s);
  pair.y = std::move(y);
  return pair;
}

LbfgsPair zero_lbfgs_pair(Eigen::Index n) {
  return make_lbfgs_pair(Vector::Zero(n), Vector::Zero(n), 1.0);
}

Vector apply_inverse(const LbfgsPair& pair, const Vector& v) {
  if (v.size() != pair.s.size()) {
    throw DimensionError("apply_inverse: vector length does not match the pair");
  }
  if (!pair.usable) {
    return v;
  }
  const double sv = pair.s.dot(v);
  const double yv = pair.y.dot(v);
  const double s_coef = 2.0 * pair.yy * sv / (pair.sy * pair.sy) - yv / pair.sy;
  return v - (sv / pair.sy) * pair.y + s_coef * pair.s;
}

Vector apply_forward(const LbfgsPair& pair, const Vector& v) {
  if (v.size() != pair.s.size()) {
    throw DimensionError("apply_forward: vector length does not match the pair");
  }
  if (!pair.usable) {
    return v;
  }
  return v - (pair.s.dot(v) / pair.ss) * pair.s + (pair.y.dot(v) / pair.yy) * pair.y;
}

}  // namespace rcm
