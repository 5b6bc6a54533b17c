#pragma once

#include <functional>

#include <Eigen/Core>

namespace rcm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ObjectiveFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

}  // namespace rcm
