#include "rcm/problem.hpp"

#include "rcm/errors.hpp"

namespace rcm {

void ProblemInstance::validate() const {
  cs.validate();
  if (x0.size() != cs.cols()) {
    throw DimensionError("problem '" + name + "': initial point does not match the constraint width");
  }
  if (!x0.allFinite()) {
    throw InvalidArgument("problem '" + name + "': initial point is not finite");
  }
  if (!objective || !gradient) {
    throw InvalidArgument("problem '" + name + "': objective and gradient are required");
  }
}

}  // namespace rcm
