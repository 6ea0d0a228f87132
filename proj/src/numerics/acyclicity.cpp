#include "causalcast/error.hpp"
#include "causalcast/numerics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>

namespace causalcast::numerics {

Acyclicity acyclicity(const Matrix& S) {
  if (S.rows() != S.cols()) throw Error(ErrorKind::ShapeError, "acyclicity: S must be square");
  const Matrix E = S.cwiseProduct(S).exp();
  Acyclicity out;
  out.h = std::max(0.0, E.trace() - static_cast<double>(S.rows()));
  out.gradient = 2.0 * E.transpose().cwiseProduct(S);
  return out;
}

}  // namespace causalcast::numerics
