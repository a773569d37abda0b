#include "noc/features.hpp"

#include <fmt/format.h>

#include "noc/error.hpp"

namespace noc {

FeatureMap FeatureMap::one_hot(int num_states) {
  if (num_states <= 0) throw Error(ErrorCode::bad_shape, "one-hot map needs at least one state");
  return FeatureMap(Eigen::MatrixXd::Identity(num_states, num_states));
}

FeatureMap FeatureMap::from_matrix(Eigen::MatrixXd rows) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    throw Error(ErrorCode::bad_shape,
                fmt::format("feature matrix must be non-empty, got {}x{}", rows.rows(), rows.cols()));
  }
  if (!rows.allFinite()) throw Error(ErrorCode::bad_shape, "feature matrix has non-finite entries");
  return FeatureMap(std::move(rows));
}

}  // namespace noc
