#pragma once

#include <Eigen/Core>

namespace noc {

/// State features over a finite state set, stored as one row per state.
class FeatureMap {
 public:
  /// Tabular map: state s -> e_s.
  static FeatureMap one_hot(int num_states);

  /// Arbitrary features; row s is the feature vector of state s.
  static FeatureMap from_matrix(Eigen::MatrixXd rows);

  int dimension() const { return static_cast<int>(rows_.cols()); }
  int num_states() const { return static_cast<int>(rows_.rows()); }

  auto evaluate(int s) const { return rows_.row(s).transpose(); }

  const Eigen::MatrixXd& matrix() const { return rows_; }

 private:
  explicit FeatureMap(Eigen::MatrixXd rows) : rows_(std::move(rows)) {}

  Eigen::MatrixXd rows_;
};

}  // namespace noc
