#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kex/errors.hpp"

namespace kex {

using Index = Eigen::Index;

// Points are stored row-major so each point's coordinates are contiguous for
// the simd kernels.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Finite point set in ambient space with a strictly positive per-point
// measure. Immutable after construction.
class MeasuredSet {
 public:
  MeasuredSet(RowMatrixXd points, Eigen::VectorXd weights,
              std::vector<std::string> labels = {});

  // counting measure: every weight = 1
  static MeasuredSet with_uniform_weights(RowMatrixXd points,
                                          std::vector<std::string> labels = {});

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const RowMatrixXd& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const double* point(Index i) const { return points_.row(i).data(); }

  // bitwise equality of points and weights
  bool same_data(const MeasuredSet& other) const;

 private:
  RowMatrixXd points_;
  Eigen::VectorXd weights_;
  std::vector<std::string> labels_;
};

// Train/test partition of a parent set. The parent is held by value; both
// sides inherit its weights.
class SplitView {
 public:
  SplitView(MeasuredSet parent, std::vector<Index> test_indices);

  const MeasuredSet& parent() const { return parent_; }
  const std::vector<Index>& train_indices() const { return train_; }
  const std::vector<Index>& test_indices() const { return test_; }

  MeasuredSet train_set() const;
  MeasuredSet test_set() const;  // throws config_error when the test side is empty

  double train_volume() const;
  double test_volume() const;

 private:
  MeasuredSet parent_;
  std::vector<Index> train_;
  std::vector<Index> test_;
};

// sum_i f(x_i) mu_i, strict left-to-right order
double integrate(const Eigen::Ref<const Eigen::VectorXd>& f, const MeasuredSet& s);

// sum_i f(x_i) g(x_i) mu_i
double l2_inner(const Eigen::Ref<const Eigen::VectorXd>& f,
                const Eigen::Ref<const Eigen::VectorXd>& g, const MeasuredSet& s);

double total_volume(const MeasuredSet& s);

SplitView split(const MeasuredSet& s, std::vector<Index> test_indices);

}  // namespace kex
