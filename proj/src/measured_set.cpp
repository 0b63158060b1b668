#include "kex/measured_set.hpp"

#include <algorithm>
#include <cmath>

#include "kex/simd.hpp"

namespace kex {

MeasuredSet::MeasuredSet(RowMatrixXd points, Eigen::VectorXd weights,
                         std::vector<std::string> labels)
    : points_(std::move(points)), weights_(std::move(weights)), labels_(std::move(labels)) {
  if (points_.rows() < 1) {
    throw config_error("a measured set needs at least one point");
  }
  if (weights_.size() != points_.rows()) {
    throw dimension_error("weight count (" + std::to_string(weights_.size()) +
                          ") does not match point count (" + std::to_string(points_.rows()) +
                          ")");
  }
  for (Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] <= 0.0) {
      throw config_error("weight " + std::to_string(i) + " is not strictly positive");
    }
  }
  if (!labels_.empty() && static_cast<Index>(labels_.size()) != points_.rows()) {
    throw dimension_error("label count does not match point count");
  }
}

MeasuredSet MeasuredSet::with_uniform_weights(RowMatrixXd points,
                                              std::vector<std::string> labels) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(points.rows());
  return MeasuredSet(std::move(points), std::move(w), std::move(labels));
}

bool MeasuredSet::same_data(const MeasuredSet& other) const {
  if (size() != other.size() || dim() != other.dim()) return false;
  if (!(points_.array() == other.points_.array()).all()) return false;
  return (weights_.array() == other.weights_.array()).all();
}

SplitView::SplitView(MeasuredSet parent, std::vector<Index> test_indices)
    : parent_(std::move(parent)), test_(std::move(test_indices)) {
  const Index n = parent_.size();
  std::vector<bool> is_test(static_cast<std::size_t>(n), false);
  for (Index idx : test_) {
    if (idx < 0 || idx >= n) {
      throw dimension_error("test index " + std::to_string(idx) + " out of range [0, " +
                            std::to_string(n) + ")");
    }
    if (is_test[static_cast<std::size_t>(idx)]) {
      throw dimension_error("duplicate test index " + std::to_string(idx));
    }
    is_test[static_cast<std::size_t>(idx)] = true;
  }
  if (static_cast<Index>(test_.size()) == n) {
    throw config_error("test set covers every point; training side would be empty");
  }
  std::sort(test_.begin(), test_.end());
  train_.reserve(static_cast<std::size_t>(n) - test_.size());
  for (Index i = 0; i < n; ++i) {
    if (!is_test[static_cast<std::size_t>(i)]) train_.push_back(i);
  }
}

namespace {

MeasuredSet subset(const MeasuredSet& s, const std::vector<Index>& idx) {
  RowMatrixXd pts(static_cast<Index>(idx.size()), s.dim());
  Eigen::VectorXd w(static_cast<Index>(idx.size()));
  std::vector<std::string> labels;
  if (!s.labels().empty()) labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    pts.row(static_cast<Index>(r)) = s.points().row(idx[r]);
    w[static_cast<Index>(r)] = s.weights()[idx[r]];
    if (!s.labels().empty()) labels.push_back(s.labels()[static_cast<std::size_t>(idx[r])]);
  }
  return MeasuredSet(std::move(pts), std::move(w), std::move(labels));
}

}  // namespace

MeasuredSet SplitView::train_set() const { return subset(parent_, train_); }

MeasuredSet SplitView::test_set() const {
  if (test_.empty()) throw config_error("split has an empty test side");
  return subset(parent_, test_);
}

double SplitView::train_volume() const {
  double v = 0.0;
  for (Index i : train_) v += parent_.weights()[i];
  return v;
}

double SplitView::test_volume() const {
  double v = 0.0;
  for (Index i : test_) v += parent_.weights()[i];
  return v;
}

double integrate(const Eigen::Ref<const Eigen::VectorXd>& f, const MeasuredSet& s) {
  if (f.size() != s.size()) {
    throw dimension_error("integrand has " + std::to_string(f.size()) + " values, set has " +
                          std::to_string(s.size()) + " points");
  }
  return simd::scalar::dot(f.data(), s.weights().data(), static_cast<std::size_t>(f.size()));
}

double l2_inner(const Eigen::Ref<const Eigen::VectorXd>& f,
                const Eigen::Ref<const Eigen::VectorXd>& g, const MeasuredSet& s) {
  if (f.size() != s.size() || g.size() != s.size()) {
    throw dimension_error("inner-product arguments do not match the set size");
  }
  return simd::scalar::dot3(f.data(), g.data(), s.weights().data(),
                            static_cast<std::size_t>(f.size()));
}

double total_volume(const MeasuredSet& s) {
  double v = 0.0;
  for (Index i = 0; i < s.size(); ++i) v += s.weights()[i];
  return v;
}

SplitView split(const MeasuredSet& s, std::vector<Index> test_indices) {
  return SplitView(s, std::move(test_indices));
}

}  // namespace kex
