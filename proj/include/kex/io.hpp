#pragma once

#include <string>
#include <variant>
#include <vector>

#include "kex/diffusion.hpp"
#include "kex/nystrom.hpp"

namespace kex {

// Parsed point file. May hold zero rows (header-only input); converting to a
// MeasuredSet then fails with config_error.
struct LoadedData {
  RowMatrixXd points;
  Eigen::VectorXd weights;
  std::vector<std::string> labels;

  Index count() const { return points.rows(); }
  MeasuredSet to_set() const;
};

// Headered CSV, one point per row. The measure column (default name
// "weight") selects the weights when present; a "label" column is passed
// through opaquely; every other column is a coordinate.
LoadedData load_csv(const std::string& path, const std::string& measure_col = "weight");

void save_points_csv(const std::string& path, const MeasuredSet& s);

// Headerless numeric CSV, used for precomputed kernel matrices.
RowMatrixXd load_matrix_csv(const std::string& path);

// Versioned JSON model file with full-precision floats and a content digest.
void save_model(const std::string& path, const ExtensionModel& m, double rank_tol);
void save_model(const std::string& path, const DiffusionModel& m, double rank_tol);

struct LoadedModel {
  std::variant<ExtensionModel, DiffusionModel> model;
  double rank_tol = kDefaultRankTol;

  bool is_diffusion() const { return std::holds_alternative<DiffusionModel>(model); }
  const ExtensionModel& extension() const { return std::get<ExtensionModel>(model); }
  const DiffusionModel& diffusion() const { return std::get<DiffusionModel>(model); }
};

LoadedModel load_model(const std::string& path);

// shortest representation that parses back to the same double
std::string format_double(double v);

// Flat key=value text, one pair per line, insertion order preserved.
class Report {
 public:
  void add(std::string_view key, double value);
  void add(std::string_view key, Index value);
  void add(std::string_view key, std::string_view value);
  void add_flag(std::string_view key, bool pass);  // pass | fail

  const std::string& text() const { return text_; }
  void save(const std::string& path) const;

 private:
  std::string text_;
};

}  // namespace kex
