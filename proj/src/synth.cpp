#include "kex/synth.hpp"

#include <cmath>

#include "kex/rng.hpp"

namespace kex {

namespace {

constexpr double kPi = 3.14159265358979323846;

LoadedData swiss_roll(Index n, double noise, Rng& rng) {
  LoadedData out;
  out.points.resize(n, 3);
  out.weights = Eigen::VectorXd::Ones(n);
  out.labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double t = 1.5 * kPi + 3.0 * kPi * rng.uniform();
    const double h = 21.0 * rng.uniform();
    out.points(i, 0) = t * std::cos(t) + noise * rng.normal();
    out.points(i, 1) = h + noise * rng.normal();
    out.points(i, 2) = t * std::sin(t) + noise * rng.normal();
    out.labels.push_back(format_double(t));
  }
  return out;
}

LoadedData circles(Index n, double noise, Rng& rng) {
  LoadedData out;
  out.points.resize(n, 2);
  out.weights = Eigen::VectorXd::Ones(n);
  out.labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int which = static_cast<int>(i % 2);
    const double radius = which == 0 ? 1.0 : 2.0;
    const double theta = 2.0 * kPi * rng.uniform();
    out.points(i, 0) = radius * std::cos(theta) + noise * rng.normal();
    out.points(i, 1) = radius * std::sin(theta) + noise * rng.normal();
    out.labels.push_back(std::to_string(which));
  }
  return out;
}

LoadedData gaussian_blobs(Index n, double noise, Rng& rng) {
  static constexpr double centers[3][2] = {{0.0, 0.0}, {6.0, 0.0}, {3.0, 5.0}};
  const double spread = noise > 0.0 ? noise : 1.0;
  LoadedData out;
  out.points.resize(n, 2);
  out.weights = Eigen::VectorXd::Ones(n);
  out.labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int which = static_cast<int>(i % 3);
    out.points(i, 0) = centers[which][0] + spread * rng.normal();
    out.points(i, 1) = centers[which][1] + spread * rng.normal();
    out.labels.push_back(std::to_string(which));
  }
  return out;
}

}  // namespace

LoadedData synth_dataset(const std::string& shape, Index n, double noise, std::uint64_t seed) {
  if (n < 1) throw config_error("synthetic data needs n >= 1");
  if (!(noise >= 0.0)) throw config_error("noise must be non-negative");
  Rng rng(seed);
  if (shape == "swiss-roll") return swiss_roll(n, noise, rng);
  if (shape == "circles") return circles(n, noise, rng);
  if (shape == "gaussian-blobs") return gaussian_blobs(n, noise, rng);
  throw config_error("unknown shape '" + shape +
                     "' (expected swiss-roll, circles or gaussian-blobs)");
}

}  // namespace kex
