#pragma once

#include <stdexcept>
#include <string>

namespace kex {

// Error classes map one-to-one onto CLI exit codes.
enum class errc : int {
  config = 2,
  io = 3,
  dimension = 4,
  numerical = 5,
  isolated_point = 6,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

struct config_error : error {
  explicit config_error(const std::string& w) : error(errc::config, w) {}
};

struct io_error : error {
  explicit io_error(const std::string& w) : error(errc::io, w) {}
};

struct dimension_error : error {
  explicit dimension_error(const std::string& w) : error(errc::dimension, w) {}
};

struct numerical_error : error {
  explicit numerical_error(const std::string& w) : error(errc::numerical, w) {}
};

struct isolated_point_error : error {
  explicit isolated_point_error(const std::string& w) : error(errc::isolated_point, w) {}
};

}  // namespace kex
