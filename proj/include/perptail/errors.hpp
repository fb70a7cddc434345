#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace perptail {

/// Numeric failure that may carry the best value computed before giving up.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
  numeric_error(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}

  std::optional<double> partial() const { return partial_; }

 private:
  std::optional<double> partial_;
};

}  // namespace perptail
