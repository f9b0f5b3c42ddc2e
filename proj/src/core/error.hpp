#pragma once

#include <stdexcept>
#include <string>

namespace ecrisk {

/// A precondition of an estimator or model was violated.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Reading or parsing external data failed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ecrisk
