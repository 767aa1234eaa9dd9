#pragma once

#include <stdexcept>
#include <string>

namespace meshmap {

// Invalid architecture/workload/run configuration. `field` is the dotted
// path of the offending entry when known (e.g. "es.lambda_part").
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, std::string field = {})
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A workload (or a requested allocation) cannot fit the available cores.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Genotype does not satisfy the core budget identity or is not a permutation.
class GenotypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RoutingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace meshmap
