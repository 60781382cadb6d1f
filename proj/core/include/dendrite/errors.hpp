#ifndef DENDRITE_ERRORS_HPP_
#define DENDRITE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dendrite {

/// Invalid parameters, malformed config files, or an initial state the
/// schemes cannot start from (e.g. E1 <= 0). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Config key-level error; carries the offending key.
class ConfigKeyError : public ConfigError {
 public:
  ConfigKeyError(std::string key, const std::string& what)
      : ConfigError(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A key that the config grammar does not know.
class UnknownKeyError : public ConfigKeyError {
 public:
  using ConfigKeyError::ConfigKeyError;
};

/// A mandatory key is absent.
class MissingKeyError : public ConfigKeyError {
 public:
  using ConfigKeyError::ConfigKeyError;
};

/// A value that does not parse or lies outside its admissible range.
class InvalidValueError : public ConfigKeyError {
 public:
  using ConfigKeyError::ConfigKeyError;
};

/// S1 > 0 violates S1 < (1 - sigma)^2.
class StabilizerBoundError : public InvalidValueError {
 public:
  using InvalidValueError::InvalidValueError;
};

/// Linear solver failure or a violated internal invariant of a step.
/// CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The modified energy increased between two ledger rows in strict mode.
/// CLI exit code 4.
class EnergyLawViolation : public std::runtime_error {
 public:
  explicit EnergyLawViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Snapshot / checkpoint / ledger persistence failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dendrite

#endif  // DENDRITE_ERRORS_HPP_
