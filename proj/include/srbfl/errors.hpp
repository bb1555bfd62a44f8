#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srbfl {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Gradient descent produced non-finite parameters.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// Accuracy requested for a loss kind that has no accuracy metric.
class UnsupportedMetric : public Error {
 public:
  using Error::Error;
};

// A transaction references a payload digest the off-chain store cannot resolve.
class DanglingPayload : public Error {
 public:
  using Error::Error;
};

// Stored payload bytes no longer match their content address.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// promote_final called on a sub-chain with no committed transactions.
class NothingToPromote : public Error {
 public:
  using Error::Error;
};

// Cumulative fusion of two dogmatic opinions (u1 = u2 = 0).
class UndefinedFusion : public Error {
 public:
  using Error::Error;
};

// No shard has any device matching the task's required data type.
class NoEligibleShard : public Error {
 public:
  using Error::Error;
};

// Config file failed schema or invariant validation; names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace srbfl
