#pragma once

#include <stdexcept>
#include <string>

namespace myofuzz {

// Error families map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

// Bad configuration, manifest, or precondition on user-supplied parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Malformed or degenerate input data.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// Solver or estimator failure.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

// Caller broke a documented precondition of a pure function.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace myofuzz

namespace myofuzz {

// Runs fn(); an Error escaping it is rethrown as the same family with
// `context` prefixed to the message.
template <class Fn>
decltype(auto) with_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what());
  }
}

}  // namespace myofuzz
