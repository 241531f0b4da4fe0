#ifndef HONEST_ATE_ERRORS_HPP
#define HONEST_ATE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace honest_ate {

// Error categories, used by the CLI to pick exit codes.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Sample validation failures.
struct EmptyArmError : DataError { using DataError::DataError; };
struct NonFiniteError : DataError { using DataError::DataError; };
struct LengthMismatchError : DataError { using DataError::DataError; };
struct WeightsSumNotOneError : DataError { using DataError::DataError; };
struct DimensionMismatchError : DataError { using DataError::DataError; };

// Matching / variance preconditions.
struct TooFewOppositeError : DataError { using DataError::DataError; };
struct ArmTooSmallError : DataError { using DataError::DataError; };
struct EmptyWindowError : DataError { using DataError::DataError; };

// Bias LP.
struct UnboundedBiasError : NumericalError { using NumericalError::NumericalError; };
struct SolverStallError : NumericalError { using NumericalError::NumericalError; };

// Solution path.
struct NotArmLevelError : ConfigError { using ConfigError::ConfigError; };
struct InconsistentSystemError : NumericalError { using NumericalError::NumericalError; };
struct MaxKnotsExceededError : NumericalError { using NumericalError::NumericalError; };
struct KKTViolationError : NumericalError { using NumericalError::NumericalError; };
struct DegenerateNormalizerError : NumericalError { using NumericalError::NumericalError; };
struct NotBracketedError : NumericalError { using NumericalError::NumericalError; };

}  // namespace honest_ate

#endif  // HONEST_ATE_ERRORS_HPP
