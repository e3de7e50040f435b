#pragma once

#include <stdexcept>
#include <string>

namespace riskkit {

// Error categories map one-to-one onto process exit codes:
//   config/schema -> 2, data integrity -> 3, numeric/convergence -> 4.
enum class ErrorClass { config = 2, integrity = 3, numeric = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass c, const std::string& msg) : std::runtime_error(msg), class_(c) {}
  ErrorClass error_class() const { return class_; }

 private:
  ErrorClass class_;
};

// -- configuration / schema / usage -----------------------------------------

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct LabelError : Error {
  explicit LabelError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct StateError : Error {
  explicit StateError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct ReportError : Error {
  explicit ReportError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct SpecError : Error {
  explicit SpecError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct EncodingError : Error {
  explicit EncodingError(const std::string& m) : Error(ErrorClass::config, m) {}
};

// Raised when a cross-validation training fold ends up single-class.
struct StratificationError : Error {
  explicit StratificationError(const std::string& m) : Error(ErrorClass::config, m) {}
};

// -- data integrity ---------------------------------------------------------

struct IntegrityError : Error {
  explicit IntegrityError(const std::string& m) : Error(ErrorClass::integrity, m) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ErrorClass::integrity, m) {}
};

struct DegenerateSampleError : Error {
  explicit DegenerateSampleError(const std::string& m) : Error(ErrorClass::integrity, m) {}
};

struct InstabilityError : Error {
  explicit InstabilityError(const std::string& m) : Error(ErrorClass::integrity, m) {}
};

// -- numerics / convergence -------------------------------------------------

struct DesignError : Error {
  explicit DesignError(const std::string& m) : Error(ErrorClass::numeric, m) {}
};

struct SeparationError : Error {
  explicit SeparationError(const std::string& m) : Error(ErrorClass::numeric, m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorClass::numeric, m) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& m) : Error(ErrorClass::numeric, m) {}
};

}  // namespace riskkit
