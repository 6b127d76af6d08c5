#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sgflow {

// Failure classes map one-to-one onto process exit codes.
enum class ExitCode : int {
  ok = 0,
  config = 2,
  validation = 3,
  support_overflow = 4,
  picard = 5,
  elliptic = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

class SupportOverflowError : public Error {
 public:
  explicit SupportOverflowError(const std::string& what)
      : Error(ExitCode::support_overflow, what) {}
};

class EllipticError : public Error {
 public:
  explicit EllipticError(const std::string& what) : Error(ExitCode::elliptic, what) {}
};

class PicardError : public Error {
 public:
  PicardError(const std::string& what, std::vector<double> differences)
      : Error(ExitCode::picard, what), differences_(std::move(differences)) {}
  const std::vector<double>& differences() const noexcept { return differences_; }

 private:
  std::vector<double> differences_;
};

}  // namespace sgflow
