#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lave {

// Root of everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. Carries the offending line for JSONL input
// (0 when not line-oriented).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The judge's completion did not contain a usable rating.
class ParseError : public Error {
 public:
  explicit ParseError(std::string completion)
      : Error("no rating in {1,2,3} found in completion"), completion_(std::move(completion)) {}

  const std::string& completion() const noexcept { return completion_; }

 private:
  std::string completion_;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class RateLimitError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Replay backend has no stored completion for a prompt.
class MissingFixture : public BackendError {
 public:
  explicit MissingFixture(std::string key)
      : BackendError("no replay fixture for prompt hash " + key), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

class StatsError : public Error {
 public:
  using Error::Error;
};

// Correlation is undefined, e.g. one of the inputs is constant.
class UndefinedCorrelation : public StatsError {
 public:
  using StatsError::StatsError;
};

}  // namespace lave
