#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace playstyle {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed magic, unsupported version, unparsable header.
class FormatError : public Error {
 public:
  using Error::Error;
};

// File structure is valid but records are missing or cut short.
class CorruptionError : public Error {
 public:
  CorruptionError(const std::string& what, std::size_t record)
      : Error(what + " (record " + std::to_string(record) + ")"), record_(record) {}
  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Dimension / length mismatches between tensors, codebooks or distributions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Requested more elements than available, or a zero-sized input.
class SizeError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class PredictionError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace playstyle
