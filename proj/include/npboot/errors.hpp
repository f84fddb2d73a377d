#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npboot {

/** Base class for all library errors. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Problems with the input data itself: missing files, malformed rows,
 * series too short to fit anything.  CLI exit code 2.
 */
class DataError : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public DataError {
 public:
  explicit FileNotFound(const std::string& path)
      : DataError("file not found: " + path) {}
};

/** Malformed cell; `row` is 1-based and counts the header row if present. */
class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class EmptyFile : public DataError {
 public:
  explicit EmptyFile(const std::string& path)
      : DataError("no data rows in: " + path) {}
};

class EmptySample : public DataError {
 public:
  using DataError::DataError;
  EmptySample() : DataError("empty sample") {}
};

class ShortSeries : public DataError {
 public:
  ShortSeries(std::size_t got, std::size_t need)
      : DataError("series has " + std::to_string(got) +
                  " observations, need at least " + std::to_string(need)) {}
};

class EmptyDistribution : public DataError {
 public:
  EmptyDistribution() : DataError("innovation distribution has no atoms") {}
};

class LengthMismatch : public DataError {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : DataError("length mismatch: " + std::to_string(a) + " vs " +
                  std::to_string(b)) {}
};

class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

/** Numerical breakdowns during estimation or resampling.  CLI exit code 3. */
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public NumericalError {
 public:
  DegenerateSample() : NumericalError("predictors have zero variance") {}
  using NumericalError::NumericalError;
};

}  // namespace npboot
