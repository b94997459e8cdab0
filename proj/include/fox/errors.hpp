#pragma once

#include <stdexcept>
#include <string>

namespace fox {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// An input value violated an operation's precondition.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// Design matrix is numerically rank-deficient.
class CollinearError : public Error {
 public:
  CollinearError(const std::string& msg, int column)
      : Error(msg), dependent_column(column) {}
  // 0 is the intercept column; j >= 1 is feature j-1.
  int dependent_column;
};

// Too few rows to fit the requested number of coefficients.
class InsufficientDataError : public Error {
 public:
  InsufficientDataError(const std::string& msg, long n, int k)
      : Error(msg), n(n), k(k) {}
  long n;
  int k;
};

// Requested a prediction for an image size without a trained model pair.
class UntrainedImageSizeError : public Error {
 public:
  UntrainedImageSizeError(const std::string& msg, int image_size)
      : Error(msg), image_size(image_size) {}
  int image_size;
};

// The latency constraint could not be met.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& msg, double best_latency_seen)
      : Error(msg), best_latency_seen(best_latency_seen) {}
  double best_latency_seen;
};

// Exhaustive enumeration refused; carries the exact count as decimal text.
class EnumerationTooLargeError : public Error {
 public:
  EnumerationTooLargeError(const std::string& msg, std::string count)
      : Error(msg), exact_count(std::move(count)) {}
  std::string exact_count;
};

// File or stream contents did not match the expected schema.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace fox
