#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace framechange {

/// Base for every input or validation failure raised by the library.
/// The CLI maps these to exit code 1; anything else is an internal error.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class LineCountMismatch : public Error {
public:
  LineCountMismatch(std::size_t lemma_count, std::size_t raw_count)
      : Error("LineCountMismatch(" + std::to_string(lemma_count) + "," +
              std::to_string(raw_count) + ")"),
        lemma_count_(lemma_count), raw_count_(raw_count) {}

  std::size_t lemma_count() const noexcept { return lemma_count_; }
  std::size_t raw_count() const noexcept { return raw_count_; }

private:
  std::size_t lemma_count_;
  std::size_t raw_count_;
};

class SchemaError : public Error {
public:
  SchemaError(std::size_t line_no, const std::string &reason)
      : Error("SchemaError(line " + std::to_string(line_no) + "): " + reason),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

private:
  std::size_t line_no_;
};

class InvalidTarget : public Error {
public:
  explicit InvalidTarget(const std::string &surface)
      : Error("InvalidTarget: '" + surface +
              "' is not of the form lemma_pos") {}
};

class EmptyProfile : public Error {
public:
  EmptyProfile(std::string target, std::string period)
      : Error("EmptyProfile(" + target + ", " + period + ")"),
        target_(std::move(target)), period_(std::move(period)) {}

  const std::string &target() const noexcept { return target_; }
  const std::string &period() const noexcept { return period_; }

private:
  std::string target_;
  std::string period_;
};

class MissingTarget : public Error {
public:
  explicit MissingTarget(std::string target)
      : Error("MissingTarget(" + target + ")"), target_(std::move(target)) {}

  const std::string &target() const noexcept { return target_; }

private:
  std::string target_;
};

/// Raised when two keyed inputs disagree on their key sets.
/// `difference()` holds the symmetric difference, sorted.
class KeyMismatch : public Error {
public:
  explicit KeyMismatch(std::vector<std::string> difference)
      : Error(describe(difference)), difference_(std::move(difference)) {}

  const std::vector<std::string> &difference() const noexcept {
    return difference_;
  }

private:
  static std::string describe(const std::vector<std::string> &diff) {
    std::string msg = "KeyMismatch: symmetric difference {";
    for (std::size_t i = 0; i < diff.size(); ++i) {
      if (i) msg += ", ";
      msg += diff[i];
    }
    return msg + "}";
  }

  std::vector<std::string> difference_;
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

class FractionOutOfRange : public Error {
public:
  explicit FractionOutOfRange(double fraction)
      : Error("FractionOutOfRange: " + std::to_string(fraction) +
              " not in (0, 0.5]") {}
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace framechange
