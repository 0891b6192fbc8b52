#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oovt {

/// Malformed or inconsistent input data. Carries the offending file and line when known.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_ = 0;
};

/// Bad arguments or configuration supplied by the caller.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// None of the selected in-vocabulary words has any known target.
class NoTranslation : public std::runtime_error {
 public:
  explicit NoTranslation(const std::string& oov)
      : std::runtime_error("no translation available for '" + oov + "'"), oov_(oov) {}
  const std::string& oov() const { return oov_; }

 private:
  std::string oov_;
};

/// A numerical failure during training (NaN/inf loss or parameters).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oovt
