#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace phlat {

using cx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr cx iu{0.0, 1.0};

inline constexpr const char* code_version = "0.1.0";
inline constexpr const char* csv_schema_version = "1";

/// Bad or inconsistent run configuration (CLI maps this to exit code 2).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: eigensolver breakdown, truncation leakage, censored
/// fits and the like (CLI maps this to exit code 3).
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phlat
