#pragma once

#include <stdexcept>
#include <string>

namespace linkpred {

// Error taxonomy used across the toolkit. The CLI maps these onto exit
// codes: invalid_argument_error -> 2, data errors -> 3, convergence -> 4.

struct malformed_input_error : std::runtime_error {
  explicit malformed_input_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct missing_data_error : std::runtime_error {
  explicit missing_data_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct invalid_argument_error : std::invalid_argument {
  explicit invalid_argument_error(const std::string& what)
      : std::invalid_argument(what) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

struct empty_series_error : std::runtime_error {
  explicit empty_series_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

struct schema_error : std::runtime_error {
  explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace linkpred
