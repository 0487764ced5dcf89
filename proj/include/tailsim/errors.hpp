#pragma once

#include <stdexcept>
#include <string>

namespace tailsim {

/// Invalid experiment description (bad noise spec, M > N, alpha out of range, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An update referenced a global round that was already evicted from the
/// server's model history.
struct StalenessOverflowError : std::runtime_error {
  long round;
  explicit StalenessOverflowError(long round_, const std::string& msg)
      : std::runtime_error(msg), round(round_) {}
};

/// The aggregation policy received updates it cannot process
/// (e.g. delay compensation without Hessian approximators).
struct PolicyViolationError : std::runtime_error {
  explicit PolicyViolationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A non-finite value surfaced during optimization.
struct NumericError : std::runtime_error {
  int client_id;
  int step;
  NumericError(int client_id_, int step_, const std::string& msg)
      : std::runtime_error(msg), client_id(client_id_), step(step_) {}
};

}  // namespace tailsim
