#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace eulergel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// det F <= 0 (or a non-finite state) where the constitutive law needs det F > 0.
class DegenerateState : public Error {
 public:
  using Error::Error;
};

class NonPositiveStretch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class AllPeriodic : public Error {
 public:
  using Error::Error;
};

/// det F fell below the positivity floor during transport.
class LossOfPositivity : public Error {
 public:
  LossOfPositivity(std::size_t node, double det_f, double floor,
                   const std::string& quantity = "det F")
      : Error("loss of positivity: " + quantity + " = " + std::to_string(det_f) + " at node " +
              std::to_string(node) + " (floor " + std::to_string(floor) + ")"),
        node_(node),
        det_f_(det_f) {}

  std::size_t node() const noexcept { return node_; }
  double det_f() const noexcept { return det_f_; }

 private:
  std::size_t node_;
  double det_f_;
};

/// Newton iteration did not reach tolerance; carries the last residual norm.
class NonlinearSolveFailure : public Error {
 public:
  NonlinearSolveFailure(const std::string& which, int iterations, double residual)
      : Error(which + " Newton failed after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Configuration error; key() names the offending dotted key, e.g. "material.nu".
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Time stepping gave up after exhausting dt halvings.
class SolverFailure : public Error {
 public:
  SolverFailure(std::size_t step, double time, double residual, const std::string& reason)
      : Error("solver failure at step " + std::to_string(step) + " (t = " +
              std::to_string(time) + "): " + reason),
        step_(step),
        time_(time),
        residual_(residual) {}

  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t step_;
  double time_;
  double residual_;
};

}  // namespace eulergel
