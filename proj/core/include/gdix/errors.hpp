#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdix {

enum class ErrorKind {
  // manifold
  Domain,
  DegenerateMetric,
  ZeroVector,
  // geodesics
  Step,
  SingularFrame,
  Injectivity,
  // forward
  ConjugatePoint,
  BlowUp,
  EmptySurface,
  // inversion
  SingularShape,
  Noise,
  OutOfWindow,
  BadBound,
  WindowExhausted,
  // metric recovery
  PartialChart,
  ConjugateMask,
  GridMismatch,
  // surface data
  Disconnected,
  Snap,
  DegenerateLandmarks,
  IllConditioned,
  InsufficientSamples,
  // input handling
  Config,
  Format,
};

std::string_view to_string(ErrorKind kind);

// True for kinds that describe a numerical failure rather than bad input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the layer-stripping reconstruction; carries how far it got.
class ReconstructionError : public Error {
 public:
  ReconstructionError(ErrorKind kind, const std::string& message, double reached_r)
      : Error(kind, message + " (reached r = " + std::to_string(reached_r) + ")"),
        reached_r_(reached_r) {}

  double reached_r() const noexcept { return reached_r_; }

 private:
  double reached_r_;
};

}  // namespace gdix
