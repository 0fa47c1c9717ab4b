#include "gdix/errors.hpp"

namespace gdix {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::Step: return "StepError";
    case ErrorKind::SingularFrame: return "SingularFrame";
    case ErrorKind::Injectivity: return "InjectivityError";
    case ErrorKind::ConjugatePoint: return "ConjugatePoint";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::EmptySurface: return "EmptySurface";
    case ErrorKind::SingularShape: return "SingularShape";
    case ErrorKind::Noise: return "NoiseError";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::BadBound: return "BadBound";
    case ErrorKind::WindowExhausted: return "WindowExhausted";
    case ErrorKind::PartialChart: return "PartialChart";
    case ErrorKind::ConjugateMask: return "ConjugateMask";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::Snap: return "SnapError";
    case ErrorKind::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Format: return "FormatError";
  }
  return "Error";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Format:
    case ErrorKind::GridMismatch:
      return false;
    default:
      return true;
  }
}

}  // namespace gdix
