#include "swid/error.hpp"

namespace swid {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::AtOrigin: return "AtOrigin";
    case ErrorKind::NoRegion: return "NoRegion";
    case ErrorKind::NotReady: return "NotReady";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::CannotComplete: return "CannotComplete";
    case ErrorKind::Undefined: return "Undefined";
    case ErrorKind::SingularSlope: return "SingularSlope";
    case ErrorKind::OneClassOnly: return "OneClassOnly";
    case ErrorKind::EmptySupportSet: return "EmptySupportSet";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace swid
