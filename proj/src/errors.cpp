#include "detaps/errors.hpp"

namespace detaps {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::DecodeError: return "DecodeError";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::BadThreshold: return "BadThreshold";
    case Errc::NotInQuorum: return "NotInQuorum";
    case Errc::WrongQuorumSize: return "WrongQuorumSize";
    case Errc::InsufficientShares: return "InsufficientShares";
    case Errc::ShareInvalid: return "ShareInvalid";
    case Errc::QuorumMismatch: return "QuorumMismatch";
    case Errc::BadBound: return "BadBound";
    case Errc::ThresholdTooLarge: return "ThresholdTooLarge";
    case Errc::UnknownPid: return "UnknownPid";
    case Errc::BadCapacity: return "BadCapacity";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TooManyPids: return "TooManyPids";
    case Errc::OutOfScope: return "OutOfScope";
    case Errc::WitnessMismatch: return "WitnessMismatch";
    case Errc::UnknownGroup: return "UnknownGroup";
    case Errc::UnknownNotary: return "UnknownNotary";
    case Errc::NoCompleteQuorum: return "NoCompleteQuorum";
    case Errc::SigInvalid: return "SigInvalid";
    case Errc::NoMatch: return "NoMatch";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::BadSignature: return "BadSignature";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace detaps
