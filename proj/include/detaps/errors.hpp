#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace detaps {

enum class Errc {
  DecodeError,
  AuthFailure,
  BadThreshold,
  NotInQuorum,
  WrongQuorumSize,
  InsufficientShares,
  ShareInvalid,
  QuorumMismatch,
  BadBound,
  ThresholdTooLarge,
  UnknownPid,
  BadCapacity,
  OutOfRange,
  TooManyPids,
  OutOfScope,
  WitnessMismatch,
  UnknownGroup,
  UnknownNotary,
  NoCompleteQuorum,
  SigInvalid,
  NoMatch,
  ValidationFailed,
  Unauthorized,
  BadSignature,
  EmptyPool,
  ConfigError,
};

std::string_view errc_name(Errc code);

// All library failures are reported with this type; `code()` is the
// machine-checkable part, `what()` carries context for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by ats::combine when a share fails its per-key check. Carries the
// 1-based index of the offending signer.
class ShareInvalidError : public Error {
 public:
  ShareInvalidError(std::uint32_t culprit, const std::string& detail)
      : Error(Errc::ShareInvalid, detail), culprit_(culprit) {}

  std::uint32_t culprit() const noexcept { return culprit_; }

 private:
  std::uint32_t culprit_;
};

}  // namespace detaps
