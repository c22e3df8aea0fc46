#pragma once

// Simulated enclaves and the host-side entry points around them.
//
// An EnclaveHandle owns sealed key material (a combiner's sk^c or a
// tracer's sk^t) and the retained-share store. Host code reaches it only
// through invoke(), which takes and returns serialized bytes; a recorder
// can observe every outbound response.

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "detaps/scheme.hpp"

namespace detaps::scheme {

using BoundaryRecorder = std::function<void(std::string_view entry, ByteView outbound)>;

enum class EnclaveRole : std::uint8_t { Combiner = 1, Tracer = 2 };

struct SystemKeys;

class EnclaveHandle {
 public:
  EnclaveHandle(EnclaveHandle&&) noexcept;
  EnclaveHandle& operator=(EnclaveHandle&&) noexcept;
  ~EnclaveHandle();

  EnclaveRole role() const;
  std::uint32_t index() const;
  const G1& enc_pub() const;
  const G1& attestation_pub() const;

  // Response layout: status byte 0 then payload, or status 1 then a u32 error code.
  Bytes invoke(std::string_view entry, ByteView request);
  void set_recorder(BoundaryRecorder recorder);

 private:
  struct State;
  explicit EnclaveHandle(std::unique_ptr<State> state);
  friend SystemKeys setup(const SystemParams& params, std::uint64_t seed);

  std::unique_ptr<State> state_;
};

struct SystemKeys {
  SystemParams params;
  PublicKey pk;
  std::vector<ats::SignerKey> signers;
  std::vector<Scalar> combiner_sig_secrets;
  std::vector<EnclaveHandle> combiners;
  std::vector<EnclaveHandle> tracers;
  std::vector<NotaryState> notaries;
};

// Throws BadThreshold unless 1 <= t <= n, BadBound if n1, n2 or n3 is zero.
SystemKeys setup(const SystemParams& params, std::uint64_t seed);

struct CombineOutput {
  Bytes m;
  Signature sigma;
};

// Feeds a batch pulled from the share pool into the combiner enclave and
// signs each completed quorum with eta. Incomplete quorums stay inside.
std::vector<CombineOutput> combine(EnclaveHandle& enclave, const Scalar& combiner_sig_secret,
                                   std::uint64_t epoch, const GidRegistry& registry,
                                   const std::vector<EncryptedShare>& batch,
                                   Exec exec = Exec::Parallel);

// Runs the tracer enclave on one signature. The quorum comes back sealed to
// target_pub. Throws SigInvalid, ValidationFailed or InsufficientShares.
prim::HybridCiphertext trace(EnclaveHandle& tracer, ByteView m, const Signature& sigma,
                             const std::vector<NotaryResponse>& responses, const G1& target_pub);

ats::Quorum open_trace_result(const Scalar& target_sk, const prim::HybridCiphertext& sealed);

}  // namespace detaps::scheme
