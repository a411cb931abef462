#pragma once

#include <functional>
#include <memory>
#include <string>

#include "rpltrail/bytes.hpp"

namespace rpltrail {

// Root-held signing handle. In a simulation only the root node gets to call
// this; everyone else verifies through the suite.
class Signer {
 public:
  virtual ~Signer() = default;
  virtual Bytes sign(const Bytes& msg) const = 0;
};

// Pluggable primitive family. Both providers satisfy the same algebra:
// dec(k, enc(k, m)) == m for every key, mac and hash are deterministic,
// elements keep their width through every operation. The test provider is
// transparent integer arithmetic so protocol-logic tests can predict every
// intermediate value; the production provider is the real thing.
struct PrimitiveSuite {
  std::string name;
  size_t width = 0;      // element width in bytes
  size_t sig_width = 0;  // signature width in bytes

  std::function<Bytes(const Bytes&)> hash;
  std::function<Bytes(const Bytes&, const Bytes&)> mac;  // mac(key, msg)
  std::function<Bytes(const Bytes&, const Bytes&)> enc;  // enc(key, block)
  std::function<Bytes(const Bytes&, const Bytes&)> dec;  // dec(key, block)
  std::function<bool(const Bytes&, const Bytes&)> verify;  // verify(msg, sig)

  // Held here for wiring convenience; protocol nodes other than the root
  // never touch it.
  std::shared_ptr<Signer> root_signer;
};

// Width 8. h(x) = x + 1 on big-endian u64, enc/dec = xor, mac(k, m) =
// h(k xor m), signature = keyed digest under root_secret. Fully
// deterministic, collision-free over any single run's value range.
PrimitiveSuite make_test_suite(uint64_t root_secret = 0x5eed);

// Width 16. SHA-256 truncated to 16 bytes, HMAC-SHA256 truncated likewise,
// AES-128 on a single block (length preserving at this width), Ed25519 root
// signature with a key pair generated per suite instance.
PrimitiveSuite make_production_suite();

}  // namespace rpltrail
