#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rpltrail {

// Fixed-width byte string: hash chain elements, MAC tags, cipher blocks.
// The width is a property of the primitive suite in use (8 bytes for the
// integer test arithmetic, 16 bytes for the SHA-256 based suite).
using Bytes = std::vector<uint8_t>;

std::string to_hex(const Bytes& b);
Bytes from_hex(const std::string& s);

// Big endian u64 <-> 8-byte element, used by the test suite arithmetic.
uint64_t load_u64(const Bytes& b);
Bytes make_u64(uint64_t v);

Bytes xor_bytes(const Bytes& a, const Bytes& b);

}  // namespace rpltrail
