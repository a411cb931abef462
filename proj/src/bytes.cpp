#include "rpltrail/bytes.hpp"

#include <cassert>
#include <stdexcept>

namespace rpltrail {

static const char* kHexDigits = "0123456789abcdef";

std::string to_hex(const Bytes& b) {
  std::string out;
  out.reserve(b.size() * 2);
  for (uint8_t c : b) {
    out.push_back(kHexDigits[c >> 4]);
    out.push_back(kHexDigits[c & 0x0f]);
  }
  return out;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("bad hex digit");
}

Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw std::invalid_argument("odd hex length");
  Bytes out(s.size() / 2);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<uint8_t>(hex_val(s[2 * i]) << 4 | hex_val(s[2 * i + 1]));
  return out;
}

uint64_t load_u64(const Bytes& b) {
  assert(b.size() == 8);
  uint64_t v = 0;
  for (uint8_t c : b) v = v << 8 | c;
  return v;
}

Bytes make_u64(uint64_t v) {
  Bytes b(8);
  for (int i = 7; i >= 0; --i) {
    b[i] = static_cast<uint8_t>(v & 0xff);
    v >>= 8;
  }
  return b;
}

Bytes xor_bytes(const Bytes& a, const Bytes& b) {
  assert(a.size() == b.size());
  Bytes out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

}  // namespace rpltrail
