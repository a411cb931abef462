#include "rpltrail/bloom.hpp"

#include <cassert>
#include <cmath>

namespace rpltrail {

static uint64_t fmix64(uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

// Enhanced double hashing: probe_i = g1 + i*g2 + (i^3 - i)/6 mod m, computed
// incrementally from two digests of the nonce.
static void probe_positions(Nonce x, uint32_t m, uint32_t k, uint32_t* out) {
  uint64_t g1 = fmix64(x ^ 0x9e3779b97f4a7c15ULL) % m;
  uint64_t g2 = fmix64(x ^ 0xc2b2ae3d27d4eb4fULL) % m;
  for (uint32_t i = 0; i < k; ++i) {
    out[i] = static_cast<uint32_t>(g1);
    g1 = (g1 + g2) % m;
    g2 = (g2 + i + 1) % m;
  }
}

BloomFilter::BloomFilter(uint32_t m_bits, uint32_t k_hash)
    : m_(m_bits), k_(k_hash), bits_((m_bits + 7) / 8, 0) {
  assert(m_bits >= 2);
  assert(k_hash >= 1);
}

bool BloomFilter::get_bit(uint32_t i) const {
  return bits_[i / 8] & (0x80u >> (i % 8));
}

void BloomFilter::set_bit(uint32_t i) { bits_[i / 8] |= (0x80u >> (i % 8)); }

void BloomFilter::clear_bit(uint32_t i) {
  bits_[i / 8] &= static_cast<uint8_t>(~(0x80u >> (i % 8)));
}

void BloomFilter::insert(Nonce x) {
  uint32_t pos[64];
  assert(k_ <= 64);
  probe_positions(x, m_, k_, pos);
  for (uint32_t i = 0; i < k_; ++i) set_bit(pos[i]);
}

bool BloomFilter::query(Nonce x) const {
  if (m_ == 0) return false;
  uint32_t pos[64];
  probe_positions(x, m_, k_, pos);
  for (uint32_t i = 0; i < k_; ++i)
    if (!get_bit(pos[i])) return false;
  return true;
}

bool BloomFilter::covers(const BloomFilter& other) const {
  if (m_ != other.m_) return false;
  for (size_t i = 0; i < bits_.size(); ++i)
    if ((bits_[i] & other.bits_[i]) != other.bits_[i]) return false;
  return true;
}

void BloomFilter::merge(const BloomFilter& other) {
  assert(m_ == other.m_);
  for (size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
}

double bloom_fpr_prediction(uint32_t m, uint32_t k_hash, uint32_t n) {
  double miss = std::pow(1.0 - 1.0 / m, double(k_hash) * n);
  return std::pow(1.0 - miss, double(k_hash));
}

bool FilterElement::query(Nonce x) const {
  for (const auto& s : slices)
    if (s.query(x)) return true;
  return false;
}

size_t FilterElement::bit_size() const {
  size_t bits = 0;
  for (const auto& s : slices) bits += s.m();
  return bits;
}

size_t FilterArray::slice_bits() const {
  size_t bits = 0;
  for (const auto& e : elems) bits += e.bit_size();
  return bits;
}

void encode_element(const FilterElement& e, std::vector<uint8_t>& out) {
  size_t count = e.slices.size();
  assert(count <= 0xffff);
  out.push_back(static_cast<uint8_t>(count >> 8));
  out.push_back(static_cast<uint8_t>(count & 0xff));
  size_t bitpos = 0;
  size_t base = out.size();
  out.resize(base + (e.bit_size() + 7) / 8, 0);
  for (const auto& s : e.slices)
    for (uint32_t i = 0; i < s.m(); ++i, ++bitpos)
      if (s.get_bit(i)) out[base + bitpos / 8] |= (0x80u >> (bitpos % 8));
}

std::optional<FilterElement> decode_element(const std::vector<uint8_t>& buf,
                                            size_t& off, uint32_t m,
                                            uint32_t k_hash) {
  if (off + 2 > buf.size()) return std::nullopt;
  size_t count = size_t(buf[off]) << 8 | buf[off + 1];
  off += 2;
  size_t nbits = count * m;
  size_t nbytes = (nbits + 7) / 8;
  if (off + nbytes > buf.size()) return std::nullopt;
  FilterElement e;
  e.slices.reserve(count);
  size_t bitpos = 0;
  for (size_t s = 0; s < count; ++s) {
    BloomFilter f(m, k_hash);
    for (uint32_t i = 0; i < m; ++i, ++bitpos)
      if (buf[off + bitpos / 8] & (0x80u >> (bitpos % 8))) f.set_bit(i);
    e.slices.push_back(std::move(f));
  }
  // Trailing pad bits of the element must be clear.
  for (; bitpos < nbytes * 8; ++bitpos)
    if (buf[off + bitpos / 8] & (0x80u >> (bitpos % 8))) return std::nullopt;
  off += nbytes;
  return e;
}

}  // namespace rpltrail
