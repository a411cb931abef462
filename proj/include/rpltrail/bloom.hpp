#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rpltrail {

using Nonce = uint64_t;

// Fixed-size Bloom filter over 64-bit nonces. Probe positions use enhanced
// double hashing over two independent digests of the nonce; plain double
// hashing drifts noticeably from the analytic false-positive rate at the
// tiny filter sizes used here (m around 12 bits).
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(uint32_t m_bits, uint32_t k_hash);

  void insert(Nonce x);
  bool query(Nonce x) const;

  uint32_t m() const { return m_; }
  uint32_t k() const { return k_; }
  bool get_bit(uint32_t i) const;
  void set_bit(uint32_t i);
  void clear_bit(uint32_t i);

  // True if every set bit of other is set here too.
  bool covers(const BloomFilter& other) const;
  void merge(const BloomFilter& other);  // bitwise or

  bool operator==(const BloomFilter& other) const = default;

 private:
  uint32_t m_ = 0;
  uint32_t k_ = 0;
  std::vector<uint8_t> bits_;  // MSB-first packing, m_ bits used
};

// Standard closed-form false positive prediction for n inserted values.
double bloom_fpr_prediction(uint32_t m, uint32_t k_hash, uint32_t n);

// One rank slot of a filter array: ordered concatenation of equal-width
// slices, one slice per contributing parent.
struct FilterElement {
  std::vector<BloomFilter> slices;

  bool query(Nonce x) const;  // any slice reports membership
  size_t slice_count() const { return slices.size(); }
  size_t bit_size() const;  // slice_count * m

  bool operator==(const FilterElement& other) const = default;
};

// Rank-indexed stack of elements. For an owner of rank r, position p covers
// the nonces issued at rank r + p + 1 (depth p + 1 below the owner).
struct FilterArray {
  std::vector<FilterElement> elems;

  size_t size() const { return elems.size(); }
  bool empty() const { return elems.empty(); }
  size_t slice_bits() const;

  bool operator==(const FilterArray& other) const = default;
};

// Wire form of one element: slice count (2 bytes, big endian) followed by
// the slice bit streams packed back to back, element padded up to a byte
// boundary with zero bits. Metrics elsewhere count the raw slice bits, not
// the padded wire bytes.
void encode_element(const FilterElement& e, std::vector<uint8_t>& out);

// Returns nullopt when the buffer is truncated, the bit length is not a
// multiple of m, or padding bits are set. Advances off past the element.
std::optional<FilterElement> decode_element(const std::vector<uint8_t>& buf,
                                            size_t& off, uint32_t m,
                                            uint32_t k_hash);

}  // namespace rpltrail
