#pragma once

// Client -> server update message.
//
// In memory the non-zero probabilities are kept in double precision; the
// wire form stores them as IEEE-754 binary32. Wire layout, little-endian:
//
//   offset  size            field
//   0       4               client id (u32)
//   4       8               local sample count n_l (u64)
//   12      4               z, number of transmitted entries (u32)
//   16      ceil(m/8)       bitmap, bit i = byte i/8, bit (i%8), LSB first
//   16+b    4*z             transmitted probabilities (f32)

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "fedfs/ce_optimizer.hpp"
#include "fedfs/error.hpp"

namespace fedfs {

struct UpdateMessage {
  std::uint32_t client_id = 0;
  std::uint64_t sample_count = 0;
  std::vector<std::uint8_t> bitmap;
  std::vector<double> nonzero_probs;

  friend bool operator==(const UpdateMessage&, const UpdateMessage&) = default;
};

inline constexpr std::size_t kMessageHeaderBytes = 16;

inline constexpr std::size_t bitmap_bytes(std::size_t m) noexcept { return (m + 7) / 8; }

inline constexpr std::size_t wire_size(std::size_t m, std::size_t nonzero) noexcept {
  return kMessageHeaderBytes + bitmap_bytes(m) + 4 * nonzero;
}

/// Entries <= epsilon are treated as zero and left out.
inline UpdateMessage encode_message(const ProbabilityVector& p, std::uint32_t client_id,
                                    std::uint64_t sample_count, double epsilon = kDefaultClamp) {
  UpdateMessage msg;
  msg.client_id = client_id;
  msg.sample_count = sample_count;
  msg.bitmap.assign(bitmap_bytes(p.size()), 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= epsilon) continue;
    msg.bitmap[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    msg.nonzero_probs.push_back(p[i]);
  }
  return msg;
}

/// Rebuilds the length-m vector; omitted positions come back as 0.
inline ProbabilityVector decode_message(const UpdateMessage& msg, std::size_t m) {
  if (msg.bitmap.size() != bitmap_bytes(m))
    throw CodecError("decode_message: bitmap has " + std::to_string(msg.bitmap.size()) +
                     " bytes, expected " + std::to_string(bitmap_bytes(m)) + " for m=" +
                     std::to_string(m));
  std::size_t set_bits = 0;
  for (auto byte : msg.bitmap) set_bits += static_cast<std::size_t>(std::popcount(byte));
  if (set_bits != msg.nonzero_probs.size())
    throw CodecError("decode_message: bitmap marks " + std::to_string(set_bits) +
                     " entries but message carries " + std::to_string(msg.nonzero_probs.size()));
  if (m % 8 != 0 && (msg.bitmap.back() >> (m % 8)) != 0)
    throw CodecError("decode_message: bitmap padding bits are set");

  std::vector<double> probs(m, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (msg.bitmap[i / 8] & (1u << (i % 8))) probs[i] = msg.nonzero_probs[k++];
  return ProbabilityVector(std::move(probs));
}

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b)
    out.push_back(static_cast<std::uint8_t>(value >> (8 * b)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(in[offset + b]) << (8 * b);
  return value;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const UpdateMessage& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(kMessageHeaderBytes + msg.bitmap.size() + 4 * msg.nonzero_probs.size());
  detail::put_le(out, msg.client_id);
  detail::put_le(out, msg.sample_count);
  detail::put_le(out, static_cast<std::uint32_t>(msg.nonzero_probs.size()));
  out.insert(out.end(), msg.bitmap.begin(), msg.bitmap.end());
  for (double p : msg.nonzero_probs)
    detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(p)));
  return out;
}

/// Parses the wire form for a vector of length m. Probabilities come back
/// widened from binary32.
inline UpdateMessage deserialize(std::span<const std::uint8_t> bytes, std::size_t m) {
  if (bytes.size() < kMessageHeaderBytes + bitmap_bytes(m))
    throw CodecError("deserialize: truncated message (" + std::to_string(bytes.size()) + " bytes)");
  UpdateMessage msg;
  msg.client_id = detail::get_le<std::uint32_t>(bytes, 0);
  msg.sample_count = detail::get_le<std::uint64_t>(bytes, 4);
  const auto z = detail::get_le<std::uint32_t>(bytes, 12);
  if (bytes.size() != wire_size(m, z))
    throw CodecError("deserialize: expected " + std::to_string(wire_size(m, z)) +
                     " bytes for z=" + std::to_string(z) + ", got " + std::to_string(bytes.size()));
  const auto bitmap = bytes.subspan(kMessageHeaderBytes, bitmap_bytes(m));
  msg.bitmap.assign(bitmap.begin(), bitmap.end());
  std::size_t offset = kMessageHeaderBytes + bitmap_bytes(m);
  msg.nonzero_probs.reserve(z);
  for (std::uint32_t k = 0; k < z; ++k, offset += 4)
    msg.nonzero_probs.push_back(
        static_cast<double>(std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, offset))));
  // Validates bitmap/list agreement.
  (void)decode_message(msg, m);
  return msg;
}

}  // namespace fedfs
