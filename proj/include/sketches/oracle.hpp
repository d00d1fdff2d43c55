/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#ifndef SKETCHES_ORACLE_HPP_
#define SKETCHES_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace sketches {

namespace detail {

static inline uint64_t rotl64(uint64_t x, int8_t r) {
  return (x << r) | (x >> (64 - r));
}

static inline uint64_t fmix64(uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

// MurmurHash3 x64 128-bit, first word of the digest.
inline uint64_t murmur3_64(const void* key, size_t len, uint64_t seed) {
  const uint8_t* data = static_cast<const uint8_t*>(key);
  const size_t nblocks = len / 16;

  uint64_t h1 = seed;
  uint64_t h2 = seed;

  const uint64_t c1 = 0x87c37b91114253d5ULL;
  const uint64_t c2 = 0x4cf5ad432745937fULL;

  for (size_t i = 0; i < nblocks; i++) {
    uint64_t k1, k2;
    std::memcpy(&k1, data + i * 16, 8);
    std::memcpy(&k2, data + i * 16 + 8, 8);

    k1 *= c1; k1 = rotl64(k1, 31); k1 *= c2; h1 ^= k1;
    h1 = rotl64(h1, 27); h1 += h2; h1 = h1 * 5 + 0x52dce729;

    k2 *= c2; k2 = rotl64(k2, 33); k2 *= c1; h2 ^= k2;
    h2 = rotl64(h2, 31); h2 += h1; h2 = h2 * 5 + 0x38495ab5;
  }

  const uint8_t* tail = data + nblocks * 16;
  uint64_t k1 = 0;
  uint64_t k2 = 0;
  switch (len & 15) {
    case 15: k2 ^= static_cast<uint64_t>(tail[14]) << 48; [[fallthrough]];
    case 14: k2 ^= static_cast<uint64_t>(tail[13]) << 40; [[fallthrough]];
    case 13: k2 ^= static_cast<uint64_t>(tail[12]) << 32; [[fallthrough]];
    case 12: k2 ^= static_cast<uint64_t>(tail[11]) << 24; [[fallthrough]];
    case 11: k2 ^= static_cast<uint64_t>(tail[10]) << 16; [[fallthrough]];
    case 10: k2 ^= static_cast<uint64_t>(tail[9]) << 8; [[fallthrough]];
    case 9:  k2 ^= static_cast<uint64_t>(tail[8]);
             k2 *= c2; k2 = rotl64(k2, 33); k2 *= c1; h2 ^= k2; [[fallthrough]];
    case 8:  k1 ^= static_cast<uint64_t>(tail[7]) << 56; [[fallthrough]];
    case 7:  k1 ^= static_cast<uint64_t>(tail[6]) << 48; [[fallthrough]];
    case 6:  k1 ^= static_cast<uint64_t>(tail[5]) << 40; [[fallthrough]];
    case 5:  k1 ^= static_cast<uint64_t>(tail[4]) << 32; [[fallthrough]];
    case 4:  k1 ^= static_cast<uint64_t>(tail[3]) << 24; [[fallthrough]];
    case 3:  k1 ^= static_cast<uint64_t>(tail[2]) << 16; [[fallthrough]];
    case 2:  k1 ^= static_cast<uint64_t>(tail[1]) << 8; [[fallthrough]];
    case 1:  k1 ^= static_cast<uint64_t>(tail[0]);
             k1 *= c1; k1 = rotl64(k1, 31); k1 *= c2; h1 ^= k1;
  }

  h1 ^= static_cast<uint64_t>(len);
  h2 ^= static_cast<uint64_t>(len);
  h1 += h2;
  h2 += h1;
  h1 = fmix64(h1);
  h2 = fmix64(h2);
  h1 += h2;
  return h1;
}

// SplitMix64 finalizer used as a counter-mode generator.
static inline uint64_t splitmix64_at(uint64_t key, uint64_t counter) {
  uint64_t z = key + (counter + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace detail

/// Big-endian encoding of a 64-bit integer, the canonical byte form of
/// numeric items.
inline void encode_u64_be(uint64_t v, uint8_t out[8]) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<uint8_t>(v & 0xff);
    v >>= 8;
  }
}

/**
 * Derandomised randomness source shared by the sketches and the concurrent
 * engine. Two independent facilities:
 *
 * 1. A seeded hash of byte strings to the unit interval [0, 1). The same
 *    (seed, item) pair always produces the same value, on any thread.
 * 2. A coin stream: bit i is a pure function of (seed, stream, i), so a
 *    stream can be replayed exactly by resetting the cursor. Each stream id
 *    yields an independent sequence; the concurrent engine gives every
 *    worker its own stream.
 *
 * Hashing is stateless and thread-safe. The coin cursor is single-owner:
 * exactly one thread may advance a given oracle's coin stream.
 */
class oracle {
public:
  explicit oracle(uint64_t seed, uint64_t stream = 0) noexcept
      : seed_(seed),
        coin_key_(detail::fmix64(seed ^ detail::fmix64(stream * 0x9e3779b97f4a7c15ULL + 1))),
        stream_(stream) {}

  /// Hash of a byte string, uniform on [0, 1). The top 53 bits of the
  /// 64-bit fingerprint are used so the result is always strictly below 1
  /// and exactly representable as h * 2^64 in 64 bits.
  double hash(const void* data, size_t len) const {
    const uint64_t h = detail::murmur3_64(data, len, seed_);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  double hash(std::string_view bytes) const {
    return hash(bytes.data(), bytes.size());
  }

  /// Convenience for numeric items: hashes the big-endian 8-byte encoding.
  double hash(uint64_t item) const {
    uint8_t buf[8];
    encode_u64_be(item, buf);
    return hash(buf, sizeof(buf));
  }

  /// Coin bit at the current cursor; advances the cursor.
  int coin() { return coin_at(coin_cursor_++); }

  /// Coin bit at an arbitrary cursor position, without advancing.
  int coin_at(uint64_t cursor) const {
    return static_cast<int>(detail::splitmix64_at(coin_key_, cursor) & 1u);
  }

  void seek_coin(uint64_t cursor) noexcept { coin_cursor_ = cursor; }
  uint64_t coin_cursor() const noexcept { return coin_cursor_; }

  uint64_t seed() const noexcept { return seed_; }
  uint64_t stream() const noexcept { return stream_; }

  /// Same hash seed, independent coin stream, cursor reset to 0.
  oracle with_stream(uint64_t stream) const noexcept {
    return oracle(seed_, stream);
  }

private:
  uint64_t seed_;
  uint64_t coin_key_;
  uint64_t stream_;
  uint64_t coin_cursor_ = 0;
};

} // namespace sketches

#endif // SKETCHES_ORACLE_HPP_
