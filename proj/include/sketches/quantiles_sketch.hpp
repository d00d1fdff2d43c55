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

#ifndef SKETCHES_QUANTILES_SKETCH_HPP_
#define SKETCHES_QUANTILES_SKETCH_HPP_

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "oracle.hpp"

namespace sketches {

/// A stored sample: the value plus the coin drawn when it entered the
/// sketch. Coins travel with their values through zips so that every zip's
/// parity is the XOR of the coins actually stored in the buffer it halves.
struct coin_tuple {
  double value;
  uint8_t coin;
};

inline bool operator==(const coin_tuple& a, const coin_tuple& b) {
  return a.value == b.value && a.coin == b.coin;
}

/// Halves an even-length, value-sorted buffer: the XOR of all stored coins
/// selects the start parity, then every second entry is retained.
/// Throws std::invalid_argument on odd length.
std::vector<coin_tuple> zip_halve(std::span<const coin_tuple> buffer);

/// Consistent copy of the levels array taken by double collect. Queryable;
/// covers the levels only (never the base buffer).
class quantiles_snapshot {
public:
  quantiles_snapshot() = default;

  /// Value at normalized rank phi over the copied levels.
  /// Throws std::runtime_error if no level is valid.
  double query(double phi) const;

  uint64_t bit_pattern() const noexcept { return bit_pattern_; }
  uint64_t k() const noexcept { return k_; }
  /// Total weight represented by the copied levels.
  uint64_t weighted_n() const noexcept;
  bool empty() const noexcept { return bit_pattern_ == 0; }
  const std::vector<coin_tuple>& level(uint32_t lvl) const { return levels_[lvl]; }

  std::vector<uint8_t> serialize() const;

private:
  friend class quantiles_sketch;
  uint64_t k_ = 0;
  uint64_t bit_pattern_ = 0;
  std::array<std::vector<coin_tuple>, 64> levels_;
};

/**
 * Mergeable quantiles sketch. Stream items are ordered-inserted into a base
 * buffer of 2k tuples; a full buffer is zipped to k samples and propagated
 * into the weighted levels array, where a valid level i holds exactly k
 * sorted samples of weight 2^(i+1): each zip halves the samples and doubles
 * the weight, so the base buffer plus the valid level weights always add up
 * to the ingested count. The bit pattern marks valid levels and advances
 * like a binary counter, one increment per base-buffer flush.
 *
 * Concurrency: a sketch has a single designated mutator. The bit pattern is
 * the publication cell: its store releases the level writes that precede
 * it, so any number of snapshot readers may run concurrently with the
 * mutator using the double-collect in snapshot(). query() on the sketch
 * itself is for the owning thread only; concurrent readers must query a
 * snapshot. Snapshots copy levels only, never the base buffer.
 *
 * Values are doubles under their natural total order; NaN is rejected.
 */
class quantiles_sketch {
public:
  using item_type = double;
  using hint_type = double;

  static constexpr uint32_t max_levels = 64;

  /// k >= 1.
  quantiles_sketch(uint32_t k, const oracle& o);

  quantiles_sketch(const quantiles_sketch& other);
  quantiles_sketch(quantiles_sketch&& other) noexcept;
  quantiles_sketch& operator=(const quantiles_sketch& other);
  quantiles_sketch& operator=(quantiles_sketch&& other) noexcept;

  /// Draws one coin from the coin stream and ingests <value, coin>.
  /// When the base buffer reaches 2k tuples it is zipped to k and
  /// propagated from level 0. Throws std::invalid_argument on NaN.
  void update(double value);

  /// Replay entry point: ingests a tuple with an externally supplied coin,
  /// consuming nothing from the coin stream.
  void update_with_coin(double value, int coin);

  /// Value at normalized rank phi in [0, 1], over the base buffer (weight 1)
  /// and all valid levels (weight 2^(lvl+1)). Exact while nothing has
  /// propagated. Owner thread only. Throws std::runtime_error on empty.
  double query(double phi) const;

  /// Propagates each valid level of other into this sketch at its own
  /// level, then re-inserts other's base-buffer tuples with their original
  /// coins, so no retained update is lost and weight conservation holds.
  /// Requires the same k. Caller is the single designated merging thread.
  void merge(const quantiles_sketch& other);

  /// Carry step: finds the first invalid level at or above start_lvl (the
  /// target), folds tmp_k upward through the intervening valid levels by
  /// merge-sort and zip, writes the target, and publishes the whole change
  /// as one atomic bit-pattern flip. tmp_k must be sorted and of length k.
  void propagate_level(std::vector<coin_tuple> tmp_k, uint32_t start_lvl);

  /// Double collect into target (a previous snapshot, or empty). Only the
  /// levels at or below the highest bit that differs from target's pattern
  /// are recopied; an unchanged high suffix is kept as is. Retries until two
  /// pattern reads agree; max_retries = 0 means unbounded, otherwise
  /// std::runtime_error is thrown when the cap is hit. Returns the number of
  /// level copies performed. Safe concurrently with the single mutator.
  size_t snapshot_into(quantiles_snapshot& target, uint64_t max_retries = 0) const;

  quantiles_snapshot snapshot() const {
    quantiles_snapshot snap;
    snapshot_into(snap);
    return snap;
  }

  /// This sketch filters nothing: every update matters.
  double calc_hint() const noexcept { return 1.0; }
  bool should_add(double, double) const noexcept { return true; }

  /// Clears all data and publishes the empty pattern. The coin stream is
  /// not rewound: subsequent updates continue consuming fresh coins.
  void reset();

  /// Routes coin draws to an external stream (e.g. a worker-owned oracle
  /// shared by both halves of a double buffer). The oracle must outlive the
  /// sketch and be advanced only by the sketch's own mutator thread.
  void set_coin_stream(oracle& o) noexcept { coin_source_ = &o; }

  bool compatible_with(const quantiles_sketch& other) const noexcept {
    return k_ == other.k_;
  }

  uint32_t k() const noexcept { return k_; }
  uint64_t n() const noexcept { return n_; }
  uint64_t bit_pattern() const noexcept {
    return bit_pattern_.load(std::memory_order_acquire);
  }
  const std::vector<coin_tuple>& base_buffer() const noexcept { return base_buffer_; }
  bool level_valid(uint32_t lvl) const noexcept {
    return (bit_pattern() >> lvl) & 1u;
  }
  std::vector<coin_tuple> level_tuples(uint32_t lvl) const;
  uint64_t propagation_count() const noexcept { return propagations_; }
  const oracle& randomness() const noexcept { return oracle_; }

  /// Binary record: magic/version, k, n, bit pattern, then each valid level
  /// ascending as k (value, coin) pairs. The base buffer is not part of the
  /// record. Layout is documented in the README.
  std::vector<uint8_t> serialize() const;
  static quantiles_snapshot deserialize(const std::vector<uint8_t>& bytes);

private:
  // Fixed-capacity level storage. Word arrays are allocated once per level,
  // before the level's bit is first published, and written in place
  // afterwards; element access goes through atomic_ref so that a snapshot
  // reader racing with a rewrite reads garbage values, not undefined
  // behaviour, and the double collect discards them.
  struct level_slot {
    std::unique_ptr<uint64_t[]> values; // double bit patterns, k words
    std::unique_ptr<uint64_t[]> coins;  // k bits, packed
  };

  void ensure_level(uint32_t lvl);
  void write_level(uint32_t lvl, const std::vector<coin_tuple>& tuples);
  std::vector<coin_tuple> read_level(uint32_t lvl) const;
  void insert_tuple(coin_tuple t);
  int draw_coin() { return coin_source_ ? coin_source_->coin() : oracle_.coin(); }

  uint32_t k_;
  oracle oracle_;
  oracle* coin_source_ = nullptr;
  std::vector<coin_tuple> base_buffer_; // sorted by value, < 2k after update
  std::vector<level_slot> slots_;       // max_levels entries, never resized
  std::atomic<uint64_t> bit_pattern_{0};
  uint64_t n_ = 0;
  uint64_t propagations_ = 0;
};

} // namespace sketches

#endif // SKETCHES_QUANTILES_SKETCH_HPP_
