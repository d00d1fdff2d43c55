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

#include "sketches/quantiles_sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sketches {

namespace {

constexpr uint64_t kQuantilesMagic = 0x31304b53544e5551ULL; // "QUNTSK01"

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    v >>= 8;
  }
}

uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("quantiles record truncated");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[pos + i];
  pos += 8;
  return v;
}

uint64_t double_bits(double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  return v;
}

double bits_double(uint64_t v) {
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

struct weighted_value {
  double value;
  uint64_t weight;
};

// Shared by sketch and snapshot queries: the value where the cumulative
// weight walk first exceeds pos = min(floor(N * phi), N - 1).
double query_weighted(std::vector<weighted_value>& tuples, uint64_t total_weight, double phi) {
  if (std::isnan(phi) || phi < 0.0 || phi > 1.0) {
    throw std::invalid_argument("phi must be in [0, 1]");
  }
  if (total_weight == 0) throw std::runtime_error("quantiles query on empty sketch");
  std::sort(tuples.begin(), tuples.end(),
            [](const weighted_value& a, const weighted_value& b) { return a.value < b.value; });
  const uint64_t pos = std::min(
      static_cast<uint64_t>(std::floor(phi * static_cast<double>(total_weight))),
      total_weight - 1);
  uint64_t sum = 0;
  size_t ind = 0;
  while (sum <= pos) {
    sum += tuples[ind].weight;
    ++ind;
  }
  return tuples[ind - 1].value;
}

} // namespace

std::vector<coin_tuple> zip_halve(std::span<const coin_tuple> buffer) {
  if (buffer.size() % 2 != 0) {
    throw std::invalid_argument("zip requires an even-length buffer");
  }
  unsigned start = 0;
  for (const coin_tuple& t : buffer) start ^= (t.coin & 1u);
  std::vector<coin_tuple> zipped;
  zipped.reserve(buffer.size() / 2);
  for (size_t i = start; i < buffer.size(); i += 2) zipped.push_back(buffer[i]);
  return zipped;
}

quantiles_sketch::quantiles_sketch(uint32_t k, const oracle& o)
    : k_(k), oracle_(o), slots_(max_levels) {
  if (k < 1) throw std::invalid_argument("quantiles sketch requires k >= 1");
  base_buffer_.reserve(2 * static_cast<size_t>(k));
}

quantiles_sketch::quantiles_sketch(const quantiles_sketch& other)
    : k_(other.k_),
      oracle_(other.oracle_),
      coin_source_(other.coin_source_),
      base_buffer_(other.base_buffer_),
      slots_(max_levels),
      bit_pattern_(other.bit_pattern()),
      n_(other.n_),
      propagations_(other.propagations_) {
  const uint64_t pattern = bit_pattern_.load(std::memory_order_relaxed);
  for (uint32_t lvl = 0; lvl < max_levels; ++lvl) {
    if ((pattern >> lvl) & 1u) write_level(lvl, other.read_level(lvl));
  }
}

quantiles_sketch::quantiles_sketch(quantiles_sketch&& other) noexcept
    : k_(other.k_),
      oracle_(other.oracle_),
      coin_source_(other.coin_source_),
      base_buffer_(std::move(other.base_buffer_)),
      slots_(std::move(other.slots_)),
      bit_pattern_(other.bit_pattern()),
      n_(other.n_),
      propagations_(other.propagations_) {}

quantiles_sketch& quantiles_sketch::operator=(const quantiles_sketch& other) {
  if (this != &other) {
    quantiles_sketch tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

quantiles_sketch& quantiles_sketch::operator=(quantiles_sketch&& other) noexcept {
  if (this != &other) {
    k_ = other.k_;
    oracle_ = other.oracle_;
    coin_source_ = other.coin_source_;
    base_buffer_ = std::move(other.base_buffer_);
    slots_ = std::move(other.slots_);
    bit_pattern_.store(other.bit_pattern(), std::memory_order_relaxed);
    n_ = other.n_;
    propagations_ = other.propagations_;
  }
  return *this;
}

void quantiles_sketch::ensure_level(uint32_t lvl) {
  level_slot& slot = slots_[lvl];
  if (!slot.values) {
    slot.values = std::make_unique<uint64_t[]>(k_);
    slot.coins = std::make_unique<uint64_t[]>((k_ + 63) / 64);
  }
}

void quantiles_sketch::write_level(uint32_t lvl, const std::vector<coin_tuple>& tuples) {
  ensure_level(lvl);
  level_slot& slot = slots_[lvl];
  for (uint32_t i = 0; i < k_; ++i) {
    std::atomic_ref<uint64_t>(slot.values[i])
        .store(double_bits(tuples[i].value), std::memory_order_relaxed);
  }
  for (uint32_t w = 0; w < (k_ + 63) / 64; ++w) {
    uint64_t word = 0;
    for (uint32_t b = 0; b < 64 && w * 64 + b < k_; ++b) {
      word |= static_cast<uint64_t>(tuples[w * 64 + b].coin & 1u) << b;
    }
    std::atomic_ref<uint64_t>(slot.coins[w]).store(word, std::memory_order_relaxed);
  }
}

std::vector<coin_tuple> quantiles_sketch::read_level(uint32_t lvl) const {
  const level_slot& slot = slots_[lvl];
  std::vector<coin_tuple> out(k_);
  for (uint32_t i = 0; i < k_; ++i) {
    out[i].value = bits_double(
        std::atomic_ref<uint64_t>(slot.values[i]).load(std::memory_order_relaxed));
  }
  for (uint32_t w = 0; w < (k_ + 63) / 64; ++w) {
    const uint64_t word =
        std::atomic_ref<uint64_t>(slot.coins[w]).load(std::memory_order_relaxed);
    for (uint32_t b = 0; b < 64 && w * 64 + b < k_; ++b) {
      out[w * 64 + b].coin = static_cast<uint8_t>((word >> b) & 1u);
    }
  }
  return out;
}

std::vector<coin_tuple> quantiles_sketch::level_tuples(uint32_t lvl) const {
  if (lvl >= max_levels || !level_valid(lvl)) {
    throw std::invalid_argument("level is not valid");
  }
  return read_level(lvl);
}

void quantiles_sketch::update(double value) {
  if (std::isnan(value)) throw std::invalid_argument("NaN has no rank");
  update_with_coin(value, draw_coin());
}

void quantiles_sketch::update_with_coin(double value, int coin) {
  if (std::isnan(value)) throw std::invalid_argument("NaN has no rank");
  insert_tuple(coin_tuple{value, static_cast<uint8_t>(coin & 1)});
}

void quantiles_sketch::insert_tuple(coin_tuple t) {
  auto it = std::upper_bound(
      base_buffer_.begin(), base_buffer_.end(), t,
      [](const coin_tuple& a, const coin_tuple& b) { return a.value < b.value; });
  base_buffer_.insert(it, t);
  ++n_;
  if (base_buffer_.size() == 2 * static_cast<size_t>(k_)) {
    propagate_level(zip_halve(base_buffer_), 0);
    base_buffer_.clear();
  }
}

void quantiles_sketch::propagate_level(std::vector<coin_tuple> tmp_k, uint32_t start_lvl) {
  if (tmp_k.size() != k_) {
    throw std::invalid_argument("propagate requires exactly k tuples");
  }
  const uint64_t pattern = bit_pattern_.load(std::memory_order_relaxed);
  uint32_t target = start_lvl;
  while (target < max_levels && ((pattern >> target) & 1u)) ++target;
  if (target >= max_levels) throw std::runtime_error("quantiles level capacity exceeded");

  uint64_t mask = 0;
  std::vector<coin_tuple> tmp_2k;
  for (uint32_t lvl = start_lvl; lvl < target; ++lvl) {
    const std::vector<coin_tuple> level = read_level(lvl);
    tmp_2k.clear();
    tmp_2k.reserve(2 * static_cast<size_t>(k_));
    std::merge(tmp_k.begin(), tmp_k.end(), level.begin(), level.end(),
               std::back_inserter(tmp_2k),
               [](const coin_tuple& a, const coin_tuple& b) { return a.value < b.value; });
    tmp_k = zip_halve(tmp_2k);
    mask |= uint64_t{1} << lvl;
  }
  mask |= uint64_t{1} << target;
  write_level(target, tmp_k);
  // Single publication: level writes above become visible with the flip.
  bit_pattern_.store(pattern ^ mask, std::memory_order_release);
  ++propagations_;
}

double quantiles_sketch::query(double phi) const {
  const uint64_t pattern = bit_pattern_.load(std::memory_order_relaxed);
  std::vector<weighted_value> tuples;
  uint64_t total = base_buffer_.size();
  for (const coin_tuple& t : base_buffer_) tuples.push_back({t.value, 1});
  for (uint32_t lvl = 0; lvl < max_levels; ++lvl) {
    if (!((pattern >> lvl) & 1u)) continue;
    const uint64_t weight = uint64_t{1} << (lvl + 1);
    for (const coin_tuple& t : read_level(lvl)) tuples.push_back({t.value, weight});
    total += weight * k_;
  }
  return query_weighted(tuples, total, phi);
}

void quantiles_sketch::merge(const quantiles_sketch& other) {
  if (!compatible_with(other)) {
    throw std::invalid_argument("quantiles merge requires identical k");
  }
  const uint64_t other_pattern = other.bit_pattern();
  for (uint32_t lvl = 0; lvl < max_levels; ++lvl) {
    if (!((other_pattern >> lvl) & 1u)) continue;
    propagate_level(other.read_level(lvl), lvl);
    n_ += (uint64_t{1} << (lvl + 1)) * k_;
  }
  for (const coin_tuple& t : other.base_buffer_) insert_tuple(t);
}

size_t quantiles_sketch::snapshot_into(quantiles_snapshot& target, uint64_t max_retries) const {
  size_t copies = 0;
  uint64_t cur = bit_pattern_.load(std::memory_order_acquire);
  for (uint64_t attempt = 0;; ++attempt) {
    const uint64_t diff = cur ^ target.bit_pattern_;
    if (diff != 0) {
      // Levels above the highest differing bit cannot have changed: a level
      // is rewritten only after its bit flips.
      const uint32_t max_diff = 63 - static_cast<uint32_t>(std::countl_zero(diff));
      for (uint32_t lvl = 0; lvl <= max_diff; ++lvl) {
        if ((cur >> lvl) & 1u) {
          target.levels_[lvl] = read_level(lvl);
          ++copies;
        }
      }
    }
    target.bit_pattern_ = cur;
    target.k_ = k_;
    const uint64_t recheck = bit_pattern_.load(std::memory_order_acquire);
    if (recheck == cur) return copies;
    cur = recheck;
    if (max_retries != 0 && attempt + 1 >= max_retries) {
      throw std::runtime_error("quantiles snapshot retry cap exceeded");
    }
  }
}

void quantiles_sketch::reset() {
  base_buffer_.clear();
  n_ = 0;
  bit_pattern_.store(0, std::memory_order_release);
}

std::vector<uint8_t> quantiles_sketch::serialize() const {
  const uint64_t pattern = bit_pattern_.load(std::memory_order_relaxed);
  std::vector<uint8_t> out;
  put_u64(out, kQuantilesMagic);
  put_u64(out, k_);
  put_u64(out, n_);
  put_u64(out, pattern);
  for (uint32_t lvl = 0; lvl < max_levels; ++lvl) {
    if (!((pattern >> lvl) & 1u)) continue;
    for (const coin_tuple& t : read_level(lvl)) {
      put_u64(out, double_bits(t.value));
      put_u64(out, t.coin);
    }
  }
  return out;
}

std::vector<uint8_t> quantiles_snapshot::serialize() const {
  std::vector<uint8_t> out;
  put_u64(out, kQuantilesMagic);
  put_u64(out, k_);
  put_u64(out, weighted_n());
  put_u64(out, bit_pattern_);
  for (uint32_t lvl = 0; lvl < 64; ++lvl) {
    if (!((bit_pattern_ >> lvl) & 1u)) continue;
    for (const coin_tuple& t : levels_[lvl]) {
      put_u64(out, double_bits(t.value));
      put_u64(out, t.coin);
    }
  }
  return out;
}

quantiles_snapshot quantiles_sketch::deserialize(const std::vector<uint8_t>& bytes) {
  size_t pos = 0;
  if (get_u64(bytes, pos) != kQuantilesMagic) {
    throw std::runtime_error("not a quantiles sketch record");
  }
  quantiles_snapshot snap;
  snap.k_ = get_u64(bytes, pos);
  if (snap.k_ < 1) throw std::runtime_error("quantiles record: bad k");
  get_u64(bytes, pos); // n, implied by the levels for a snapshot
  snap.bit_pattern_ = get_u64(bytes, pos);
  for (uint32_t lvl = 0; lvl < 64; ++lvl) {
    if (!((snap.bit_pattern_ >> lvl) & 1u)) continue;
    auto& level = snap.levels_[lvl];
    level.resize(snap.k_);
    for (uint64_t i = 0; i < snap.k_; ++i) {
      level[i].value = bits_double(get_u64(bytes, pos));
      level[i].coin = static_cast<uint8_t>(get_u64(bytes, pos) & 1u);
    }
  }
  if (pos != bytes.size()) throw std::runtime_error("quantiles record: trailing bytes");
  return snap;
}

uint64_t quantiles_snapshot::weighted_n() const noexcept {
  uint64_t total = 0;
  for (uint32_t lvl = 0; lvl < 64; ++lvl) {
    if ((bit_pattern_ >> lvl) & 1u) total += (uint64_t{1} << (lvl + 1)) * k_;
  }
  return total;
}

double quantiles_snapshot::query(double phi) const {
  std::vector<weighted_value> tuples;
  uint64_t total = 0;
  for (uint32_t lvl = 0; lvl < 64; ++lvl) {
    if (!((bit_pattern_ >> lvl) & 1u)) continue;
    const uint64_t weight = uint64_t{1} << (lvl + 1);
    for (const coin_tuple& t : levels_[lvl]) tuples.push_back({t.value, weight});
    total += weight * k_;
  }
  return query_weighted(tuples, total, phi);
}

} // namespace sketches
