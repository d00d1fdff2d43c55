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

#include "sketches/theta_sketch.hpp"

#include <cstring>
#include <stdexcept>

namespace sketches {

namespace {

constexpr uint64_t kThetaMagic = 0x31304b5341544548ULL; // "HETASK01"

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    v >>= 8;
  }
}

uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("theta record truncated");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[pos + i];
  pos += 8;
  return v;
}

// Hashes are m / 2^53, so h * 2^64 = m * 2^11 is an exact 64-bit integer.
uint64_t hash_to_fixed64(double h) {
  return static_cast<uint64_t>(h * 0x1.0p53) << 11;
}

double fixed64_to_hash(uint64_t fp) {
  return static_cast<double>(fp >> 11) * 0x1.0p-53;
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

} // namespace

theta_sketch::theta_sketch(uint32_t k, const oracle& o) : k_(k), oracle_(o) {
  if (k < 2) throw std::invalid_argument("theta sketch requires k >= 2");
}

theta_sketch::theta_sketch(const theta_sketch& other)
    : k_(other.k_),
      oracle_(other.oracle_),
      samples_(other.samples_),
      theta_(other.theta_),
      est_(other.est_.load(std::memory_order_acquire)) {}

theta_sketch::theta_sketch(theta_sketch&& other) noexcept
    : k_(other.k_),
      oracle_(other.oracle_),
      samples_(std::move(other.samples_)),
      theta_(other.theta_),
      est_(other.est_.load(std::memory_order_acquire)) {}

theta_sketch& theta_sketch::operator=(const theta_sketch& other) {
  if (this != &other) {
    k_ = other.k_;
    oracle_ = other.oracle_;
    samples_ = other.samples_;
    theta_ = other.theta_;
    est_.store(other.est_.load(std::memory_order_acquire), std::memory_order_release);
  }
  return *this;
}

theta_sketch& theta_sketch::operator=(theta_sketch&& other) noexcept {
  if (this != &other) {
    k_ = other.k_;
    oracle_ = other.oracle_;
    samples_ = std::move(other.samples_);
    theta_ = other.theta_;
    est_.store(other.est_.load(std::memory_order_acquire), std::memory_order_release);
  }
  return *this;
}

void theta_sketch::publish() noexcept {
  const double e = samples_.empty()
      ? 0.0
      : (static_cast<double>(samples_.size()) - 1.0) / theta_;
  est_.store(e, std::memory_order_release);
}

void theta_sketch::update(uint64_t item) { update_hash(oracle_.hash(item)); }

void theta_sketch::update(const void* data, size_t len) {
  update_hash(oracle_.hash(data, len));
}

void theta_sketch::update_hash(double h) {
  if (!(h >= 0.0 && h < 1.0)) {
    throw std::invalid_argument("hash must lie in [0, 1)");
  }
  if (h >= theta_) return;
  if (!samples_.insert(h).second) return; // duplicate hash, no-op
  if (samples_.size() > k_) samples_.erase(std::prev(samples_.end()));
  if (samples_.size() == k_) theta_ = *samples_.rbegin();
  publish();
}

void theta_sketch::merge(const theta_sketch& other) {
  if (!compatible_with(other)) {
    throw std::invalid_argument("theta merge requires identical k and seed");
  }
  for (double h : other.samples_) samples_.insert(h);
  while (samples_.size() > k_) samples_.erase(std::prev(samples_.end()));
  if (samples_.size() == k_) theta_ = *samples_.rbegin();
  publish();
}

void theta_sketch::reset() {
  samples_.clear();
  theta_ = 1.0;
  publish();
}

std::vector<uint8_t> theta_sketch::serialize() const {
  std::vector<uint8_t> out;
  out.reserve(40 + 8 * samples_.size());
  put_u64(out, kThetaMagic);
  put_u64(out, k_);
  put_u64(out, double_bits(theta_));
  put_u64(out, double_bits(query()));
  put_u64(out, samples_.size());
  for (double h : samples_) put_u64(out, hash_to_fixed64(h));
  return out;
}

theta_sketch theta_sketch::deserialize(const std::vector<uint8_t>& bytes, const oracle& o) {
  size_t pos = 0;
  if (get_u64(bytes, pos) != kThetaMagic) {
    throw std::runtime_error("not a theta sketch record");
  }
  const uint64_t k = get_u64(bytes, pos);
  if (k < 2 || k > 0xffffffffULL) throw std::runtime_error("theta record: bad k");
  theta_sketch s(static_cast<uint32_t>(k), o);
  s.theta_ = bits_double(get_u64(bytes, pos));
  const double est = bits_double(get_u64(bytes, pos));
  const uint64_t count = get_u64(bytes, pos);
  if (count > k) throw std::runtime_error("theta record: count exceeds k");
  for (uint64_t i = 0; i < count; ++i) {
    s.samples_.insert(fixed64_to_hash(get_u64(bytes, pos)));
  }
  if (s.samples_.size() != count) throw std::runtime_error("theta record: duplicate hashes");
  s.est_.store(est, std::memory_order_release);
  return s;
}

} // namespace sketches
