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

#ifndef SKETCHES_THETA_SKETCH_HPP_
#define SKETCHES_THETA_SKETCH_HPP_

#include <atomic>
#include <cstdint>
#include <set>
#include <vector>

#include "oracle.hpp"

namespace sketches {

/// Queryable copy of a theta sketch taken at a single instant. Holds only
/// the published estimate, which is all a query reads.
struct theta_snapshot {
  double estimate = 0.0;
  double query() const noexcept { return estimate; }
};

/**
 * KMV distinct-count sketch. Retains the k smallest distinct hashes seen so
 * far; theta is 1 until the sample set fills and from then on equals the
 * largest retained hash. The published estimate is (|samples| - 1) / theta.
 *
 * Concurrency: a sketch is single-writer. The estimate is a publication
 * cell -- its store releases all prior writes by the mutator, and snapshot()
 * is one acquiring load, safe concurrently with update/merge. No other
 * member may be called concurrently with a mutator.
 *
 * Distinct items that collide to the same hash are indistinguishable; this
 * is inherent to KMV.
 */
class theta_sketch {
public:
  using item_type = uint64_t;
  using hint_type = double;

  /// k >= 2 (the estimator (k-1)/theta degenerates at k = 1).
  theta_sketch(uint32_t k, const oracle& o);

  theta_sketch(const theta_sketch& other);
  theta_sketch(theta_sketch&& other) noexcept;
  theta_sketch& operator=(const theta_sketch& other);
  theta_sketch& operator=(theta_sketch&& other) noexcept;

  void update(uint64_t item);
  void update(const void* data, size_t len);
  /// Ingests a pre-computed hash in [0, 1). The path update() takes after
  /// hashing; exposed for replay and hand-constructed states.
  void update_hash(double h);

  /// Published estimate; pure, safe from any thread.
  double query() const noexcept {
    return est_.load(std::memory_order_acquire);
  }

  /// Folds another sketch in: the union's k smallest distinct hashes are
  /// kept and the estimate is re-published last. Both sketches must have
  /// been built with the same k and hash seed. Caller is the single
  /// designated merging thread.
  void merge(const theta_sketch& other);

  /// One atomic load of the published estimate; safe concurrently with a
  /// merge or update in progress.
  theta_snapshot snapshot() const noexcept {
    return theta_snapshot{query()};
  }

  /// Current theta; never zero since theta is in (0, 1].
  double calc_hint() const noexcept { return theta_; }

  /// Pure filter: true iff hash(item) < hint. Depends only on the hash seed,
  /// never on mutable state. Items rejected under a hint from any current or
  /// earlier state can never enter the sample set again, because theta only
  /// decreases.
  bool should_add(double hint, uint64_t item) const {
    return oracle_.hash(item) < hint;
  }
  bool should_add(double hint, const void* data, size_t len) const {
    return oracle_.hash(data, len) < hint;
  }

  /// Clears samples and re-publishes the empty state. Keeps k and the seed.
  void reset();

  bool compatible_with(const theta_sketch& other) const noexcept {
    return k_ == other.k_ && oracle_.seed() == other.oracle_.seed();
  }

  uint32_t k() const noexcept { return k_; }
  double theta() const noexcept { return theta_; }
  size_t num_retained() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const std::set<double>& samples() const noexcept { return samples_; }
  const oracle& randomness() const noexcept { return oracle_; }

  /// Binary record: magic/version, k, theta, est, count, then the retained
  /// hashes ascending as Q0.64 fixed point (exact for 53-bit hashes).
  /// Layout is documented in the README.
  std::vector<uint8_t> serialize() const;
  static theta_sketch deserialize(const std::vector<uint8_t>& bytes, const oracle& o);

private:
  void publish() noexcept;

  uint32_t k_;
  oracle oracle_;
  std::set<double> samples_;
  double theta_ = 1.0;
  std::atomic<double> est_{0.0};
};

} // namespace sketches

#endif // SKETCHES_THETA_SKETCH_HPP_
