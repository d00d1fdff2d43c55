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

#ifndef SKETCHES_CONCURRENT_ENGINE_HPP_
#define SKETCHES_CONCURRENT_ENGINE_HPP_

#include <atomic>
#include <cassert>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "oracle.hpp"

namespace sketches {

/// The capability set the engine needs from a sketch: per-item update, a
/// snapshot that is queryable and safe concurrently with merge, a nonzero
/// hint, and a state-independent pre-filter.
template <typename S>
concept composable_sketch = requires(S s, const S cs, typename S::item_type item,
                                     typename S::hint_type hint) {
  { s.update(item) };
  { s.merge(cs) };
  { s.reset() };
  { cs.snapshot() };
  { cs.calc_hint() } -> std::convertible_to<typename S::hint_type>;
  { cs.should_add(hint, item) } -> std::convertible_to<bool>;
  { cs.compatible_with(cs) } -> std::convertible_to<bool>;
  { cs.randomness() } -> std::convertible_to<const oracle&>;
};

struct engine_config {
  uint32_t workers = 1;
  uint32_t buffer = 1;       // retained updates per handoff
  bool optimised = true;     // double-buffered local sketches
  bool auto_propagate = true; // background propagator thread; when false the
                             // caller drives propagator_step()

  /// Staleness bound a query may exhibit: with double buffering up to two
  /// buffers per worker are in flight, so 2*N*b; otherwise N*b.
  uint64_t relaxation() const noexcept {
    return (optimised ? 2ull : 1ull) * workers * buffer;
  }
};

/**
 * Generic concurrent ingestion engine over a composable sketch. N worker
 * threads buffer retained updates in local sketches of capacity b; a single
 * propagator merges filled locals into the shared global sketch and hands
 * the worker a fresh hint through its prop flag. Queries snapshot the
 * global sketch from any thread at any time.
 *
 * prop_i is the only synchronisation word per worker: the worker publishes
 * 0 (release) when a local sketch is ready and the propagator publishes the
 * new nonzero hint (release) when the merge is done, so local sketch halves
 * always have exactly one accessor. With double buffering the worker flips
 * to its spare sketch first and keeps ingesting while the inactive half is
 * merged.
 *
 * Threading: update(i, ...) only from worker i's owning thread; one
 * propagator (background thread, or the caller via propagator_step());
 * query() from any number of threads; flush() only while no updates are in
 * flight.
 *
 * Staleness: a query reflects all but at most relaxation() = 2Nb (Nb
 * unoptimised) of the updates that precede it. Sketches whose snapshots
 * expose only aligned structure (the quantiles levels) can hide up to one
 * partial buffer more when b is not a multiple of their flush size; nothing
 * is lost, and flush() still drains every update into the global sketch.
 */
template <composable_sketch Sketch>
class concurrent_engine {
public:
  using item_type = typename Sketch::item_type;
  using hint_type = typename Sketch::hint_type;
  using factory_type = std::function<Sketch(uint32_t)>;

  /// The factory is called with 0 for the global sketch and 1..N for each
  /// worker's local pair. Sketches that consume coins are rewired to one
  /// stream per worker so coin order does not depend on buffer flips.
  concurrent_engine(const engine_config& cfg, const factory_type& factory) : cfg_(cfg) {
    if (cfg.workers < 1) throw std::invalid_argument("engine requires at least one worker");
    if (cfg.buffer < 1) throw std::invalid_argument("engine requires buffer capacity >= 1");
    global_ = std::make_unique<Sketch>(factory(0));
    workers_.reserve(cfg.workers);
    for (uint32_t i = 1; i <= cfg.workers; ++i) {
      auto ctx = std::make_unique<worker_ctx>(factory(i), factory(i),
                                              global_->randomness().with_stream(i));
      if (!ctx->local[0].compatible_with(*global_) ||
          !ctx->local[1].compatible_with(*global_)) {
        throw std::invalid_argument("worker sketch configuration differs from global");
      }
      if constexpr (requires(Sketch& s, oracle& o) { s.set_coin_stream(o); }) {
        ctx->local[0].set_coin_stream(ctx->coins);
        ctx->local[1].set_coin_stream(ctx->coins);
      }
      workers_.push_back(std::move(ctx));
    }
    if (cfg_.auto_propagate) start_propagator();
  }

  ~concurrent_engine() { stop(); }

  concurrent_engine(const concurrent_engine&) = delete;
  concurrent_engine& operator=(const concurrent_engine&) = delete;

  /// Ingest one item on behalf of worker i (0-based). Owner thread only.
  void update(uint32_t i, const item_type& item) {
    worker_ctx& w = *workers_[i];
    ++w.offered;
    if (!w.local[w.cur].should_add(w.hint, item)) {
      ++w.dropped;
      return;
    }
    ++w.counter;
    {
      access_guard g(w.owner[w.cur]);
      w.local[w.cur].update(item);
    }
    if (w.counter == cfg_.buffer) {
      if (cfg_.optimised) {
        wait_nonzero(w); // previous handoff fully served
        w.cur ^= 1u;
        w.hint = w.prop.load(std::memory_order_acquire);
        w.counter = 0;
        w.prop.store(hint_type{}, std::memory_order_release);
      } else {
        w.prop.store(hint_type{}, std::memory_order_release);
        wait_nonzero(w);
        w.hint = w.prop.load(std::memory_order_acquire);
        w.counter = 0;
      }
    }
  }

  /// One round-robin scan: merges every flagged worker's inactive local
  /// sketch into the global sketch and publishes the fresh hint. Returns the
  /// number of merges performed. Propagator thread only.
  size_t propagator_step() {
    size_t merges = 0;
    for (auto& wp : workers_) {
      worker_ctx& w = *wp;
      if (w.prop.load(std::memory_order_acquire) != hint_type{}) continue;
      const uint32_t idx = cfg_.optimised ? (1u - w.cur) : 0u;
      {
        access_guard g(w.owner[idx]);
        global_->merge(w.local[idx]);
        w.local[idx].reset();
      }
      const hint_type hint = global_->calc_hint();
      assert(hint != hint_type{});
      w.prop.store(hint, std::memory_order_release);
      ++merges;
    }
    return merges;
  }

  /// Snapshot the global sketch and query it; any thread, any time.
  template <typename... Args>
  auto query(Args&&... args) const {
    return global_->snapshot().query(std::forward<Args>(args)...);
  }

  /// Forces every locally buffered update into the global sketch and waits
  /// until merged. Requires quiescence: no update() call may be in flight.
  void flush() {
    for (auto& wp : workers_) {
      worker_ctx& w = *wp;
      if (cfg_.optimised) {
        wait_nonzero(w); // drain any pending handoff of the inactive half
        w.cur ^= 1u;
        w.hint = w.prop.load(std::memory_order_acquire);
        w.counter = 0;
        w.prop.store(hint_type{}, std::memory_order_release);
        wait_nonzero(w); // residual half merged
        w.hint = w.prop.load(std::memory_order_acquire);
      } else {
        w.prop.store(hint_type{}, std::memory_order_release);
        wait_nonzero(w);
        w.hint = w.prop.load(std::memory_order_acquire);
        w.counter = 0;
      }
    }
  }

  void stop() {
    if (propagator_.joinable()) {
      running_.store(false, std::memory_order_release);
      propagator_.join();
    }
  }

  const engine_config& config() const noexcept { return cfg_; }
  uint64_t relaxation() const noexcept { return cfg_.relaxation(); }
  const Sketch& global() const noexcept { return *global_; }

  uint64_t offered(uint32_t i) const { return workers_[i]->offered; }
  uint64_t dropped(uint32_t i) const { return workers_[i]->dropped; }
  uint64_t retained(uint32_t i) const { return workers_[i]->offered - workers_[i]->dropped; }
  hint_type hint(uint32_t i) const { return workers_[i]->hint; }

  // Introspection for tests.
  uint32_t active_half(uint32_t i) const { return workers_[i]->cur; }
  const Sketch& local_half(uint32_t i, uint32_t half) const {
    return workers_[i]->local[half];
  }
  bool handoff_pending(uint32_t i) const {
    return workers_[i]->prop.load(std::memory_order_acquire) == hint_type{};
  }

  /// Invoked inside the worker-side wait loop; lets a single-threaded driver
  /// run the propagator while a worker is logically blocked.
  void set_wait_hook(std::function<void()> hook) { wait_hook_ = std::move(hook); }

private:
  struct alignas(64) worker_ctx {
    worker_ctx(Sketch&& a, Sketch&& b, const oracle& coin_stream)
        : local{std::move(a), std::move(b)}, coins(coin_stream) {}
    Sketch local[2];
    oracle coins;
    uint32_t cur = 0;
    uint32_t counter = 0;
    hint_type hint{1};
    std::atomic<hint_type> prop{hint_type{1}};
    uint64_t offered = 0;
    uint64_t dropped = 0;
    std::atomic<int> owner[2] = {0, 0};
  };

  // Asserts single-writer discipline on a local sketch half.
  struct access_guard {
#ifndef NDEBUG
    explicit access_guard(std::atomic<int>& token) : token_(token) {
      const int prev = token_.fetch_add(1, std::memory_order_acq_rel);
      assert(prev == 0 && "local sketch accessed by two threads");
    }
    ~access_guard() { token_.fetch_sub(1, std::memory_order_acq_rel); }
    std::atomic<int>& token_;
#else
    explicit access_guard(std::atomic<int>&) {}
#endif
  };

  void wait_nonzero(worker_ctx& w) {
    uint32_t spins = 0;
    while (w.prop.load(std::memory_order_acquire) == hint_type{}) {
      if (wait_hook_) {
        wait_hook_();
      } else if (!cfg_.auto_propagate) {
        propagator_step();
      } else if (++spins > 1024) {
        std::this_thread::yield();
      }
    }
  }

  void start_propagator() {
    running_.store(true, std::memory_order_release);
    propagator_ = std::thread([this] {
      uint32_t idle = 0;
      while (running_.load(std::memory_order_acquire)) {
        if (propagator_step() > 0) {
          idle = 0;
        } else if (++idle < 128) {
          std::this_thread::yield();
        } else {
          std::this_thread::sleep_for(std::chrono::microseconds(50));
        }
      }
    });
  }

  engine_config cfg_;
  std::unique_ptr<Sketch> global_;
  std::vector<std::unique_ptr<worker_ctx>> workers_;
  std::function<void()> wait_hook_;
  std::thread propagator_;
  std::atomic<bool> running_{false};
};

} // namespace sketches

#endif // SKETCHES_CONCURRENT_ENGINE_HPP_
