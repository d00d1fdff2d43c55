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

#include "sketches/record.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>

#include "sketches/csv.hpp"
#include "sketches/quantiles_sketch.hpp"
#include "sketches/theta_sketch.hpp"

namespace sketches {

namespace {

void put_meta(history_log& log, const char* kind, const engine_config& cfg,
              uint32_t k, uint64_t seed) {
  log.meta()["sketch"] = kind;
  log.meta()["k"] = std::to_string(k);
  log.meta()["seed"] = std::to_string(seed);
  log.meta()["workers"] = std::to_string(cfg.workers);
  log.meta()["buffer"] = std::to_string(cfg.buffer);
  log.meta()["optimised"] = cfg.optimised ? "1" : "0";
  log.meta()["relaxation"] = std::to_string(cfg.relaxation());
}

template <typename Sketch, typename UpdatePayload, typename QueryArgPayload, typename RunQuery>
history_log record_impl(const engine_config& cfg, uint32_t k, uint64_t seed,
                        const script& steps, const char* kind_name,
                        const UpdatePayload& update_payload,
                        const QueryArgPayload& query_arg,
                        const RunQuery& run_query) {
  engine_config manual = cfg;
  manual.auto_propagate = false;
  concurrent_engine<Sketch> engine(
      manual, [&](uint32_t) { return Sketch(k, oracle(seed)); });

  history_log log;
  put_meta(log, kind_name, cfg, k, seed);
  uint64_t now = 0;
  auto record = [&](uint32_t thread, event_kind ek, op_kind op, std::string payload) {
    log.append(history_event{now++, thread, ek, op, std::move(payload)});
  };

  for (const script_step& s : steps) {
    switch (s.action) {
      case script_step::kind::update: {
        if (s.worker < 1 || s.worker > cfg.workers) {
          throw std::invalid_argument("script worker id out of range");
        }
        record(s.worker, event_kind::invoke, op_kind::update, update_payload(s));
        engine.update(s.worker - 1, [&] {
          if constexpr (std::is_same_v<Sketch, theta_sketch>) {
            return s.item;
          } else {
            return s.value;
          }
        }());
        record(s.worker, event_kind::respond, op_kind::update, "");
        break;
      }
      case script_step::kind::query: {
        record(0, event_kind::invoke, op_kind::query, query_arg(s));
        // A sketch-specific query error (e.g. nothing propagated yet) is a
        // response like any other; "error" is checkable as the empty view.
        std::string payload;
        try {
          payload = format_double(run_query(engine, s));
        } catch (const std::runtime_error&) {
          payload = "error";
        }
        record(0, event_kind::respond, op_kind::query, payload);
        break;
      }
      case script_step::kind::propagate:
        engine.propagator_step();
        break;
      case script_step::kind::flush:
        record(0, event_kind::invoke, op_kind::flush, "");
        engine.flush();
        record(0, event_kind::respond, op_kind::flush, "");
        break;
    }
  }
  return log;
}

} // namespace

history_log record_history_theta(const engine_config& cfg, uint32_t k, uint64_t seed,
                                 const script& steps) {
  return record_impl<theta_sketch>(
      cfg, k, seed, steps, "theta",
      [](const script_step& s) { return std::to_string(s.item); },
      [](const script_step&) { return std::string(); },
      [](concurrent_engine<theta_sketch>& e, const script_step&) { return e.query(); });
}

history_log record_history_quantiles(const engine_config& cfg, uint32_t k, uint64_t seed,
                                     const script& steps) {
  return record_impl<quantiles_sketch>(
      cfg, k, seed, steps, "quantiles",
      [](const script_step& s) { return format_double(s.value); },
      [](const script_step& s) { return format_double(s.phi); },
      [](concurrent_engine<quantiles_sketch>& e, const script_step& s) {
        return e.query(s.phi);
      });
}

history_log record_history_theta_threaded(const engine_config& cfg, uint32_t k,
                                          uint64_t seed,
                                          const std::vector<std::vector<uint64_t>>& items,
                                          uint32_t queries) {
  if (items.size() != cfg.workers) {
    throw std::invalid_argument("one item list per worker required");
  }
  engine_config running = cfg;
  running.auto_propagate = true;
  concurrent_engine<theta_sketch> engine(
      running, [&](uint32_t) { return theta_sketch(k, oracle(seed)); });

  const auto now_ns = [] {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
  };

  // Per-thread buffers, no cross-thread contention during the run.
  std::vector<std::vector<history_event>> buffers(cfg.workers + 1);
  std::atomic<bool> writers_done{false};
  std::vector<std::thread> threads;
  for (uint32_t w = 0; w < cfg.workers; ++w) {
    threads.emplace_back([&, w] {
      auto& buf = buffers[w + 1];
      buf.reserve(2 * items[w].size());
      for (uint64_t item : items[w]) {
        buf.push_back({now_ns(), w + 1, event_kind::invoke, op_kind::update,
                       std::to_string(item)});
        engine.update(w, item);
        buf.push_back({now_ns(), w + 1, event_kind::respond, op_kind::update, ""});
      }
    });
  }
  std::thread query_thread([&] {
    auto& buf = buffers[0];
    for (uint32_t q = 0; q < queries; ++q) {
      buf.push_back({now_ns(), 0, event_kind::invoke, op_kind::query, ""});
      const double answer = engine.query();
      buf.push_back({now_ns(), 0, event_kind::respond, op_kind::query,
                     format_double(answer)});
      if (writers_done.load(std::memory_order_acquire)) break;
      std::this_thread::yield();
    }
  });
  for (auto& t : threads) t.join();
  writers_done.store(true, std::memory_order_release);
  query_thread.join();
  engine.flush();
  engine.stop();

  history_log log;
  put_meta(log, "theta", cfg, k, seed);
  std::vector<history_event> merged;
  for (auto& buf : buffers) {
    merged.insert(merged.end(), buf.begin(), buf.end());
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const history_event& a, const history_event& b) {
                     return a.timestamp < b.timestamp;
                   });
  for (auto& e : merged) log.append(std::move(e));
  return log;
}

} // namespace sketches
