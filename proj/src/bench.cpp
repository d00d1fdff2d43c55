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

#include "sketches/bench.hpp"

#include <chrono>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sketches/quantiles_sketch.hpp"
#include "sketches/theta_sketch.hpp"

namespace sketches {

namespace {

using clock = std::chrono::steady_clock;

double item_value(uint64_t item) {
  return static_cast<double>(detail::splitmix64_at(0x5eedULL, item) >> 11) * 0x1.0p-53;
}

struct run_totals {
  double duration = 0.0;
  std::vector<uint64_t> offered;
  std::vector<uint64_t> retained;
};

// Per-worker item streams cycle over disjoint slices of the distinct pool.
template <typename Body>
run_totals drive_workers(const bench_config& cfg, const Body& body) {
  const uint32_t n = cfg.engine.workers;
  run_totals totals;
  totals.offered.assign(n, 0);
  totals.retained.assign(n, 0);
  const auto deadline = clock::now() + std::chrono::duration<double>(cfg.seconds);
  const auto start = clock::now();
  std::vector<std::thread> threads;
  for (uint32_t w = 0; w < n; ++w) {
    threads.emplace_back([&, w] {
      const uint64_t slice = std::max<uint64_t>(1, cfg.distinct_items / n);
      uint64_t i = 0;
      uint64_t count = 0;
      while (clock::now() < deadline) {
        for (int batch = 0; batch < 512; ++batch) {
          const uint64_t item = w + n * (i % slice);
          body(w, item);
          ++i;
          ++count;
        }
      }
      totals.offered[w] = count;
    });
  }
  for (auto& t : threads) t.join();
  totals.duration = std::chrono::duration<double>(clock::now() - start).count();
  return totals;
}

template <typename Sketch>
bench_report run_engine(const bench_config& cfg) {
  concurrent_engine<Sketch> engine(cfg.engine, [&](uint32_t) {
    return Sketch(cfg.k, oracle(cfg.seed));
  });
  run_totals totals = drive_workers(cfg, [&](uint32_t w, uint64_t item) {
    if constexpr (std::is_same_v<Sketch, theta_sketch>) {
      engine.update(w, item);
    } else {
      engine.update(w, item_value(item));
    }
  });
  engine.flush();
  engine.stop();

  bench_report report;
  report.config = cfg;
  report.duration_seconds = totals.duration;
  for (uint32_t w = 0; w < cfg.engine.workers; ++w) {
    report.per_thread_offered.push_back(engine.offered(w));
    report.per_thread.push_back(engine.retained(w));
    report.offered += engine.offered(w);
    report.dropped += engine.dropped(w);
  }
  report.total_updates = report.offered - report.dropped;
  report.throughput = static_cast<double>(report.offered) / totals.duration;
  return report;
}

template <typename Sketch>
bench_report run_lock_baseline(const bench_config& cfg) {
  Sketch shared(cfg.k, oracle(cfg.seed));
  std::mutex mtx;
  run_totals totals = drive_workers(cfg, [&](uint32_t, uint64_t item) {
    std::lock_guard<std::mutex> guard(mtx);
    if constexpr (std::is_same_v<Sketch, theta_sketch>) {
      shared.update(item);
    } else {
      shared.update(item_value(item));
    }
  });

  bench_report report;
  report.config = cfg;
  report.duration_seconds = totals.duration;
  report.per_thread_offered = totals.offered;
  report.per_thread = totals.offered; // nothing is hint-filtered under the lock
  for (uint64_t c : totals.offered) report.offered += c;
  report.total_updates = report.offered;
  report.throughput = static_cast<double>(report.offered) / totals.duration;
  return report;
}

} // namespace

bench_report bench_run(const bench_config& cfg) {
  if (cfg.seconds <= 0.0) throw std::invalid_argument("bench duration must be positive");
  if (cfg.kind == sketch_kind::theta) {
    return cfg.lock_baseline ? run_lock_baseline<theta_sketch>(cfg)
                             : run_engine<theta_sketch>(cfg);
  }
  return cfg.lock_baseline ? run_lock_baseline<quantiles_sketch>(cfg)
                           : run_engine<quantiles_sketch>(cfg);
}

std::string bench_report::to_text() const {
  std::ostringstream out;
  out << "sketch=" << (config.kind == sketch_kind::theta ? "theta" : "quantiles")
      << " mode=" << (config.lock_baseline ? "lock-baseline" : "concurrent")
      << " workers=" << config.engine.workers << " buffer=" << config.engine.buffer
      << " optimised=" << (config.engine.optimised ? 1 : 0) << " k=" << config.k
      << " seed=" << config.seed << '\n';
  out << "duration_s=" << duration_seconds << " offered=" << offered
      << " dropped=" << dropped << " total_updates=" << total_updates
      << " throughput_ops_per_s=" << throughput << '\n';
  out << "per_thread_retained=";
  for (size_t i = 0; i < per_thread.size(); ++i) {
    if (i) out << ',';
    out << per_thread[i];
  }
  out << '\n';
  return out.str();
}

} // namespace sketches
