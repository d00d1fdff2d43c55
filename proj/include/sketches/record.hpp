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

#ifndef SKETCHES_RECORD_HPP_
#define SKETCHES_RECORD_HPP_

#include <cstdint>
#include <vector>

#include "concurrent_engine.hpp"
#include "history.hpp"

namespace sketches {

/// One step of a deterministic interleaving: a worker update, a query, a
/// propagator scan, or a flush. Workers are 1-based, matching history
/// thread ids; queries and flushes run on thread 0.
struct script_step {
  enum class kind { update, query, propagate, flush };
  kind action;
  uint32_t worker = 0;
  uint64_t item = 0;  // theta update payload
  double value = 0.0; // quantiles update payload
  double phi = 0.0;   // quantiles query argument
};

using script = std::vector<script_step>;

inline script_step step_update(uint32_t worker, uint64_t item) {
  return {script_step::kind::update, worker, item, 0.0, 0.0};
}
inline script_step step_update_value(uint32_t worker, double value) {
  return {script_step::kind::update, worker, 0, value, 0.0};
}
inline script_step step_query(double phi = 0.0) {
  return {script_step::kind::query, 0, 0, 0.0, phi};
}
inline script_step step_propagate() {
  return {script_step::kind::propagate, 0, 0, 0.0, 0.0};
}
inline script_step step_flush() {
  return {script_step::kind::flush, 0, 0, 0.0, 0.0};
}

/**
 * Runs the script against a manually propagated engine on the calling
 * thread and records each operation's invoke/response with logical
 * timestamps. Same seed + same script gives a byte-identical log. Explicit
 * propagate steps control staleness; a worker that fills its buffer between
 * propagate steps drives the propagator itself rather than deadlocking.
 */
history_log record_history_theta(const engine_config& cfg, uint32_t k, uint64_t seed,
                                 const script& steps);
history_log record_history_quantiles(const engine_config& cfg, uint32_t k, uint64_t seed,
                                     const script& steps);

/**
 * Free-running recording: worker threads ingest their item lists at full
 * speed under the background propagator while one query thread issues the
 * given number of queries; every operation is stamped with monotonic-clock
 * nanoseconds into per-thread buffers that are merged at quiescence. The
 * interleaving (and so the log) is nondeterministic; the result is intended
 * for the relaxation checker.
 */
history_log record_history_theta_threaded(const engine_config& cfg, uint32_t k,
                                          uint64_t seed,
                                          const std::vector<std::vector<uint64_t>>& items,
                                          uint32_t queries);

} // namespace sketches

#endif // SKETCHES_RECORD_HPP_
