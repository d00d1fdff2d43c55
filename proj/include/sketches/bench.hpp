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

#ifndef SKETCHES_BENCH_HPP_
#define SKETCHES_BENCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "concurrent_engine.hpp"

namespace sketches {

enum class sketch_kind { theta, quantiles };

struct bench_config {
  sketch_kind kind = sketch_kind::theta;
  engine_config engine; // workers, buffer, optimised
  uint32_t k = 4096;
  uint64_t seed = 1;
  double seconds = 1.0;
  uint64_t distinct_items = uint64_t{1} << 20;
  bool lock_baseline = false; // mutex around one sequential sketch instead
};

/**
 * Update-only run: each worker thread offers items at full speed until the
 * deadline. total_updates counts the updates retained by the local sketches
 * (offered minus those the hint filter dropped); throughput is offered
 * update operations per second, the rate a caller of update() experiences.
 */
struct bench_report {
  bench_config config;
  double duration_seconds = 0.0;
  uint64_t offered = 0;
  uint64_t dropped = 0;
  uint64_t total_updates = 0; // offered - dropped
  double throughput = 0.0;    // offered / duration
  std::vector<uint64_t> per_thread;         // retained per worker
  std::vector<uint64_t> per_thread_offered; // offered per worker

  std::string to_text() const;
};

bench_report bench_run(const bench_config& cfg);

} // namespace sketches

#endif // SKETCHES_BENCH_HPP_
