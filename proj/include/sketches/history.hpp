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

#ifndef SKETCHES_HISTORY_HPP_
#define SKETCHES_HISTORY_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sketches {

enum class event_kind { invoke, respond };
enum class op_kind { update, query, flush };

/// One invoke or response step. Payload meaning by op:
///   update  invoke: the item (decimal u64 for theta, %.17g double for
///           quantiles); respond: empty.
///   query   invoke: the argument (phi for quantiles, empty for theta);
///           respond: the answer, %.17g.
///   flush   both empty.
struct history_event {
  uint64_t timestamp; // monotonic; logical counter under a script
  uint32_t thread;    // worker ids 1..N; query/flush driver is thread 0
  event_kind kind;
  op_kind op;
  std::string payload;
};

/**
 * Timestamped invoke/response record of an engine run, consumed by the
 * relaxation checkers. Per thread, invokes and responses alternate;
 * precedence between operations is derived only from response-before-invoke
 * ordering of the timestamps.
 */
class history_log {
public:
  void append(history_event e) { events_.push_back(std::move(e)); }

  const std::vector<history_event>& events() const noexcept { return events_; }
  size_t size() const noexcept { return events_.size(); }

  /// Per-thread invoke/respond alternation and non-decreasing timestamps.
  /// Returns an empty string when well formed, else a diagnostic.
  std::string well_formed() const;

  /// Arbitrary run metadata (sketch kind, k, seed, workers, buffer, ...),
  /// persisted as "# key value" lines ahead of the events.
  std::map<std::string, std::string>& meta() noexcept { return meta_; }
  const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

  /// Text form: meta lines, a header line, then one CSV event row per line.
  /// Identical logs serialise to identical bytes.
  std::string to_text() const;
  static history_log from_text(const std::string& text);

  void save(const std::string& path) const;
  static history_log load(const std::string& path);

private:
  std::vector<history_event> events_;
  std::map<std::string, std::string> meta_;
};

} // namespace sketches

#endif // SKETCHES_HISTORY_HPP_
