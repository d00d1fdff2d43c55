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

#ifndef SKETCHES_RELAXATION_CHECKER_HPP_
#define SKETCHES_RELAXATION_CHECKER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "history.hpp"
#include "oracle.hpp"

namespace sketches {

/**
 * Offline r-relaxation checking. For every query response v in a history,
 * with P the updates that responded before the query's invocation and C the
 * updates invoked before the query's response, the checker decides whether
 * some admissible update set A with (P minus at most r) subset-of A
 * subset-of C replays sequentially to exactly v. Real-time precedence comes
 * only from strict respond-before-invoke timestamp ordering.
 */
struct check_verdict {
  enum class status { pass, fail, inconclusive };
  status result = status::pass;
  size_t failed_query = 0; // 0-based query index when result != pass
  std::string detail;

  bool passed() const noexcept { return result == status::pass; }
};

enum class check_mode { fast, brute_force };

/// Sequential KMV estimate over a set of update hashes: distinct hashes are
/// collapsed, theta is 1 below k retained samples and the k-th smallest
/// otherwise, and the estimate is (|samples| - 1) / theta.
double sequential_theta_estimate(std::vector<double> hashes, uint64_t k);

/// Decides whether `answer` is reachable from the preceding updates by
/// hiding at most r of them (invocations, not distinct hashes) and adding
/// any subset of the optional ones. The fast path sweeps candidate
/// thresholds over the sorted distinct hashes with an r-budget; the brute
/// force enumerates every subset and is intended for cross-checking small
/// instances.
bool theta_answer_attainable(const std::vector<double>& preceding_hashes,
                             const std::vector<double>& optional_hashes,
                             uint64_t k, uint64_t r, double answer);
bool theta_answer_attainable_brute(const std::vector<double>& preceding_hashes,
                                   const std::vector<double>& optional_hashes,
                                   uint64_t k, uint64_t r, double answer);

/// All answers reachable under the budget, by brute-force enumeration.
/// Sorted ascending, deduplicated. Sized for small instances only.
std::vector<double> theta_attainable_answers(const std::vector<double>& preceding_hashes,
                                             const std::vector<double>& optional_hashes,
                                             uint64_t k, uint64_t r);

/// Checks every query in a theta-engine history. Update payloads are
/// decimal 64-bit items re-hashed through the oracle.
check_verdict check_relaxation_theta(const history_log& h, uint64_t r, uint64_t k,
                                     const oracle& orc,
                                     check_mode mode = check_mode::fast);

/// As above with a caller-supplied item-payload hash, for synthetic
/// histories that carry raw hashes.
check_verdict check_relaxation_theta(const history_log& h, uint64_t r, uint64_t k,
                                     const std::function<double(const std::string&)>& hash_of,
                                     check_mode mode = check_mode::fast);

/**
 * Exact checker for quantiles-engine histories: enumerates every admissible
 * subset (at most r of the preceding updates hidden, optional updates free)
 * and, when an ingest order can matter (more than 2k tuples), every
 * interleaving consistent with per-worker program order; each candidate is
 * replayed through a fresh sketch with the coins the workers actually drew
 * (worker w's t-th update consumed coin t of stream w). Instances whose
 * candidate count exceeds max_candidates return inconclusive rather than a
 * guess.
 */
check_verdict check_relaxation_quantiles(const history_log& h, uint64_t r, uint64_t k,
                                         const oracle& base,
                                         uint64_t max_candidates = 2000000);

} // namespace sketches

#endif // SKETCHES_RELAXATION_CHECKER_HPP_
