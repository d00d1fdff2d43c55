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

#include "sketches/relaxation_checker.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sketches/quantiles_sketch.hpp"

namespace sketches {

namespace {

struct parsed_update {
  uint64_t invoke_ts;
  uint64_t respond_ts;
  uint32_t thread;
  uint32_t per_thread_index; // ordinal among this thread's updates
  std::string payload;
};

struct parsed_query {
  uint64_t invoke_ts;
  uint64_t respond_ts;
  std::string arg;
  std::string answer;
};

struct parsed_history {
  std::vector<parsed_update> updates;
  std::vector<parsed_query> queries;
};

parsed_history parse(const history_log& h) {
  const std::string malformed = h.well_formed();
  if (!malformed.empty()) throw std::runtime_error("malformed history: " + malformed);
  parsed_history out;
  std::map<uint32_t, size_t> open_update;   // thread -> index into updates
  std::map<uint32_t, size_t> open_query;    // thread -> index into queries
  std::map<uint32_t, uint32_t> update_seq;  // thread -> ordinal counter
  for (const history_event& e : h.events()) {
    switch (e.op) {
      case op_kind::update:
        if (e.kind == event_kind::invoke) {
          parsed_update u;
          u.invoke_ts = e.timestamp;
          u.respond_ts = 0;
          u.thread = e.thread;
          u.per_thread_index = update_seq[e.thread]++;
          u.payload = e.payload;
          open_update[e.thread] = out.updates.size();
          out.updates.push_back(std::move(u));
        } else {
          out.updates[open_update.at(e.thread)].respond_ts = e.timestamp;
        }
        break;
      case op_kind::query:
        if (e.kind == event_kind::invoke) {
          parsed_query q;
          q.invoke_ts = e.timestamp;
          q.respond_ts = 0;
          q.arg = e.payload;
          open_query[e.thread] = out.queries.size();
          out.queries.push_back(std::move(q));
        } else {
          parsed_query& q = out.queries[open_query.at(e.thread)];
          q.answer = e.payload;
          q.respond_ts = e.timestamp;
        }
        break;
      case op_kind::flush:
        break;
    }
  }
  return out;
}

// Windows per query: P = responded strictly before the query's invoke,
// C = invoked strictly before the query's respond.
struct query_window {
  std::vector<size_t> preceding; // indexes into updates
  std::vector<size_t> optional;  // C \ P
};

query_window window_of(const parsed_history& ph, const parsed_query& q) {
  query_window w;
  for (size_t i = 0; i < ph.updates.size(); ++i) {
    const parsed_update& u = ph.updates[i];
    if (u.respond_ts < q.invoke_ts) {
      w.preceding.push_back(i);
    } else if (u.invoke_ts < q.respond_ts) {
      w.optional.push_back(i);
    }
  }
  return w;
}

} // namespace

double sequential_theta_estimate(std::vector<double> hashes, uint64_t k) {
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  if (hashes.empty()) return 0.0;
  if (hashes.size() < k) return static_cast<double>(hashes.size()) - 1.0;
  return (static_cast<double>(k) - 1.0) / hashes[k - 1];
}

namespace {

struct hash_census {
  // Distinct preceding hashes with their invocation multiplicities.
  std::vector<std::pair<double, uint64_t>> preceding; // sorted by hash
  std::vector<double> optional_only;                  // sorted, not in preceding
  uint64_t preceding_invocations = 0;
};

hash_census census_of(const std::vector<double>& preceding,
                      const std::vector<double>& optional) {
  hash_census c;
  std::map<double, uint64_t> mult;
  for (double h : preceding) ++mult[h];
  c.preceding.assign(mult.begin(), mult.end());
  c.preceding_invocations = preceding.size();
  std::set<double> opts(optional.begin(), optional.end());
  for (double h : opts) {
    if (!mult.count(h)) c.optional_only.push_back(h);
  }
  return c;
}

// Cheapest way to keep exactly `keep` of the preceding distinct hashes is to
// drop those with the smallest multiplicities.
uint64_t min_cost_to_keep(const hash_census& c, size_t keep) {
  std::vector<uint64_t> mults;
  mults.reserve(c.preceding.size());
  for (const auto& [h, m] : c.preceding) mults.push_back(m);
  std::sort(mults.begin(), mults.end());
  uint64_t cost = 0;
  const size_t drop = c.preceding.size() - keep;
  for (size_t i = 0; i < drop; ++i) cost += mults[i];
  return cost;
}

bool subfull_feasible(const hash_census& c, uint64_t k, uint64_t r, double answer) {
  // Reachable small states: final distinct count s < k gives the integer
  // estimate s - 1 (0 when empty).
  const size_t p = c.preceding.size();
  const size_t o = c.optional_only.size();
  for (uint64_t s = 0; s < k; ++s) {
    const double est = s == 0 ? 0.0 : static_cast<double>(s) - 1.0;
    if (est != answer) continue;
    const size_t kept = std::min<size_t>(p, s);
    if (s - kept > o) continue; // not enough distinct optionals
    if (min_cost_to_keep(c, kept) <= r) return true;
  }
  return false;
}

bool full_feasible(const hash_census& c, uint64_t k, uint64_t r, double answer) {
  // Candidate thresholds are the distinct hashes themselves; theta = d needs
  // exactly k - 1 distinct hashes below d and d itself present.
  const double km1 = static_cast<double>(k) - 1.0;
  auto try_candidate = [&](double d, bool d_from_preceding) {
    if (km1 / d != answer) return false;
    size_t below_p = 0;
    uint64_t budget = r;
    std::vector<uint64_t> below_mults;
    for (const auto& [h, m] : c.preceding) {
      if (h < d) {
        ++below_p;
        below_mults.push_back(m);
      }
    }
    size_t below_o = 0;
    for (double h : c.optional_only) {
      if (h < d) ++below_o;
    }
    (void)d_from_preceding; // keeping d costs nothing either way
    if (below_p > k - 1) {
      const size_t drop = below_p - (k - 1);
      std::sort(below_mults.begin(), below_mults.end());
      uint64_t cost = 0;
      for (size_t i = 0; i < drop; ++i) cost += below_mults[i];
      return cost <= budget;
    }
    return below_o >= (k - 1) - below_p;
  };
  for (const auto& [h, m] : c.preceding) {
    if (try_candidate(h, true)) return true;
  }
  for (double h : c.optional_only) {
    if (try_candidate(h, false)) return true;
  }
  return false;
}

} // namespace

bool theta_answer_attainable(const std::vector<double>& preceding_hashes,
                             const std::vector<double>& optional_hashes,
                             uint64_t k, uint64_t r, double answer) {
  const hash_census c = census_of(preceding_hashes, optional_hashes);
  return subfull_feasible(c, k, r, answer) || full_feasible(c, k, r, answer);
}

bool theta_answer_attainable_brute(const std::vector<double>& preceding_hashes,
                                   const std::vector<double>& optional_hashes,
                                   uint64_t k, uint64_t r, double answer) {
  const auto answers =
      theta_attainable_answers(preceding_hashes, optional_hashes, k, r);
  return std::binary_search(answers.begin(), answers.end(), answer);
}

std::vector<double> theta_attainable_answers(const std::vector<double>& preceding_hashes,
                                             const std::vector<double>& optional_hashes,
                                             uint64_t k, uint64_t r) {
  const size_t p = preceding_hashes.size();
  const size_t o = optional_hashes.size();
  if (p + o > 24) throw std::invalid_argument("instance too large for enumeration");
  std::set<double> answers;
  std::vector<double> chosen;
  for (uint64_t mask = 0; mask < (uint64_t{1} << (p + o)); ++mask) {
    uint64_t hidden = 0;
    chosen.clear();
    for (size_t i = 0; i < p; ++i) {
      if ((mask >> i) & 1u) {
        ++hidden;
      } else {
        chosen.push_back(preceding_hashes[i]);
      }
    }
    if (hidden > r) continue;
    for (size_t i = 0; i < o; ++i) {
      if ((mask >> (p + i)) & 1u) chosen.push_back(optional_hashes[i]);
    }
    answers.insert(sequential_theta_estimate(chosen, k));
  }
  return {answers.begin(), answers.end()};
}

namespace {

// Minimal omission budget that reaches the answer, for fail diagnostics.
// Feasibility is monotone in the budget.
int64_t minimal_budget(const std::vector<double>& preceding,
                       const std::vector<double>& optional, uint64_t k, double answer) {
  uint64_t lo = 0;
  uint64_t hi = preceding.size();
  if (!theta_answer_attainable(preceding, optional, k, hi, answer)) return -1;
  while (lo < hi) {
    const uint64_t mid = lo + (hi - lo) / 2;
    if (theta_answer_attainable(preceding, optional, k, mid, answer)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return static_cast<int64_t>(lo);
}

check_verdict check_theta_impl(const history_log& h, uint64_t r, uint64_t k,
                               const std::function<double(const std::string&)>& hash_of,
                               check_mode mode) {
  const parsed_history ph = parse(h);
  std::vector<double> hashes(ph.updates.size());
  for (size_t i = 0; i < ph.updates.size(); ++i) {
    hashes[i] = hash_of(ph.updates[i].payload);
  }
  for (size_t qi = 0; qi < ph.queries.size(); ++qi) {
    const parsed_query& q = ph.queries[qi];
    const query_window w = window_of(ph, q);
    std::vector<double> preceding, optional;
    preceding.reserve(w.preceding.size());
    optional.reserve(w.optional.size());
    for (size_t i : w.preceding) preceding.push_back(hashes[i]);
    for (size_t i : w.optional) optional.push_back(hashes[i]);
    if (q.answer == "error") {
      check_verdict v;
      v.result = check_verdict::status::fail;
      v.failed_query = qi;
      v.detail = "theta queries cannot error; history is not from a theta engine";
      return v;
    }
    const double answer = std::stod(q.answer);
    const bool ok = mode == check_mode::fast
        ? theta_answer_attainable(preceding, optional, k, r, answer)
        : theta_answer_attainable_brute(preceding, optional, k, r, answer);
    if (!ok) {
      check_verdict v;
      v.result = check_verdict::status::fail;
      v.failed_query = qi;
      std::ostringstream msg;
      msg << "query " << qi << " answer " << q.answer << " not attainable with budget "
          << r << " over " << preceding.size() << " preceding / " << optional.size()
          << " optional updates";
      const int64_t need = minimal_budget(preceding, optional, k, answer);
      if (need < 0) {
        msg << "; unattainable under any omission set";
      } else {
        msg << "; needs budget " << need;
      }
      v.detail = msg.str();
      return v;
    }
  }
  return {};
}

} // namespace

check_verdict check_relaxation_theta(const history_log& h, uint64_t r, uint64_t k,
                                     const oracle& orc, check_mode mode) {
  return check_theta_impl(
      h, r, k,
      [&orc](const std::string& payload) { return orc.hash(std::stoull(payload)); },
      mode);
}

check_verdict check_relaxation_theta(const history_log& h, uint64_t r, uint64_t k,
                                     const std::function<double(const std::string&)>& hash_of,
                                     check_mode mode) {
  return check_theta_impl(h, r, k, hash_of, mode);
}

namespace {

struct quantile_update {
  double value;
  int coin;
  uint32_t thread;
  uint32_t ordinal;
};

// Interleavings consistent with per-worker order, visited by DFS over the
// per-worker queues. Returns false when the candidate budget runs out.
bool replay_orders(const std::vector<std::vector<quantile_update>>& queues,
                   uint64_t k, double phi, double answer, uint64_t& budget,
                   bool& found) {
  std::vector<size_t> pos(queues.size(), 0);
  std::vector<const quantile_update*> sequence;
  size_t total = 0;
  for (const auto& q : queues) total += q.size();
  sequence.reserve(total);

  std::function<bool()> dfs = [&]() -> bool {
    if (found) return true;
    if (sequence.size() == total) {
      if (budget == 0) return false;
      --budget;
      oracle dummy(0);
      quantiles_sketch replay(static_cast<uint32_t>(k), dummy);
      for (const quantile_update* u : sequence) {
        replay.update_with_coin(u->value, u->coin);
      }
      try {
        if (replay.query(phi) == answer) found = true;
      } catch (const std::runtime_error&) {
        // empty replay cannot answer
      }
      return true;
    }
    for (size_t w = 0; w < queues.size(); ++w) {
      if (pos[w] == queues[w].size()) continue;
      sequence.push_back(&queues[w][pos[w]]);
      ++pos[w];
      const bool within = dfs();
      --pos[w];
      sequence.pop_back();
      if (!within) return false;
      if (found) return true;
    }
    return true;
  };
  return dfs();
}

} // namespace

check_verdict check_relaxation_quantiles(const history_log& h, uint64_t r, uint64_t k,
                                         const oracle& base, uint64_t max_candidates) {
  const parsed_history ph = parse(h);
  std::vector<quantile_update> all(ph.updates.size());
  for (size_t i = 0; i < ph.updates.size(); ++i) {
    const parsed_update& u = ph.updates[i];
    all[i].value = std::stod(u.payload);
    all[i].coin = base.with_stream(u.thread).coin_at(u.per_thread_index);
    all[i].thread = u.thread;
    all[i].ordinal = u.per_thread_index;
  }

  for (size_t qi = 0; qi < ph.queries.size(); ++qi) {
    const parsed_query& q = ph.queries[qi];
    const query_window w = window_of(ph, q);
    const size_t np = w.preceding.size();
    const size_t no = w.optional.size();
    if (q.answer == "error") {
      // Only the empty admissible set reproduces an error response:
      // sequential replay of any nonempty subset answers. Feasible iff the
      // whole preceding window fits in the omission budget.
      if (np <= r) continue;
      check_verdict v;
      v.result = check_verdict::status::fail;
      v.failed_query = qi;
      v.detail = "query " + std::to_string(qi) + " errored with " + std::to_string(np) +
                 " preceding updates but budget " + std::to_string(r);
      return v;
    }
    if (np + no > 24) {
      check_verdict v;
      v.result = check_verdict::status::inconclusive;
      v.failed_query = qi;
      v.detail = "window of " + std::to_string(np + no) + " updates is too large to enumerate";
      return v;
    }
    const double phi = std::stod(q.arg);
    const double answer = std::stod(q.answer);
    uint64_t budget = max_candidates;
    bool found = false;
    bool exhausted = false;

    for (uint64_t mask = 0; mask < (uint64_t{1} << (np + no)) && !found; ++mask) {
      uint64_t hidden = 0;
      for (size_t i = 0; i < np; ++i) {
        if ((mask >> i) & 1u) ++hidden;
      }
      if (hidden > r) continue;
      std::vector<size_t> included;
      for (size_t i = 0; i < np; ++i) {
        if (!((mask >> i) & 1u)) included.push_back(w.preceding[i]);
      }
      for (size_t i = 0; i < no; ++i) {
        if ((mask >> (np + i)) & 1u) included.push_back(w.optional[i]);
      }

      if (included.size() <= 2 * k) {
        // At most one terminal zip: the state depends only on the tuple
        // multiset, so a single replay decides this subset.
        if (budget == 0) { exhausted = true; break; }
        --budget;
        oracle dummy(0);
        quantiles_sketch replay(static_cast<uint32_t>(k), dummy);
        for (size_t idx : included) {
          replay.update_with_coin(all[idx].value, all[idx].coin);
        }
        if (!included.empty() && replay.query(phi) == answer) found = true;
        continue;
      }

      // Order can matter: enumerate per-worker-consistent interleavings.
      std::map<uint32_t, std::vector<quantile_update>> by_thread;
      for (size_t idx : included) by_thread[all[idx].thread].push_back(all[idx]);
      std::vector<std::vector<quantile_update>> queues;
      for (auto& [thread, ups] : by_thread) {
        std::sort(ups.begin(), ups.end(),
                  [](const quantile_update& a, const quantile_update& b) {
                    return a.ordinal < b.ordinal;
                  });
        queues.push_back(std::move(ups));
      }
      if (!replay_orders(queues, k, phi, answer, budget, found)) {
        exhausted = true;
        break;
      }
    }

    if (found) continue;
    check_verdict v;
    v.failed_query = qi;
    if (exhausted) {
      v.result = check_verdict::status::inconclusive;
      v.detail = "candidate budget exhausted before a witness was found";
    } else {
      v.result = check_verdict::status::fail;
      v.detail = "query " + std::to_string(qi) + " answer " + q.answer +
                 " not reproducible by any admissible subset and order";
    }
    return v;
  }
  return {};
}

} // namespace sketches
