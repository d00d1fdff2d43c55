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

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sketches/analysis.hpp"
#include "sketches/bench.hpp"
#include "sketches/config.hpp"
#include "sketches/csv.hpp"
#include "sketches/history.hpp"
#include "sketches/oracle.hpp"
#include "sketches/relaxation_checker.hpp"

namespace {

using sketches::csv_table;
using sketches::format_double;

// Config-file values fill in any option the command line left untouched.
void apply_config(CLI::App* cmd, const std::string& config_path) {
  if (config_path.empty()) return;
  const auto values = sketches::load_key_value_config(config_path);
  for (const auto& [key, value] : values) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

int run_bench(const sketches::bench_config& cfg) {
  const sketches::bench_report report = sketches::bench_run(cfg);
  std::cout << report.to_text();
  return 0;
}

int run_errors(const std::string& mode, uint64_t n, uint64_t k, uint64_t r, double phi,
               double eps, double delta, uint64_t trials, uint64_t seed,
               const std::string& out_path) {
  csv_table table;
  table.header = {"mode", "n", "k", "r", "phi", "eps", "trials",
                  "mean", "variance", "rse", "se"};
  const std::string ns = std::to_string(n);
  const std::string ks = std::to_string(k);
  const std::string rs = std::to_string(r);

  if (mode == "weak") {
    const sketches::theta_error_params p{n, k, r};
    const auto stats = sketches::weak_stats(p);
    table.rows.push_back({"weak", ns, ks, rs, "", "", "", format_double(stats.mean),
                          format_double(stats.variance), format_double(stats.rse), ""});
    table.rows.push_back({"weak-rse-bound", ns, ks, rs, "", "", "", "", "",
                          format_double(sketches::weak_rse_bound(k, r)), ""});
  } else if (mode == "strong") {
    const sketches::theta_error_params p{n, k, r};
    const auto res = sketches::strong_estimate_stats(p);
    table.rows.push_back({"strong", ns, ks, rs, "", "", "", format_double(res.stats.mean),
                          format_double(res.stats.variance), format_double(res.stats.rse),
                          format_double(res.rel_error)});
    if (!res.converged) {
      std::cerr << "strong-adversary quadrature did not converge: achieved relative error "
                << res.rel_error << ", normalization " << res.normalization << "\n";
      return 4;
    }
  } else if (mode == "simulate") {
    const sketches::theta_error_params p{n, k, r};
    for (const auto& [name, adv] :
         {std::pair{"sim-weak", sketches::adversary_mode::weak},
          std::pair{"sim-strong", sketches::adversary_mode::strong}}) {
      const auto sim = sketches::simulate_adversary(p, adv, trials, seed);
      table.rows.push_back({name, ns, ks, rs, "", "", std::to_string(sim.trials),
                            format_double(sim.stats.mean), format_double(sim.stats.variance),
                            format_double(sim.stats.rse), format_double(sim.mean_std_err)});
    }
  } else if (mode == "quantiles") {
    const sketches::quantiles_error_params q{phi, n, r, eps, delta};
    const auto range = sketches::quantiles_range(q);
    const auto split = sketches::quantiles_adversary_worst_split(phi, r);
    // For quantiles rows: mean holds the range center (or the bound / the
    // hidden-below count), rse holds the half width.
    table.rows.push_back({"quantiles-range", ns, "", rs, format_double(phi),
                          format_double(eps), "", format_double(range.center()), "",
                          format_double(range.half_width()), ""});
    table.rows.push_back({"quantiles-relaxation-bound", ns, "", rs, format_double(phi),
                          format_double(eps), "",
                          format_double(sketches::quantiles_relaxation_error_bound(eps, r)),
                          "", "", ""});
    table.rows.push_back({"quantiles-worst-split", ns, "", rs, format_double(phi),
                          format_double(eps), "", std::to_string(split.first),
                          std::to_string(split.second), "", ""});
  } else {
    std::cerr << "unknown errors mode: " << mode << "\n";
    return 2;
  }

  if (out_path.empty()) {
    for (size_t i = 0; i < table.header.size(); ++i) {
      std::cout << (i ? "," : "") << table.header[i];
    }
    std::cout << '\n';
    for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i];
      std::cout << '\n';
    }
  } else {
    sketches::report_emit(table, out_path);
  }
  return 0;
}

int run_check(const std::string& history_path, uint64_t r, uint64_t k, uint64_t seed,
              bool r_set, bool k_set, bool seed_set, const std::string& mode) {
  const sketches::history_log log = sketches::history_log::load(history_path);
  const auto& meta = log.meta();
  auto meta_u64 = [&](const char* key, uint64_t fallback, bool use_fallback) -> uint64_t {
    if (use_fallback) return fallback;
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw std::runtime_error(std::string("history meta lacks '") + key +
                               "'; pass it explicitly");
    }
    return std::stoull(it->second);
  };
  const uint64_t use_r = meta_u64("relaxation", r, r_set);
  const uint64_t use_k = meta_u64("k", k, k_set);
  const uint64_t use_seed = meta_u64("seed", seed, seed_set);
  const auto kind_it = meta.find("sketch");
  const std::string kind = kind_it == meta.end() ? "theta" : kind_it->second;

  sketches::check_verdict verdict;
  const sketches::oracle orc(use_seed);
  if (kind == "quantiles") {
    verdict = sketches::check_relaxation_quantiles(log, use_r, use_k, orc);
  } else {
    verdict = sketches::check_relaxation_theta(
        log, use_r, use_k, orc,
        mode == "brute" ? sketches::check_mode::brute_force : sketches::check_mode::fast);
  }

  switch (verdict.result) {
    case sketches::check_verdict::status::pass:
      std::cout << "pass: every query admits an r-relaxed sequential witness (r=" << use_r
                << ")\n";
      return 0;
    case sketches::check_verdict::status::fail:
      std::cout << "fail: " << verdict.detail << "\n";
      return 2;
    case sketches::check_verdict::status::inconclusive:
      std::cout << "inconclusive: " << verdict.detail << "\n";
      return 3;
  }
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"concurrent sketch benchmark, error analysis and history checking"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "update-only throughput run");
  std::string bench_config_path;
  std::string bench_sketch = "theta";
  sketches::bench_config bcfg;
  uint64_t bench_optimised = 1;
  bench->add_option("--config", bench_config_path, "key=value config file");
  bench->add_option("--sketch", bench_sketch, "theta|quantiles");
  bench->add_option("--threads", bcfg.engine.workers, "worker thread count");
  bench->add_option("--buffer", bcfg.engine.buffer, "local buffer capacity b");
  bench->add_option("--k", bcfg.k, "sketch parameter k");
  bench->add_option("--seed", bcfg.seed, "oracle seed");
  bench->add_option("--seconds", bcfg.seconds, "run duration");
  bench->add_option("--optimised", bench_optimised, "1 = double buffering (default)");
  bench->add_flag("--lock-baseline", bcfg.lock_baseline,
                  "mutex around a sequential sketch instead of the engine");
  bench->add_option("--distinct", bcfg.distinct_items, "distinct item pool size");

  // errors
  auto* errors = app.add_subcommand("errors", "error bounds and adversary simulation");
  std::string errors_config_path;
  std::string mode = "weak";
  uint64_t n = 32768, k = 1024, r = 8, trials = 10000, eseed = 1;
  double phi = 0.5, eps = 0.01, delta = 0.01;
  std::string out_path;
  errors->add_option("--config", errors_config_path, "key=value config file");
  errors->add_option("--mode", mode, "weak|strong|simulate|quantiles");
  errors->add_option("--n", n, "unique elements / stream size");
  errors->add_option("--k", k, "sketch parameter k");
  errors->add_option("--r", r, "relaxation");
  errors->add_option("--phi", phi, "quantile argument");
  errors->add_option("--eps", eps, "PAC rank error");
  errors->add_option("--delta", delta, "PAC failure probability");
  errors->add_option("--trials", trials, "Monte-Carlo trials");
  errors->add_option("--seed", eseed, "Monte-Carlo seed");
  errors->add_option("--out", out_path, "CSV output path (stdout when absent)");

  // check
  auto* check = app.add_subcommand("check", "r-relaxation check of a history file");
  std::string check_config_path;
  std::string history_path;
  std::string check_mode = "fast";
  uint64_t cr = 0, ck = 0, cseed = 0;
  check->add_option("--config", check_config_path, "key=value config file");
  check->add_option("--history", history_path, "history file to check")->required();
  auto* opt_r = check->add_option("--r", cr, "relaxation budget (default: history meta)");
  auto* opt_k = check->add_option("--k", ck, "sketch parameter k (default: history meta)");
  auto* opt_seed = check->add_option("--seed", cseed, "oracle seed (default: history meta)");
  check->add_option("--mode", check_mode, "fast|brute (theta only)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) {
      apply_config(bench, bench_config_path);
      bcfg.engine.optimised = bench_optimised != 0;
      if (bench_sketch == "quantiles") {
        bcfg.kind = sketches::sketch_kind::quantiles;
      } else if (bench_sketch != "theta") {
        std::cerr << "unknown sketch: " << bench_sketch << "\n";
        return 2;
      }
      return run_bench(bcfg);
    }
    if (errors->parsed()) {
      apply_config(errors, errors_config_path);
      return run_errors(mode, n, k, r, phi, eps, delta, trials, eseed, out_path);
    }
    if (check->parsed()) {
      apply_config(check, check_config_path);
      return run_check(history_path, cr, ck, cseed, opt_r->count() > 0,
                       opt_k->count() > 0, opt_seed->count() > 0, check_mode);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
