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

#ifndef SKETCHES_ANALYSIS_HPP_
#define SKETCHES_ANALYSIS_HPP_

#include <cstdint>
#include <utility>

namespace sketches {

/**
 * Error model for an r-relaxed KMV sketch: n unique hashed elements, sample
 * capacity k, and an omission budget r. An adversary hides up to r updates
 * from a query, so the published threshold ends up being one of the order
 * statistics M_(k) .. M_(k+r) of the n uniform hashes.
 *
 * All estimator arithmetic follows est(theta) = (k - 1) / theta.
 */
struct theta_error_params {
  uint64_t n; // unique elements, n > k + r
  uint64_t k; // sample capacity, k >= 3
  uint64_t r; // relaxation

  void validate() const;
};

struct estimator_stats {
  double mean = 0.0;
  double variance = 0.0;
  double rse = 0.0; // sqrt(E[(e - n)^2]) / n
};

/// Expected estimate under the weak adversary, which always hides the r
/// smallest elements: n * (k-1) / (k+r-1).
double weak_expectation(const theta_error_params& p);

/// Exact variance of the weak-adversary estimate, from the order-statistics
/// moments of 1 / M_(k+r).
double weak_variance(const theta_error_params& p);

/// Exact mean / variance / RSE of the weak-adversary estimate.
estimator_stats weak_stats(const theta_error_params& p);

/// Closed-form bound sqrt(1/(k-2)) + r/(k-2) on the weak-adversary RSE.
/// Requires k >= 3.
double weak_rse_bound(uint64_t k, uint64_t r);

/// Joint density of the order statistics (M_(k), M_(k+r)) of n uniform
/// draws, evaluated in log space so it is finite at n = 2^15 and beyond.
/// Zero outside 0 <= m_k <= m_kr <= 1. Requires r >= 1.
double joint_pdf(double m_k, double m_kr, const theta_error_params& p);

struct strong_stats_result {
  estimator_stats stats;
  double normalization = 0.0; // integral of the density over the region
  double rel_error = 0.0;     // achieved relative quadrature error
  bool converged = false;
  uint64_t evaluations = 0;
};

/**
 * Mean, variance and RSE of the strong-adversary estimate by adaptive 2-D
 * quadrature of the joint order-statistics density. The strong adversary
 * sees the hashes and picks theta in {M_(k), M_(k+r)}, whichever drives
 * est = (k-1)/theta farther from n; the integration region is split along
 * the curve where the two choices err equally, where the integrand kinks.
 *
 * rel_tol is the target relative error (the acceptance setting is 1e-4).
 * Non-convergence is reported through rel_error / converged, never guessed
 * away.
 */
strong_stats_result strong_estimate_stats(const theta_error_params& p, double rel_tol = 1e-4);

enum class adversary_mode { weak, strong };

struct simulated_stats {
  estimator_stats stats;
  double mean_std_err = 0.0; // sqrt(sample variance / trials)
  uint64_t trials = 0;
};

/**
 * Monte-Carlo adversary: per trial draws n uniform hashes, then the weak
 * mode takes theta = M_(k+r) while the strong mode picks the worse of
 * M_(k) and M_(k+r) after seeing the draws. Deterministic in (seed, trials):
 * trials are split into fixed-size partitions with per-partition seeds and
 * the partial moments are combined in partition order, so results do not
 * depend on thread scheduling. threads = 0 uses the hardware count.
 */
simulated_stats simulate_adversary(const theta_error_params& p, adversary_mode mode,
                                   uint64_t trials, uint64_t seed, uint32_t threads = 0);

/// PAC quantiles under an r-relaxation.
struct quantiles_error_params {
  double phi;   // requested quantile, in [0, 1]
  uint64_t n;   // stream size
  uint64_t r;   // relaxation
  double eps;   // PAC rank error, in (0, 0.5)
  double delta; // PAC failure probability, in (0, 1)

  void validate() const;
};

struct rank_interval {
  double lo;
  double hi;
  double center() const noexcept { return (lo + hi) / 2.0; }
  double half_width() const noexcept { return (hi - lo) / 2.0; }
};

/// Rank range of the value returned under the weak adversary, holding with
/// probability 1 - delta: centered at phi*n + (1-phi)*r for phi <= 0.5 and
/// at phi*n - phi*r above, half-width eps*(n - r) either way.
rank_interval quantiles_range(const quantiles_error_params& q);

/// Bound (1 - eps) * r on the rank shift the weak adversary can cause,
/// valid for every phi. Requires eps in (0, 1).
double quantiles_relaxation_error_bound(double eps, uint64_t r);

/// The hidden-below / hidden-above counts (i, j) that maximise the rank
/// shift |(1-phi) i - phi j| under i + j <= r: (r, 0) for phi <= 0.5,
/// (0, r) otherwise.
std::pair<uint64_t, uint64_t> quantiles_adversary_worst_split(double phi, uint64_t r);

} // namespace sketches

#endif // SKETCHES_ANALYSIS_HPP_
