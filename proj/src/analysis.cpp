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

#include "sketches/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sketches/oracle.hpp"
#include "quadrature.hpp"

namespace sketches {

namespace {

double est_of(double theta, uint64_t k) {
  return (static_cast<double>(k) - 1.0) / theta;
}

// Strong-adversary choice: the threshold whose estimate errs farther from n.
// Ties go to the larger threshold (the smaller estimate).
double strong_estimate(double m_k, double m_kr, uint64_t k, uint64_t n) {
  const double e_k = est_of(m_k, k);
  const double e_kr = est_of(m_kr, k);
  const double dn = static_cast<double>(n);
  return std::abs(e_k - dn) > std::abs(e_kr - dn) ? e_k : e_kr;
}

struct beta_moments {
  double mean;
  double sd;
};

beta_moments beta_stats(double alpha, double beta) {
  const double mean = alpha / (alpha + beta);
  const double var =
      alpha * beta / ((alpha + beta) * (alpha + beta) * (alpha + beta + 1.0));
  return {mean, std::sqrt(var)};
}

// Welford-style accumulator that can merge partitions in a fixed order.
struct moment_acc {
  uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double sq_err = 0.0; // sum of (e - n)^2

  void add(double e, double n) {
    ++count;
    const double delta = e - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (e - mean);
    const double d = e - n;
    sq_err += d * d;
  }

  void merge(const moment_acc& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double delta = o.mean - mean;
    const uint64_t total = count + o.count;
    mean += delta * static_cast<double>(o.count) / static_cast<double>(total);
    m2 += o.m2 + delta * delta * static_cast<double>(count) *
                     static_cast<double>(o.count) / static_cast<double>(total);
    sq_err += o.sq_err;
    count = total;
  }
};

double uniform_from_bits(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

void theta_error_params::validate() const {
  if (k < 3) throw std::invalid_argument("theta error model requires k >= 3");
  if (n <= k + r) throw std::invalid_argument("theta error model requires n > k + r");
}

double weak_expectation(const theta_error_params& p) {
  p.validate();
  return static_cast<double>(p.n) * (static_cast<double>(p.k) - 1.0) /
         (static_cast<double>(p.k + p.r) - 1.0);
}

double weak_variance(const theta_error_params& p) {
  p.validate();
  const double n = static_cast<double>(p.n);
  const double km1 = static_cast<double>(p.k) - 1.0;
  const double kr = static_cast<double>(p.k + p.r);
  const double second = km1 * km1 * n * (n - 1.0) / ((kr - 2.0) * (kr - 1.0));
  const double mean = n * km1 / (kr - 1.0);
  return second - mean * mean;
}

estimator_stats weak_stats(const theta_error_params& p) {
  const double mean = weak_expectation(p);
  const double var = weak_variance(p);
  const double n = static_cast<double>(p.n);
  const double bias = mean - n;
  return {mean, var, std::sqrt(var + bias * bias) / n};
}

double weak_rse_bound(uint64_t k, uint64_t r) {
  if (k < 3) throw std::invalid_argument("weak RSE bound requires k >= 3");
  const double km2 = static_cast<double>(k) - 2.0;
  return std::sqrt(1.0 / km2) + static_cast<double>(r) / km2;
}

double joint_pdf(double m_k, double m_kr, const theta_error_params& p) {
  p.validate();
  if (p.r < 1) throw std::invalid_argument("joint density requires r >= 1");
  if (!(m_k >= 0.0) || !(m_kr >= m_k) || !(m_kr <= 1.0)) return 0.0;
  const double n = static_cast<double>(p.n);
  const double k = static_cast<double>(p.k);
  const double r = static_cast<double>(p.r);
  double log_pdf = std::lgamma(n + 1.0) - std::lgamma(k) - std::lgamma(r) -
                   std::lgamma(n - k - r + 1.0);
  // Skip zero-exponent terms so boundary points do not produce 0 * log(0).
  if (p.k > 1) {
    if (m_k == 0.0) return 0.0;
    log_pdf += (k - 1.0) * std::log(m_k);
  }
  if (p.r > 1) {
    if (m_kr == m_k) return 0.0;
    log_pdf += (r - 1.0) * std::log(m_kr - m_k);
  }
  if (p.n > p.k + p.r) {
    if (m_kr == 1.0) return 0.0;
    log_pdf += (n - k - r) * std::log1p(-m_kr);
  }
  return std::exp(log_pdf);
}

namespace {

// Integration box covering all but a negligible tail of the joint density,
// in (m_k, gap) coordinates: m_k ~ Beta(k, n-k+1), gap ~ Beta(r, n-r+1).
struct strong_integrand_ctx {
  theta_error_params p;
  double log_const;
  double u_lo, u_hi;
  double v_lo, v_hi;
};

strong_integrand_ctx make_ctx(const theta_error_params& p) {
  const double n = static_cast<double>(p.n);
  const double k = static_cast<double>(p.k);
  const double r = static_cast<double>(p.r);
  strong_integrand_ctx ctx;
  ctx.p = p;
  ctx.log_const = std::lgamma(n + 1.0) - std::lgamma(k) -
                  (p.r >= 1 ? std::lgamma(r) : 0.0) -
                  std::lgamma(n - k - r + 1.0);
  const auto mk = beta_stats(k, n - k + 1.0);
  ctx.u_lo = std::max(0.0, mk.mean - 16.0 * mk.sd);
  ctx.u_hi = std::min(1.0, mk.mean + 16.0 * mk.sd);
  if (p.r >= 1) {
    const auto gap = beta_stats(r, n - r + 1.0);
    ctx.v_lo = std::max(0.0, gap.mean - 16.0 * gap.sd);
    ctx.v_hi = std::min(1.0, gap.mean + 16.0 * gap.sd);
  } else {
    ctx.v_lo = ctx.v_hi = 0.0;
  }
  return ctx;
}

double log_density_uv(const strong_integrand_ctx& ctx, double u, double v) {
  const double n = static_cast<double>(ctx.p.n);
  const double k = static_cast<double>(ctx.p.k);
  const double r = static_cast<double>(ctx.p.r);
  double lp = ctx.log_const;
  if (ctx.p.k > 1) lp += (k - 1.0) * std::log(u);
  if (ctx.p.r > 1) lp += (r - 1.0) * std::log(v);
  if (ctx.p.n > ctx.p.k + ctx.p.r) lp += (n - k - r) * std::log1p(-(u + v));
  return lp;
}

// For fixed u = m_k, the v below which the adversary's pick is est(k)
// (a constant in v) and above which it is est(k+r). No switch in range
// means the pick never changes along v.
double switch_point(const theta_error_params& p, double u) {
  const double km1 = static_cast<double>(p.k) - 1.0;
  const double n = static_cast<double>(p.n);
  const double denom = 2.0 * n * u - km1;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  if (u >= km1 / n) return 0.0;
  return 2.0 * u * (km1 - n * u) / denom;
}

// moment: 0 -> density, 1 -> e * density, 2 -> e^2 * density.
template <int Moment>
detail::quad_result strong_outer_integral(const strong_integrand_ctx& ctx, double rel_tol) {
  const theta_error_params p = ctx.p;
  const double km1 = static_cast<double>(p.k) - 1.0;
  const double n = static_cast<double>(p.n);

  uint64_t evals = 0;
  auto outer = [&](double u) -> double {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double v_hi = std::min(ctx.v_hi, 1.0 - u);
    if (!(ctx.v_lo < v_hi)) return 0.0;
    auto inner = [&](double v) -> double {
      if (v <= 0.0 && p.r > 1) return 0.0;
      const double lp = log_density_uv(ctx, u, v);
      if (lp < -745.0) return 0.0; // below exp() underflow
      double w = 1.0;
      if constexpr (Moment > 0) {
        const double e = strong_estimate(u, u + v, p.k, p.n);
        w = (Moment == 1) ? e : e * e;
      }
      return w * std::exp(lp);
    };
    std::vector<double> pts{ctx.v_lo, v_hi};
    const double vs = switch_point(p, u);
    if (vs > ctx.v_lo && vs < v_hi) pts.insert(pts.begin() + 1, vs);
    const auto res = detail::integrate_adaptive(inner, pts, rel_tol * 0.1, 0.0, 4000);
    evals += res.evaluations;
    return res.value;
  };

  std::vector<double> pts{ctx.u_lo};
  for (double b : {km1 / (2.0 * n), km1 / n}) {
    if (b > ctx.u_lo && b < ctx.u_hi) pts.push_back(b);
  }
  pts.push_back(ctx.u_hi);
  std::sort(pts.begin(), pts.end());
  auto res = detail::integrate_adaptive(outer, pts, rel_tol, 0.0, 2000);
  res.evaluations = evals;
  return res;
}

// r = 0 degenerates to the sequential estimator: a 1-D integral against the
// density of M_(k) alone.
template <int Moment>
detail::quad_result sequential_integral(const theta_error_params& p, double rel_tol) {
  const double n = static_cast<double>(p.n);
  const double k = static_cast<double>(p.k);
  const double log_const =
      std::lgamma(n + 1.0) - std::lgamma(k) - std::lgamma(n - k + 1.0);
  auto f = [&](double m) -> double {
    if (m <= 0.0 || m >= 1.0) return 0.0;
    const double lp = log_const + (k - 1.0) * std::log(m) + (n - k) * std::log1p(-m);
    if (lp < -745.0) return 0.0;
    double w = 1.0;
    if constexpr (Moment > 0) {
      const double e = est_of(m, p.k);
      w = (Moment == 1) ? e : e * e;
    }
    return w * std::exp(lp);
  };
  const auto mk = beta_stats(k, n - k + 1.0);
  const std::vector<double> pts{std::max(0.0, mk.mean - 16.0 * mk.sd),
                                std::min(1.0, mk.mean + 16.0 * mk.sd)};
  return detail::integrate_adaptive(f, pts, rel_tol * 0.1, 0.0, 4000);
}

} // namespace

strong_stats_result strong_estimate_stats(const theta_error_params& p, double rel_tol) {
  p.validate();
  detail::quad_result i0, i1, i2;
  if (p.r == 0) {
    i0 = sequential_integral<0>(p, rel_tol);
    i1 = sequential_integral<1>(p, rel_tol);
    i2 = sequential_integral<2>(p, rel_tol);
  } else {
    const strong_integrand_ctx ctx = make_ctx(p);
    i0 = strong_outer_integral<0>(ctx, rel_tol);
    i1 = strong_outer_integral<1>(ctx, rel_tol);
    i2 = strong_outer_integral<2>(ctx, rel_tol);
  }

  strong_stats_result out;
  out.normalization = i0.value;
  out.evaluations = i0.evaluations + i1.evaluations + i2.evaluations;
  const double n = static_cast<double>(p.n);
  const double mean = i1.value / i0.value;
  const double second = i2.value / i0.value;
  out.stats.mean = mean;
  out.stats.variance = second - mean * mean;
  out.stats.rse = std::sqrt(std::max(0.0, second - 2.0 * n * mean + n * n)) / n;
  const double rel0 = i0.abs_error / std::max(std::abs(i0.value), 1e-300);
  const double rel1 = i1.abs_error / std::max(std::abs(i1.value), 1e-300);
  const double rel2 = i2.abs_error / std::max(std::abs(i2.value), 1e-300);
  out.rel_error = std::max({rel0, rel1, rel2});
  out.converged = out.rel_error <= rel_tol &&
                  std::abs(out.normalization - 1.0) <= 100.0 * rel_tol;
  return out;
}

simulated_stats simulate_adversary(const theta_error_params& p, adversary_mode mode,
                                   uint64_t trials, uint64_t seed, uint32_t threads) {
  p.validate();
  if (trials < 1) throw std::invalid_argument("at least one trial required");

  constexpr uint64_t kPartitionTrials = 256;
  const uint64_t partitions = (trials + kPartitionTrials - 1) / kPartitionTrials;
  std::vector<moment_acc> partial(partitions);

  auto run_partition = [&](uint64_t part) {
    const uint64_t first = part * kPartitionTrials;
    const uint64_t last = std::min(trials, first + kPartitionTrials);
    const uint64_t part_key = detail::fmix64(seed ^ detail::fmix64(part + 0x9e3779b97f4a7c15ULL));
    std::vector<double> draws(p.n);
    moment_acc acc;
    for (uint64_t t = first; t < last; ++t) {
      const uint64_t trial_key = detail::fmix64(part_key + t * 0xbf58476d1ce4e5b9ULL);
      for (uint64_t i = 0; i < p.n; ++i) {
        draws[i] = uniform_from_bits(detail::splitmix64_at(trial_key, i));
      }
      const auto kth = draws.begin() + static_cast<ptrdiff_t>(p.k + p.r - 1);
      std::nth_element(draws.begin(), kth, draws.end());
      const double m_kr = *kth;
      double e;
      if (mode == adversary_mode::weak) {
        e = est_of(m_kr, p.k);
      } else {
        const auto kth_low = draws.begin() + static_cast<ptrdiff_t>(p.k - 1);
        std::nth_element(draws.begin(), kth_low, kth);
        e = strong_estimate(*kth_low, m_kr, p.k, p.n);
      }
      acc.add(e, static_cast<double>(p.n));
    }
    partial[part] = acc;
  };

  uint32_t worker_count = threads == 0 ? std::thread::hardware_concurrency() : threads;
  worker_count = std::max(1u, std::min<uint32_t>(worker_count, static_cast<uint32_t>(partitions)));
  if (worker_count == 1) {
    for (uint64_t part = 0; part < partitions; ++part) run_partition(part);
  } else {
    std::vector<std::thread> pool;
    std::atomic<uint64_t> next{0};
    for (uint32_t t = 0; t < worker_count; ++t) {
      pool.emplace_back([&] {
        for (uint64_t part; (part = next.fetch_add(1)) < partitions;) {
          run_partition(part);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  moment_acc acc;
  for (const auto& part : partial) acc.merge(part);

  simulated_stats out;
  out.trials = acc.count;
  out.stats.mean = acc.mean;
  out.stats.variance = acc.count > 1 ? acc.m2 / static_cast<double>(acc.count - 1) : 0.0;
  out.stats.rse = std::sqrt(acc.sq_err / static_cast<double>(acc.count)) /
                  static_cast<double>(p.n);
  out.mean_std_err = std::sqrt(out.stats.variance / static_cast<double>(acc.count));
  return out;
}

void quantiles_error_params::validate() const {
  if (!(phi >= 0.0 && phi <= 1.0)) throw std::invalid_argument("phi must be in [0, 1]");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must be in (0, 0.5)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (r >= n) throw std::invalid_argument("relaxation must be below the stream size");
}

rank_interval quantiles_range(const quantiles_error_params& q) {
  q.validate();
  const double n = static_cast<double>(q.n);
  const double r = static_cast<double>(q.r);
  const double center =
      q.phi <= 0.5 ? q.phi * n + (1.0 - q.phi) * r : q.phi * n - q.phi * r;
  const double half = q.eps * (n - r);
  return {center - half, center + half};
}

double quantiles_relaxation_error_bound(double eps, uint64_t r) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0, 1)");
  return (1.0 - eps) * static_cast<double>(r);
}

std::pair<uint64_t, uint64_t> quantiles_adversary_worst_split(double phi, uint64_t r) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw std::invalid_argument("phi must be in [0, 1]");
  return phi <= 0.5 ? std::pair<uint64_t, uint64_t>{r, 0}
                    : std::pair<uint64_t, uint64_t>{0, r};
}

} // namespace sketches
