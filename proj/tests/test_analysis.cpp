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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sketches/analysis.hpp"

using sketches::adversary_mode;
using sketches::quantiles_error_params;
using sketches::theta_error_params;

#include "panel_integrator.hpp"

using testutil::beta_pdf;
using testutil::panel_integrate;

TEST_CASE("parameter validation") {
  const theta_error_params small_k{10, 2, 0};
  const theta_error_params n_too_small{10, 8, 2};
  const theta_error_params ok{50, 5, 2};
  CHECK_THROWS_AS(small_k.validate(), std::invalid_argument);
  CHECK_THROWS_AS(n_too_small.validate(), std::invalid_argument);
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS(sketches::weak_rse_bound(2, 0), std::invalid_argument);
}

TEST_CASE("weak expectation: closed form") {
  CHECK(sketches::weak_expectation({1000, 64, 0}) == 1000.0);
  const double e = sketches::weak_expectation({32768, 1024, 8});
  CHECK(e == doctest::Approx(32513.738118).epsilon(1e-9));
  // Strictly decreasing in r.
  double last = sketches::weak_expectation({32768, 1024, 0});
  for (uint64_t r = 1; r <= 64; ++r) {
    const double cur = sketches::weak_expectation({32768, 1024, r});
    CHECK(cur < last);
    last = cur;
  }
  // Always below n for r >= 1.
  CHECK(sketches::weak_expectation({32768, 1024, 1}) < 32768.0);
}

TEST_CASE("weak RSE bound: closed form and algebraic identity") {
  CHECK(sketches::weak_rse_bound(1024, 0) == doctest::Approx(0.0312805).epsilon(1e-4));
  CHECK(sketches::weak_rse_bound(1024, 8) == doctest::Approx(0.0391083).epsilon(1e-4));
  // r = sqrt(k-2) makes the bound exactly 2/sqrt(k-2).
  const uint64_t k = 402; // k-2 = 400, sqrt = 20
  CHECK(sketches::weak_rse_bound(k, 20) == doctest::Approx(2.0 / 20.0).epsilon(1e-12));
}

TEST_CASE("joint pdf is zero outside the ordered support") {
  const theta_error_params p{50, 5, 2};
  CHECK(sketches::joint_pdf(0.3, 0.2, p) == 0.0);
  CHECK(sketches::joint_pdf(-0.1, 0.2, p) == 0.0);
  CHECK(sketches::joint_pdf(0.3, 1.2, p) == 0.0);
  CHECK(sketches::joint_pdf(0.1, 0.2, p) > 0.0);
}

TEST_CASE("joint pdf integrates to one over the simplex") {
  const theta_error_params p{50, 5, 2};
  auto outer = [&](double m_kr) {
    return panel_integrate(
        [&](double m_k) { return sketches::joint_pdf(m_k, m_kr, p); }, 0.0, m_kr, 8);
  };
  const double total = panel_integrate(outer, 0.0, 1.0, 16);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("joint pdf marginalizes to the Beta density of the higher statistic") {
  const theta_error_params p{50, 5, 2};
  // Marginal of M_(k+r) is Beta(k+r, n-k-r+1) = Beta(7, 44).
  for (double m_kr : {0.05, 0.1, 0.15, 0.2, 0.3}) {
    const double marginal = panel_integrate(
        [&](double m_k) { return sketches::joint_pdf(m_k, m_kr, p); }, 0.0, m_kr, 12);
    CHECK(marginal == doctest::Approx(beta_pdf(m_kr, 7, 44)).epsilon(1e-8));
  }
}

TEST_CASE("strong stats at r = 0 reduce to the unbiased sequential sketch") {
  const auto res = sketches::strong_estimate_stats({4096, 64, 0}, 1e-5);
  CHECK(res.converged);
  CHECK(res.normalization == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.stats.mean == doctest::Approx(4096.0).epsilon(1e-3));
}

TEST_CASE("strong stats agree with the Monte-Carlo adversary") {
  const theta_error_params p{4096, 64, 4};
  const auto quad = sketches::strong_estimate_stats(p, 1e-5);
  CHECK(quad.converged);
  const auto sim = sketches::simulate_adversary(p, adversary_mode::strong, 20000, 99);
  CHECK(std::abs(quad.stats.mean - sim.stats.mean) <= 3.0 * sim.mean_std_err);
  CHECK(quad.stats.rse == doctest::Approx(sim.stats.rse).epsilon(0.05));
}

TEST_CASE("simulated weak adversary matches the closed form") {
  const theta_error_params p{4096, 64, 4};
  const auto sim = sketches::simulate_adversary(p, adversary_mode::weak, 10000, 7);
  CHECK(std::abs(sim.stats.mean - sketches::weak_expectation(p)) <= 3.0 * sim.mean_std_err);
  CHECK(sim.stats.rse < sketches::weak_rse_bound(p.k, p.r));
}

TEST_CASE("strong adversary never errs less than the weak one on the same draws") {
  const theta_error_params p{2048, 32, 4};
  const auto weak = sketches::simulate_adversary(p, adversary_mode::weak, 4000, 31);
  const auto strong = sketches::simulate_adversary(p, adversary_mode::strong, 4000, 31);
  CHECK(strong.stats.rse >= weak.stats.rse);
}

TEST_CASE("r = 0 makes both adversary modes identical") {
  const theta_error_params p{2048, 32, 0};
  const auto weak = sketches::simulate_adversary(p, adversary_mode::weak, 2000, 5);
  const auto strong = sketches::simulate_adversary(p, adversary_mode::strong, 2000, 5);
  CHECK(weak.stats.mean == strong.stats.mean);
  CHECK(weak.stats.rse == strong.stats.rse);
}

TEST_CASE("simulation is deterministic and thread-count independent") {
  const theta_error_params p{1024, 16, 2};
  const auto a = sketches::simulate_adversary(p, adversary_mode::strong, 3000, 17, 1);
  const auto b = sketches::simulate_adversary(p, adversary_mode::strong, 3000, 17, 2);
  CHECK(a.stats.mean == b.stats.mean);
  CHECK(a.stats.variance == b.stats.variance);
  CHECK(a.stats.rse == b.stats.rse);
}

TEST_CASE("simulated RSE satisfies the variance-plus-bias decomposition") {
  for (auto mode : {adversary_mode::weak, adversary_mode::strong}) {
    const theta_error_params p{2048, 32, 6};
    const auto sim = sketches::simulate_adversary(p, mode, 5000, 23);
    const double n = static_cast<double>(p.n);
    const double bound = std::sqrt(sim.stats.variance) / n +
                         std::abs(sim.stats.mean - n) / n;
    CHECK(sim.stats.rse <= bound + 1e-9);
  }
}

TEST_CASE("quantiles range: hand-evaluated example and the r = 0 PAC range") {
  const quantiles_error_params q{0.25, 1000, 8, 0.01, 0.01};
  const auto range = sketches::quantiles_range(q);
  CHECK(range.center() == doctest::Approx(256.0).epsilon(1e-12));
  CHECK(range.half_width() == doctest::Approx(9.92).epsilon(1e-12));
  CHECK(range.lo == doctest::Approx(246.08).epsilon(1e-9));
  CHECK(range.hi == doctest::Approx(265.92).epsilon(1e-9));

  const auto seq = sketches::quantiles_range({0.25, 1000, 0, 0.01, 0.01});
  CHECK(seq.center() == doctest::Approx(250.0));
  CHECK(seq.half_width() == doctest::Approx(10.0));
}

TEST_CASE("quantiles range: both branch centers deviate equally at phi = 0.5") {
  const uint64_t n = 1000, r = 8;
  const auto below = sketches::quantiles_range({0.5, n, r, 0.01, 0.01});
  // phi = 0.5 takes the lower branch: center 0.5n + 0.5r.
  CHECK(below.center() == doctest::Approx(0.5 * n + 0.5 * r));
  // The upper branch center would be 0.5n - 0.5r: same distance from phi*n.
  const double upper_center = 0.5 * n - 0.5 * r;
  CHECK(std::abs(below.center() - 0.5 * n) ==
        doctest::Approx(std::abs(upper_center - 0.5 * n)));
}

TEST_CASE("relaxation error bound") {
  CHECK(sketches::quantiles_relaxation_error_bound(0.01, 0) == 0.0);
  CHECK(sketches::quantiles_relaxation_error_bound(0.01, 128) ==
        doctest::Approx(126.72).epsilon(1e-12));
  // Dominates both branch-specific bounds for every phi.
  for (double phi = 0.0; phi <= 1.0; phi += 0.05) {
    const double eps = 0.01;
    const uint64_t r = 16;
    const double bound = sketches::quantiles_relaxation_error_bound(eps, r);
    const double below = ((1.0 - phi) - eps) * r;
    const double above = (phi - eps) * r;
    CHECK(bound >= below - 1e-12);
    CHECK(bound >= above - 1e-12);
  }
}

TEST_CASE("worst split: branch rule and brute force agreement") {
  CHECK(sketches::quantiles_adversary_worst_split(0.3, 5) ==
        std::pair<uint64_t, uint64_t>{5, 0});
  CHECK(sketches::quantiles_adversary_worst_split(0.9, 5) ==
        std::pair<uint64_t, uint64_t>{0, 5});
  for (uint64_t r = 0; r <= 20; ++r) {
    for (double phi : {0.0, 0.1, 0.3, 0.5, 0.500001, 0.7, 0.9, 1.0}) {
      const auto [i, j] = sketches::quantiles_adversary_worst_split(phi, r);
      const double claimed = std::abs((1.0 - phi) * static_cast<double>(i) -
                                      phi * static_cast<double>(j));
      double best = 0.0;
      for (uint64_t bi = 0; bi <= r; ++bi) {
        for (uint64_t bj = 0; bi + bj <= r; ++bj) {
          best = std::max(best, std::abs((1.0 - phi) * static_cast<double>(bi) -
                                         phi * static_cast<double>(bj)));
        }
      }
      CHECK(claimed == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("quantiles parameter validation") {
  const quantiles_error_params bad_phi{1.5, 100, 1, 0.01, 0.01};
  const quantiles_error_params bad_eps{0.5, 100, 1, 0.6, 0.01};
  CHECK_THROWS_AS(sketches::quantiles_range(bad_phi), std::invalid_argument);
  CHECK_THROWS_AS(sketches::quantiles_range(bad_eps), std::invalid_argument);
  CHECK_THROWS_AS(sketches::quantiles_relaxation_error_bound(1.5, 1),
                  std::invalid_argument);
}
