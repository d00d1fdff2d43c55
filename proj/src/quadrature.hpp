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

#ifndef SKETCHES_SRC_QUADRATURE_HPP_
#define SKETCHES_SRC_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace sketches::detail {

struct quad_result {
  double value = 0.0;
  double abs_error = 0.0;
  uint64_t evaluations = 0;
};

// Gauss-Kronrod 7-15 pair on [-1, 1].
struct gk15 {
  static constexpr double xgk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898, 0.0};
  static constexpr double wgk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  static constexpr double wg[4] = {
      0.129484966168870, 0.279705391489277, 0.381830050505119,
      0.417959183673469};
};

template <typename F>
void gk15_apply(const F& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * gk15::xgk[i]);
    fv[14 - i] = f(c + h * gk15::xgk[i]);
  }
  fv[7] = f(c);
  double resk = gk15::wgk[7] * fv[7];
  double resg = gk15::wg[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    resk += gk15::wgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) resg += gk15::wg[i / 2] * (fv[i] + fv[14 - i]);
  }
  kronrod = resk * h;
  err = std::abs((resk - resg) * h);
}

/**
 * Adaptive Gauss-Kronrod integration over a sequence of segments given by
 * consecutive breakpoints. The worst segment is bisected until the summed
 * error estimate drops below max(abs_tol, rel_tol * |integral|) or the
 * subdivision budget runs out.
 */
template <typename F>
quad_result integrate_adaptive(const F& f, const std::vector<double>& breakpoints,
                               double rel_tol, double abs_tol = 0.0,
                               uint64_t max_intervals = 20000) {
  struct interval {
    double a, b, value, error;
    bool operator<(const interval& o) const { return error < o.error; }
  };
  std::priority_queue<interval> queue;
  quad_result total;
  double sum = 0.0;
  double err = 0.0;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;
    interval iv{breakpoints[i], breakpoints[i + 1], 0.0, 0.0};
    gk15_apply(f, iv.a, iv.b, iv.value, iv.error);
    total.evaluations += 15;
    sum += iv.value;
    err += iv.error;
    queue.push(iv);
  }
  uint64_t splits = 0;
  while (!queue.empty() && splits < max_intervals) {
    const double target = std::max(abs_tol, rel_tol * std::abs(sum));
    if (err <= target) break;
    interval worst = queue.top();
    queue.pop();
    sum -= worst.value;
    err -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    for (const auto& [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
      interval half{lo, hi, 0.0, 0.0};
      gk15_apply(f, half.a, half.b, half.value, half.error);
      total.evaluations += 15;
      sum += half.value;
      err += half.error;
      queue.push(half);
    }
    ++splits;
  }
  total.value = sum;
  total.abs_error = err;
  return total;
}

} // namespace sketches::detail

#endif // SKETCHES_SRC_QUADRATURE_HPP_
