/*
 * Copyright 2026 The SDG Audit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sdgaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sdgaudit/error.hpp"

namespace sdgaudit {

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double rss = 0.0;
  for (double x : xs) rss += (x - m) * (x - m);
  return rss / static_cast<double>(xs.size() - 1);
}

namespace {

// Lentz's continued fraction for the incomplete beta function.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIters = 500;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIters; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error("invalid-argument", "incomplete beta needs a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (dof <= 0.0) throw Error("invalid-argument", "degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  const double p = regularized_incomplete_beta(dof / 2.0, 0.5, x);
  return std::clamp(p, 0.0, 1.0);
}

WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) {
    throw Error("invalid-argument", "need at least two observations per sample");
  }
  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());
  const double m1 = mean(xs);
  const double m2 = mean(ys);
  const double v1 = sample_variance(xs);
  const double v2 = sample_variance(ys);

  if (v1 == 0.0 && v2 == 0.0) {
    WelchResult r;
    r.degenerate = true;
    if (m1 == m2) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = m1 > m2 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }

  const double r1 = v1 / n1;
  const double r2 = v2 / n2;
  const double se = std::sqrt(r1 + r2);
  double dof_denom = 0.0;
  if (n1 > 1.0) dof_denom += r1 * r1 / (n1 - 1.0);
  if (n2 > 1.0) dof_denom += r2 * r2 / (n2 - 1.0);
  const double dof = (r1 + r2) * (r1 + r2) / dof_denom;

  WelchResult r;
  r.t = (m1 - m2) / se;
  r.dof = dof;
  r.p = student_t_two_sided_p(r.t, dof);
  return r;
}

double ks_distance_uniform(std::span<const double> xs) {
  if (xs.empty()) throw Error("invalid-argument", "empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double x = std::clamp(sorted[i], 0.0, 1.0);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - x));
    d = std::max(d, std::abs(x - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace sdgaudit
