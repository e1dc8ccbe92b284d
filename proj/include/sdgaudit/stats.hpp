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
#pragma once

#include <span>

namespace sdgaudit {

double mean(std::span<const double> xs);
// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> xs);

// Continued-fraction regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of a Student t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double dof = 0.0;
  // Set when both samples have zero variance and the formula degenerates.
  bool degenerate = false;
};

// Welch's unequal-variance two-sample t-test with Welch-Satterthwaite
// degrees of freedom; requires at least two observations per side.
WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys);

// Kolmogorov-Smirnov distance between a sample and the uniform law on [0,1].
double ks_distance_uniform(std::span<const double> xs);

}  // namespace sdgaudit
