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

#include <cstdint>
#include <optional>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/safe_space.hpp"
#include "sdgaudit/theta.hpp"

namespace sdgaudit {

// A unit vector in the complement of the released span, carried both in cell
// coordinates (beta) and in perp-basis coordinates (coords). Entries of beta
// sum to zero, so moving along it keeps total mass fixed.
struct Direction {
  std::string safespace_fingerprint;
  Eigen::VectorXd beta;    // length total_cells
  Eigen::VectorXd coords;  // length dim_perp

  nlohmann::json to_json() const;
};

Direction random_direction(const SafeSpace& ss, std::uint64_t seed);
// Normalizes coords onto the unit sphere; errors on a zero vector.
Direction direction_from_coords(const SafeSpace& ss, Eigen::VectorXd coords);

// The two farthest valid distributions reachable from `start` along a
// direction without disturbing any released statistic. Both endpoints touch
// the simplex boundary: at least one cell is exactly zero.
struct ExtremalPair {
  ThetaVector start;
  ThetaVector theta_plus;
  ThetaVector theta_minus;
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  Direction direction;

  // Signed positions of the endpoints along the direction.
  double s_plus() const { return alpha_plus; }
  double s_minus() const { return -alpha_minus; }
  double span() const { return alpha_plus + alpha_minus; }

  nlohmann::json to_json() const;
};

ExtremalPair extremal_pair(const ThetaVector& start, const Direction& dir);

enum class StartMode { kMaxEntropy, kFromDataset };

std::string to_string(StartMode mode);

// A starting distribution whose safe statistics equal psi: either the
// maximum-entropy table fitted to the marginals implied by psi, or the
// empirical distribution of a provided dataset (which must match psi).
ThetaVector starting_theta(const SafeSpace& ss, const SafeStatistics& psi,
                           StartMode mode, const Dataset* d = nullptr);

}  // namespace sdgaudit
