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
#include "sdgaudit/extremal.hpp"

#include <cmath>
#include <limits>

#include "sdgaudit/error.hpp"
#include "sdgaudit/generator.hpp"
#include "sdgaudit/rng.hpp"

namespace sdgaudit {

namespace {

// Components smaller than this are treated as exact zeros of the direction.
constexpr double kBetaZeroTol = 1e-14;

ThetaVector move_along(const ThetaVector& start, const Eigen::VectorXd& beta,
                       double alpha, Eigen::Index blocking_cell) {
  std::vector<double> values(start.values());
  for (std::uint64_t c = 0; c < start.size(); ++c) {
    values[c] += alpha * beta(static_cast<Eigen::Index>(c));
    if (values[c] < 0.0 && values[c] >= ThetaVector::kNegativeClamp) values[c] = 0.0;
  }
  values[static_cast<std::uint64_t>(blocking_cell)] = 0.0;
  return ThetaVector(start.schema(), std::move(values));
}

}  // namespace

nlohmann::json Direction::to_json() const {
  return {{"safespace_fingerprint", safespace_fingerprint},
          {"coords", std::vector<double>(coords.data(), coords.data() + coords.size())}};
}

Direction direction_from_coords(const SafeSpace& ss, Eigen::VectorXd coords) {
  if (coords.size() != ss.dim_perp()) {
    throw Error("invalid-argument", "coordinate vector does not match dim_perp");
  }
  const double norm = coords.norm();
  if (norm == 0.0) {
    throw Error("no-variation-signal", "cannot normalize a zero direction");
  }
  coords /= norm;
  Eigen::VectorXd beta = ss.perp_basis() * coords;
  // perp columns are orthonormal, so beta is already unit length up to
  // rounding; tighten it anyway.
  beta /= beta.norm();
  return Direction{ss.fingerprint(), std::move(beta), std::move(coords)};
}

Direction random_direction(const SafeSpace& ss, std::uint64_t seed) {
  if (ss.dim_perp() == 0) {
    throw Error("phi-is-everything",
                "the released span covers the whole statistic space");
  }
  Rng rng(seed);
  Eigen::VectorXd coords(ss.dim_perp());
  for (Eigen::Index i = 0; i < coords.size(); ++i) coords(i) = rng.normal();
  if (coords.norm() == 0.0) coords(0) = 1.0;  // unreachable in practice
  return direction_from_coords(ss, std::move(coords));
}

ExtremalPair extremal_pair(const ThetaVector& start, const Direction& dir) {
  if (dir.beta.size() != static_cast<Eigen::Index>(start.size())) {
    throw Error("schema-mismatch", "direction dimension does not match theta");
  }

  // Ratio test: the step size in each sign is limited by the first cell
  // whose mass would cross zero.
  double alpha_plus = std::numeric_limits<double>::infinity();
  double alpha_minus = std::numeric_limits<double>::infinity();
  Eigen::Index block_plus = -1;
  Eigen::Index block_minus = -1;
  for (Eigen::Index c = 0; c < dir.beta.size(); ++c) {
    const double b = dir.beta(c);
    const double v = start[static_cast<std::uint64_t>(c)];
    if (b < -kBetaZeroTol) {
      const double limit = v / (-b);
      if (limit < alpha_plus) {
        alpha_plus = limit;
        block_plus = c;
      }
    } else if (b > kBetaZeroTol) {
      const double limit = v / b;
      if (limit < alpha_minus) {
        alpha_minus = limit;
        block_minus = c;
      }
    }
  }
  if (block_plus < 0 || block_minus < 0) {
    // beta sums to zero with unit norm, so both signs are always present
    throw Error("invalid-argument", "direction has no sign-mixed support");
  }
  if (alpha_plus <= 0.0 || alpha_minus <= 0.0) {
    throw Error("degenerate-start",
                "starting distribution touches the boundary in a blocking cell; "
                "choose another start or direction");
  }

  ThetaVector plus = move_along(start, dir.beta, alpha_plus, block_plus);
  ThetaVector minus = move_along(start, -dir.beta, alpha_minus, block_minus);
  return ExtremalPair{start, std::move(plus), std::move(minus), alpha_plus,
                      alpha_minus, dir};
}

nlohmann::json ExtremalPair::to_json() const {
  return {{"safespace_fingerprint", direction.safespace_fingerprint},
          {"direction_coords",
           std::vector<double>(direction.coords.data(),
                               direction.coords.data() + direction.coords.size())},
          {"alpha_plus", alpha_plus},
          {"alpha_minus", alpha_minus},
          {"theta_plus", theta_plus.to_json()},
          {"theta_minus", theta_minus.to_json()},
          {"start", start.to_json()}};
}

std::string to_string(StartMode mode) {
  return mode == StartMode::kMaxEntropy ? "max-entropy" : "from-dataset";
}

ThetaVector starting_theta(const SafeSpace& ss, const SafeStatistics& psi,
                           StartMode mode, const Dataset* d) {
  if (psi.safespace_fingerprint != ss.fingerprint()) {
    throw Error("fingerprint-mismatch", "psi belongs to a different safe space");
  }
  if (psi.psi.size() != ss.dim_phi()) {
    throw Error("invalid-argument", "psi length does not match dim_phi");
  }

  if (mode == StartMode::kFromDataset) {
    if (d == nullptr) {
      throw Error("invalid-argument", "from-dataset start requires a dataset");
    }
    ThetaVector theta = theta_of_dataset(*d);
    const SafeStatistics actual = phi_of_theta(ss, theta);
    if ((actual.psi - psi.psi).lpNorm<Eigen::Infinity>() > 1e-10) {
      throw Error("psi-mismatch",
                  "dataset's safe statistics do not match the declared psi");
    }
    return theta;
  }

  // Maximum-entropy start: rebuild the workload marginals implied by psi
  // (indicator rows dotted with the phi-reconstructed table) and fit them.
  const Eigen::VectorXd reconstructed = ss.phi_basis() * psi.psi;
  std::vector<std::pair<MarginalSpec, std::vector<double>>> targets;
  for (const auto& spec : ss.workload().marginals) {
    MarginalIndexer indexer(ss.schema(), spec);
    std::vector<double> target(indexer.group_count(), 0.0);
    for (Eigen::Index c = 0; c < reconstructed.size(); ++c) {
      target[indexer.group_of_cell(static_cast<std::uint64_t>(c))] += reconstructed(c);
    }
    for (double& v : target) {
      if (v < 0.0 && v > -1e-9) v = 0.0;
    }
    targets.emplace_back(spec, std::move(target));
  }
  return fit_ipf(targets, ss.schema(), 1e-10, 5000).fitted;
}

}  // namespace sdgaudit
