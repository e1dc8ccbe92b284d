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

// Shared fixtures and independent oracles for the test suites. Everything in
// here recomputes expectations from first principles (tallies, enumerations,
// convex duals) so it can sit in judgment of the library code.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/marginal.hpp"
#include "sdgaudit/rng.hpp"
#include "sdgaudit/schema.hpp"
#include "sdgaudit/theta.hpp"

namespace sdgaudit::testing {

inline Schema make_schema(std::vector<std::pair<std::string, std::uint32_t>> attrs) {
  std::vector<Attribute> list;
  for (auto& [name, card] : attrs) list.push_back({name, card});
  return Schema(std::move(list));
}

// Strictly positive random distribution (flat Dirichlet via exponentials).
inline ThetaVector random_theta(const Schema& schema, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(schema.total_cells());
  for (double& v : w) v = -std::log(1.0 - rng.uniform01());
  const double total = stable_sum(w);
  for (double& v : w) v /= total;
  return ThetaVector(schema, std::move(w));
}

// Random schema with d attributes and cells bounded by max_cells.
inline Schema random_schema(std::uint64_t seed, std::size_t max_attrs = 4,
                            std::uint64_t max_cells = 200) {
  Rng rng(seed);
  const std::size_t d = 2 + rng.uniform_below(max_attrs - 1);
  std::vector<Attribute> attrs;
  std::uint64_t cells = 1;
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint32_t card = 2 + static_cast<std::uint32_t>(rng.uniform_below(5));
    if (cells * card > max_cells) break;
    attrs.push_back({"a" + std::to_string(i), card});
    cells *= card;
  }
  while (attrs.size() < 2) {
    attrs.push_back({"a" + std::to_string(attrs.size()), 2});
  }
  return Schema(std::move(attrs));
}

inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

// Brute-force indicator row: 1 exactly where the decoded cell agrees with the
// value tuple on the spec's attributes.
inline Eigen::VectorXd indicator_row(const Schema& schema, const MarginalSpec& spec,
                                     const std::vector<std::uint32_t>& value) {
  const auto cells = static_cast<Eigen::Index>(schema.total_cells());
  Eigen::VectorXd row = Eigen::VectorXd::Zero(cells);
  for (Eigen::Index c = 0; c < cells; ++c) {
    const auto tuple = schema.cell_of(static_cast<std::uint64_t>(c));
    bool match = true;
    for (std::size_t j = 0; j < spec.attributes.size(); ++j) {
      if (tuple[schema.index_of(spec.attributes[j])] != value[j]) {
        match = false;
        break;
      }
    }
    if (match) row(c) = 1.0;
  }
  return row;
}

// All value tuples of a marginal spec, row-major in spec order.
inline std::vector<std::vector<std::uint32_t>> value_tuples(const Schema& schema,
                                                            const MarginalSpec& spec) {
  std::vector<std::uint32_t> cards;
  for (const auto& a : spec.attributes) {
    cards.push_back(schema.attributes()[schema.index_of(a)].cardinality);
  }
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> tuple(cards.size(), 0);
  for (;;) {
    out.push_back(tuple);
    std::size_t j = cards.size();
    while (j-- > 0) {
      if (++tuple[j] < cards[j]) break;
      tuple[j] = 0;
      if (j == 0) return out;
    }
  }
}

// Constraint system of a marginal-target list, built by brute force.
struct ConstraintSystem {
  Eigen::MatrixXd rows;
  Eigen::VectorXd rhs;
};

inline ConstraintSystem constraint_system(
    const Schema& schema,
    const std::vector<std::pair<MarginalSpec, std::vector<double>>>& targets) {
  const auto cells = static_cast<Eigen::Index>(schema.total_cells());
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& [spec, target] : targets) {
    const auto tuples = value_tuples(schema, spec);
    for (std::size_t v = 0; v < tuples.size(); ++v) {
      rows.push_back(indicator_row(schema, spec, tuples[v]));
      rhs.push_back(target[v]);
    }
  }
  ConstraintSystem sys;
  sys.rows.resize(static_cast<Eigen::Index>(rows.size()), cells);
  sys.rhs.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sys.rows.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    sys.rhs(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  return sys;
}

// Maximum-entropy oracle: Newton descent on the convex dual of
//   max H(theta)  s.t.  A theta = b.
// The optimum has the exponential-family form theta ~ exp(A^T lambda), an
// entirely different route from multiplicative raking.
inline std::vector<double> maxent_oracle(
    const Schema& schema,
    const std::vector<std::pair<MarginalSpec, std::vector<double>>>& targets) {
  const ConstraintSystem sys = constraint_system(schema, targets);
  const Eigen::Index m = sys.rows.rows();
  const auto cells = static_cast<Eigen::Index>(schema.total_cells());

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd theta(cells);
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd logits = sys.rows.transpose() * lambda;
    const double shift = logits.maxCoeff();
    theta = (logits.array() - shift).exp();
    theta /= theta.sum();

    const Eigen::VectorXd grad = sys.rows * theta - sys.rhs;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-13) break;

    const Eigen::MatrixXd weighted = sys.rows * theta.asDiagonal();
    Eigen::MatrixXd hess = weighted * sys.rows.transpose() -
                           (sys.rows * theta) * (sys.rows * theta).transpose();
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    // Backtracking on the dual objective log Z - lambda . b.
    auto dual_value = [&](const Eigen::VectorXd& l) {
      const Eigen::VectorXd lg = sys.rows.transpose() * l;
      const double s = lg.maxCoeff();
      return s + std::log((lg.array() - s).exp().sum()) - l.dot(sys.rhs);
    };
    const double f0 = dual_value(lambda);
    double t = 1.0;
    while (t > 1e-8 && dual_value(lambda - t * step) > f0 - 1e-4 * t * grad.dot(step)) {
      t *= 0.5;
    }
    lambda -= t * step;
  }
  const Eigen::VectorXd logits = sys.rows.transpose() * lambda;
  const double shift = logits.maxCoeff();
  theta = (logits.array() - shift).exp();
  theta /= theta.sum();
  return std::vector<double>(theta.data(), theta.data() + cells);
}

// Orthogonal projector onto the row space of A, via pseudo-inverse.
inline Eigen::MatrixXd row_space_projector(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd gram_pinv =
      (a * a.transpose()).completeOrthogonalDecomposition().pseudoInverse();
  return a.transpose() * gram_pinv * a;
}

}  // namespace sdgaudit::testing
