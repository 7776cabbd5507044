// Copyright 2026 The mvpcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mvpcl/variance.hpp"

#include <cmath>

#include "mvpcl/parallel.hpp"

namespace mvpcl {
namespace {

void check_fit(const FitResult& fit, const MvpModel& model) {
  if (fit.theta1.size() != model.n_theta1() ||
      static_cast<Index>(fit.stage2.size()) != model.n_pairs()) {
    throw InputError("fit result does not match the model dimensions");
  }
}

// Derivatives of pair m for every observation.
struct PairColumn {
  Vector score;
  Vector curvature;
  Vector dscore_daj;
  Vector dscore_dak;
};

PairColumn pair_column(const Matrix& predictors, const MvpModel& model, const PairFit& pf) {
  const Index n = model.n_obs();
  PairColumn col{Vector(n), Vector(n), Vector(n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    const PairObsDerivatives d =
        pair_obs_derivatives(model.y()(i, pf.j), model.y()(i, pf.k), predictors(i, pf.j),
                             predictors(i, pf.k), pf.rho);
    col.score[i] = d.score;
    col.curvature[i] = d.curvature;
    col.dscore_daj[i] = d.dscore_daj;
    col.dscore_dak[i] = d.dscore_dak;
  }
  return col;
}

}  // namespace

ObsScores per_obs_scores(const FitResult& fit, const MvpModel& model, int threads) {
  check_fit(fit, model);
  const Index n = model.n_obs();
  const Index p = model.n_coef();
  const auto& layout = model.layout();

  ObsScores out{Matrix::Zero(n, model.n_theta1()), Matrix::Zero(n, model.n_pairs())};
  parallel_for(layout.n_groups(), threads, [&](std::ptrdiff_t g) {
    const GroupData d = group_data(model, g);
    const Vector beta = fit.theta1.segment(layout.offset_of_group(g), p);
    const Matrix rows = uni_score_hessian(beta, d.x, d.y, d.weights).score_per_obs;
    auto block = out.stage1.middleCols(layout.offset_of_group(g), p);
    for (std::size_t b = 0; b < d.components.size(); ++b) {
      block += rows.middleRows(static_cast<Index>(b) * n, n);
    }
  });

  const Matrix predictors = model.linear_predictors(fit.theta1);
  parallel_for(model.n_pairs(), threads, [&](std::ptrdiff_t m) {
    const PairColumn col = pair_column(predictors, model, fit.stage2[static_cast<std::size_t>(m)]);
    out.stage2.col(m) = model.pair_weight(m) * col.score;
  });
  return out;
}

SandwichBlocks assemble_blocks(const ObsScores& scores, const FitResult& fit,
                               const MvpModel& model, int threads) {
  check_fit(fit, model);
  const Index n = model.n_obs();
  const Index n1 = model.n_theta1();
  const Index m = model.n_pairs();
  const Index p = model.n_coef();
  const auto& layout = model.layout();
  if (scores.stage1.rows() != n || scores.stage1.cols() != n1 || scores.stage2.rows() != n ||
      scores.stage2.cols() != m) {
    throw InputError("score matrices do not match the model dimensions");
  }
  const double nn = static_cast<double>(n);

  // Stage-1 information: block diagonal over coefficient groups, scaled to
  // a mean over the original observations.
  Matrix h1 = Matrix::Zero(n1, n1);
  for (Index g = 0; g < layout.n_groups(); ++g) {
    const GroupData d = group_data(model, g);
    const Vector beta = fit.theta1.segment(layout.offset_of_group(g), p);
    const double rows_per_obs = static_cast<double>(d.x.rows()) / nn;
    h1.block(layout.offset_of_group(g), layout.offset_of_group(g), p, p) =
        uni_score_hessian(beta, d.x, d.y, d.weights).neg_hessian_mean * rows_per_obs;
  }

  const Matrix predictors = model.linear_predictors(fit.theta1);
  Vector h2(m);
  Matrix c_star = Matrix::Zero(m, n1);
  parallel_for(m, threads, [&](std::ptrdiff_t mm) {
    const PairFit& pf = fit.stage2[static_cast<std::size_t>(mm)];
    const double w = model.pair_weight(mm);
    const PairColumn col = pair_column(predictors, model, pf);
    h2[mm] = -w * col.curvature.sum() / nn;
    // d s / d beta_j = (d s / d a_j) x_i over component j's columns.
    const Vector grad_j = model.component_design(pf.j).transpose() * col.dscore_daj;
    const Vector grad_k = model.component_design(pf.k).transpose() * col.dscore_dak;
    c_star.row(mm).segment(layout.offset_of_component(pf.j), p) -= w * grad_j.transpose() / nn;
    c_star.row(mm).segment(layout.offset_of_component(pf.k), p) -= w * grad_k.transpose() / nn;
  });

  SandwichBlocks blocks;
  blocks.n_obs = n;
  blocks.v1 = inverse_spd(h1, "V1 (stage-1 information)");
  Matrix h2_mat = h2.asDiagonal();
  blocks.v2 = inverse_spd(h2_mat, "V2 (stage-2 information)");
  blocks.v1_star = scores.stage1.transpose() * scores.stage1 / nn;
  blocks.v2_star = scores.stage2.transpose() * scores.stage2 / nn;
  blocks.c_star = std::move(c_star);
  blocks.r = scores.stage2.transpose() * scores.stage1 / nn;
  return blocks;
}

Matrix robust_cov(const SandwichBlocks& b) {
  const Index n1 = b.v1.rows();
  const Index m = b.v2.rows();
  if (b.n_obs <= 0) {
    throw InputError("sandwich blocks carry no observations");
  }
  const Matrix w1 = b.v1 * b.v1_star * b.v1;
  const Matrix cov12 = b.v1 * b.r.transpose() * b.v2 - w1 * b.c_star.transpose() * b.v2;
  const Matrix inner = b.c_star * w1 * b.c_star.transpose() - b.r * b.v1 * b.c_star.transpose() -
                       b.c_star * b.v1 * b.r.transpose();
  const Matrix w2 = b.v2 * b.v2_star * b.v2 + b.v2 * inner * b.v2;

  Matrix cov(n1 + m, n1 + m);
  cov.topLeftCorner(n1, n1) = w1;
  cov.topRightCorner(n1, m) = cov12;
  cov.bottomLeftCorner(m, n1) = cov12.transpose();
  cov.bottomRightCorner(m, m) = w2;
  cov /= static_cast<double>(b.n_obs);
  cov = (0.5 * (cov + cov.transpose())).eval();

  if (!cov.allFinite()) {
    throw NumericError("robust covariance has non-finite entries");
  }
  const double scale = std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Index i = 0; i < cov.rows(); ++i) {
    if (cov(i, i) < 0.0) {
      if (cov(i, i) < -1e-12 * scale) {
        throw NumericError("robust covariance has a negative variance at parameter " +
                           std::to_string(i));
      }
      cov(i, i) = 0.0;
    }
  }
  return cov;
}

Matrix robust_covariance(const FitResult& fit, const MvpModel& model, int threads) {
  const ObsScores scores = per_obs_scores(fit, model, threads);
  return robust_cov(assemble_blocks(scores, fit, model, threads));
}

}  // namespace mvpcl
