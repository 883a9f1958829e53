//
// Copyright 2026 The AggDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Full-batch optimizer shared by every K(x) logistic learner.
//
// All learners ascend a gradient of the form
//
//   g_i = target_i - ratio_i * sum_x P(x) K_i(x)      (weights)
//   g_b = bias_target - bias_ratio * sum_x P(x)        (intercept)
//
// over a set of granular rows x. The exact log-likelihood gradient uses
// the labeled sums as targets and unit ratios; the aggregated estimators
// use report clicks as targets and global or per-coordinate count ratios.
// Only coordinates in the working set are represented; outside it the
// gradient and the weights stay zero.

#ifndef AGGDP_OPTIMIZER_H_
#define AGGDP_OPTIMIZER_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aggdp/common.h"
#include "aggdp/encoding.h"
#include "aggdp/model.h"

namespace aggdp {

enum class OptimizerKind { kPreconditioned, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kPreconditioned;
  double step_size = 1.0;
  double l2 = 1.0;
  double l1 = 0.0;  // adam only
  int num_iterations = 200;
};

struct TrainLogEntry {
  int iteration = 0;
  double surrogate = 0.0;
  double gradient_norm = 0.0;
};

// Gradient problem restricted to a working set of coordinates.
struct GradientProblem {
  std::vector<uint64_t> coords;  // sorted global coordinates

  // Rows over local indices, and the transposed layout.
  std::vector<size_t> row_ptr{0};
  std::vector<uint32_t> row_col;
  std::vector<double> row_val;
  std::vector<size_t> col_ptr;
  std::vector<uint32_t> col_row;
  std::vector<double> col_val;

  std::vector<double> target;
  std::vector<double> ratio;
  double bias_target = 0.0;
  double bias_ratio = 1.0;

  // Estimated raw display counts per coordinate and for the intercept;
  // they scale the preconditioner.
  std::vector<double> curvature;
  double bias_curvature = 0.0;
  // Global ratio used for the logged surrogate objective.
  double surrogate_ratio = 1.0;
  // Largest row weight sum_i K_i(x) plus one for the intercept.
  double row_weight = 1.0;

  size_t dim() const { return coords.size(); }
  size_t num_rows() const { return row_ptr.size() - 1; }

  size_t Local(uint64_t coord) const {
    auto it = std::lower_bound(coords.begin(), coords.end(), coord);
    if (it == coords.end() || *it != coord) return std::string::npos;
    return static_cast<size_t>(it - coords.begin());
  }
};

// Fills coords (sorted union of `rows` coordinates and `extra`), the
// local row layout and its transpose; targets and ratios are left zero.
inline GradientProblem BuildProblem(const EncodedRows& rows,
                                    const std::vector<uint64_t>& extra) {
  GradientProblem p;
  p.coords = rows.coord;
  p.coords.insert(p.coords.end(), extra.begin(), extra.end());
  std::sort(p.coords.begin(), p.coords.end());
  p.coords.erase(std::unique(p.coords.begin(), p.coords.end()),
                 p.coords.end());
  const size_t dim = p.coords.size();

  p.row_ptr = rows.row_ptr;
  p.row_col.resize(rows.nnz());
  p.row_val = rows.value;
  ParallelFor(rows.nnz(), [&](size_t begin, size_t end) {
    for (size_t k = begin; k < end; ++k) {
      p.row_col[k] = static_cast<uint32_t>(p.Local(rows.coord[k]));
    }
  });
  double max_weight = 0.0;
  for (size_t r = 0; r < rows.num_rows(); ++r) {
    double w = 0.0;
    for (size_t k = rows.row_ptr[r]; k < rows.row_ptr[r + 1]; ++k) {
      w += rows.value[k];
    }
    max_weight = std::max(max_weight, w);
  }
  p.row_weight = max_weight + 1.0;

  p.col_ptr.assign(dim + 1, 0);
  for (uint32_t c : p.row_col) ++p.col_ptr[c + 1];
  for (size_t c = 0; c < dim; ++c) p.col_ptr[c + 1] += p.col_ptr[c];
  p.col_row.resize(rows.nnz());
  p.col_val.resize(rows.nnz());
  std::vector<size_t> fill(p.col_ptr.begin(), p.col_ptr.end() - 1);
  for (size_t r = 0; r < rows.num_rows(); ++r) {
    for (size_t k = p.row_ptr[r]; k < p.row_ptr[r + 1]; ++k) {
      const size_t slot = fill[p.row_col[k]]++;
      p.col_row[slot] = static_cast<uint32_t>(r);
      p.col_val[slot] = p.row_val[k];
    }
  }
  p.target.assign(dim, 0.0);
  p.ratio.assign(dim, 0.0);
  p.curvature.assign(dim, 0.0);
  return p;
}

// sum_x K_i(x) per local coordinate.
inline std::vector<double> ColumnSums(const GradientProblem& p) {
  std::vector<double> g(p.dim());
  for (size_t c = 0; c < p.dim(); ++c) {
    g[c] = PairwiseSum(p.col_val.data() + p.col_ptr[c],
                       p.col_ptr[c + 1] - p.col_ptr[c]);
  }
  return g;
}

struct GradientEval {
  std::vector<double> grad;  // likelihood part only, no penalty
  double grad_bias = 0.0;
  double surrogate = 0.0;  // unpenalized
};

// Evaluates the gradient and the surrogate objective at (theta, bias).
// Every output element is reduced by one worker in a fixed order, so the
// result does not depend on the worker count.
inline GradientEval Evaluate(const GradientProblem& p,
                             const std::vector<double>& theta, double bias) {
  const size_t n = p.num_rows();
  std::vector<double> prob(n);
  std::vector<double> softplus(n);
  ParallelFor(n, [&](size_t begin, size_t end) {
    for (size_t r = begin; r < end; ++r) {
      double m = bias;
      for (size_t k = p.row_ptr[r]; k < p.row_ptr[r + 1]; ++k) {
        m += theta[p.row_col[k]] * p.row_val[k];
      }
      prob[r] = Sigmoid(m);
      softplus[r] = Softplus(m);
    }
  });
  GradientEval out;
  out.grad.resize(p.dim());
  ParallelFor(p.dim(), [&](size_t begin, size_t end) {
    for (size_t c = begin; c < end; ++c) {
      double s = 0.0;
      for (size_t k = p.col_ptr[c]; k < p.col_ptr[c + 1]; ++k) {
        s += prob[p.col_row[k]] * p.col_val[k];
      }
      out.grad[c] = p.target[c] - p.ratio[c] * s;
    }
  });
  out.grad_bias = p.bias_target - p.bias_ratio * PairwiseSum(prob);
  std::vector<double> linear(p.dim());
  for (size_t c = 0; c < p.dim(); ++c) linear[c] = p.target[c] * theta[c];
  out.surrogate = PairwiseSum(linear) + p.bias_target * bias -
                  p.surrogate_ratio * PairwiseSum(softplus);
  return out;
}

inline double Penalty(const std::vector<double>& theta,
                      const OptimizerConfig& config) {
  std::vector<double> terms(theta.size());
  for (size_t c = 0; c < theta.size(); ++c) {
    terms[c] = 0.5 * config.l2 * theta[c] * theta[c] +
               config.l1 * std::abs(theta[c]);
  }
  return PairwiseSum(terms);
}

struct OptimizeResult {
  std::vector<double> theta;
  double bias = 0.0;
  std::vector<TrainLogEntry> log;
};

// Runs config.num_iterations full-batch ascent steps on the penalized
// surrogate from (theta0, bias0).
//
// The preconditioned path divides coordinate i by
//   0.25 * row_weight * max(curvature_i, 1) + l2,
// a diagonal majorizer of the penalized log-likelihood Hessian, so a step
// size of 1 never decreases the exact penalized likelihood.
inline OptimizeResult Optimize(const GradientProblem& p,
                               const OptimizerConfig& config,
                               std::vector<double> theta0, double bias0) {
  if (config.num_iterations < 1) {
    throw InvalidArgument("num_iterations must be at least 1");
  }
  if (!(config.step_size > 0)) throw InvalidArgument("step_size must be > 0");
  if (!(config.l2 >= 0) || !(config.l1 >= 0)) {
    throw InvalidArgument("regularization weights must be non-negative");
  }
  if (config.l1 > 0 && config.kind != OptimizerKind::kAdam) {
    throw InvalidArgument("l1 regularization requires the adam optimizer");
  }
  OptimizeResult res;
  res.theta = std::move(theta0);
  res.bias = bias0;
  const size_t dim = p.dim();

  std::vector<double> precond(dim);
  for (size_t c = 0; c < dim; ++c) {
    precond[c] =
        0.25 * p.row_weight * std::max(p.curvature[c], 1.0) + config.l2;
  }
  const double bias_precond =
      0.25 * p.row_weight * std::max(p.bias_curvature, 1.0);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  std::vector<double> m1, m2;
  double bm1 = 0, bm2 = 0;
  if (config.kind == OptimizerKind::kAdam) {
    m1.assign(dim, 0.0);
    m2.assign(dim, 0.0);
  }

  auto log_entry = [&](int it, const GradientEval& ev) {
    std::vector<double> sq(dim);
    for (size_t c = 0; c < dim; ++c) {
      const double g = ev.grad[c] - config.l2 * res.theta[c];
      sq[c] = g * g;
    }
    res.log.push_back({it, ev.surrogate - Penalty(res.theta, config),
                       std::sqrt(PairwiseSum(sq) +
                                 ev.grad_bias * ev.grad_bias)});
  };

  for (int it = 0; it < config.num_iterations; ++it) {
    const GradientEval ev = Evaluate(p, res.theta, res.bias);
    log_entry(it, ev);
    if (config.kind == OptimizerKind::kPreconditioned) {
      for (size_t c = 0; c < dim; ++c) {
        res.theta[c] += config.step_size *
                        (ev.grad[c] - config.l2 * res.theta[c]) / precond[c];
      }
      res.bias += config.step_size * ev.grad_bias / bias_precond;
    } else {
      const double t = it + 1;
      const double c1 = 1.0 - std::pow(kBeta1, t);
      const double c2 = 1.0 - std::pow(kBeta2, t);
      for (size_t c = 0; c < dim; ++c) {
        const double g = ev.grad[c] - config.l2 * res.theta[c];
        m1[c] = kBeta1 * m1[c] + (1 - kBeta1) * g;
        m2[c] = kBeta2 * m2[c] + (1 - kBeta2) * g * g;
        double v = res.theta[c] + config.step_size * (m1[c] / c1) /
                                      (std::sqrt(m2[c] / c2) + kAdamEps);
        if (config.l1 > 0) {
          const double shrink = config.step_size * config.l1;
          v = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
        }
        res.theta[c] = v;
      }
      bm1 = kBeta1 * bm1 + (1 - kBeta1) * ev.grad_bias;
      bm2 = kBeta2 * bm2 + (1 - kBeta2) * ev.grad_bias * ev.grad_bias;
      res.bias +=
          config.step_size * (bm1 / c1) / (std::sqrt(bm2 / c2) + kAdamEps);
    }
    bool finite = std::isfinite(res.bias);
    for (size_t c = 0; finite && c < dim; ++c) {
      finite = std::isfinite(res.theta[c]);
    }
    if (!finite) {
      throw Error(ErrorCode::kDivergence,
                  "training diverged at iteration " + std::to_string(it));
    }
  }
  log_entry(config.num_iterations, Evaluate(p, res.theta, res.bias));
  return res;
}

// Dense local weights for `model` over the problem's working set.
inline std::vector<double> LocalWeights(const GradientProblem& p,
                                        const Model& model) {
  std::vector<double> theta(p.dim(), 0.0);
  for (size_t k = 0; k < model.theta.size(); ++k) {
    const size_t local = p.Local(model.theta.index[k]);
    if (local != std::string::npos) theta[local] = model.theta.value[k];
  }
  return theta;
}

// Non-zero local weights as a sparse global vector.
inline SparseVector GlobalWeights(const GradientProblem& p,
                                  const std::vector<double>& theta) {
  SparseVector out;
  for (size_t c = 0; c < p.dim(); ++c) {
    if (theta[c] != 0.0) {
      out.index.push_back(p.coords[c]);
      out.value.push_back(theta[c]);
    }
  }
  return out;
}

// Gradient over the working set together with its intercept component.
struct Gradient {
  SparseVector theta;
  double bias = 0.0;
};

inline Gradient ToGradient(const GradientProblem& p, const GradientEval& ev) {
  Gradient g;
  g.theta.index = p.coords;
  g.theta.value = ev.grad;
  g.bias = ev.grad_bias;
  return g;
}

inline std::string FormatTrainLog(const std::vector<TrainLogEntry>& log) {
  std::string out = "iteration,surrogate,gradient_norm\n";
  for (const auto& e : log) {
    out += std::to_string(e.iteration) + "," + FormatDouble(e.surrogate) +
           "," + FormatDouble(e.gradient_norm) + "\n";
  }
  return out;
}

}  // namespace aggdp

#endif  // AGGDP_OPTIMIZER_H_
