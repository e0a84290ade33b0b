// Copyright 2026 The qtomo Authors
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

#include "qtomo/state_mle.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qtomo {
namespace {

// Retry schedule for the monotonicity guard: damping 1/2, 3/4, 7/8, ...
constexpr int kMaxBacktracks = 60;

// Likelihood evaluations carry O(|L| eps) rounding noise. Decreases within
// this slack are noise, not regressions; backtracking on them would damp
// the step to nothing and stall the iteration far from the optimum.
constexpr double kGuardSlack = 1e-13;

double loglike_mat(const std::vector<double>& freqs,
                   const std::vector<Mat>& effects, const Mat& rho,
                   double floor) {
  double acc = 0.0;
  for (std::size_t l = 0; l < freqs.size(); ++l) {
    if (freqs[l] <= 0.0) continue;
    const double p =
        (rho.transpose().cwiseProduct(effects[l])).sum().real();
    acc += freqs[l] * std::log(std::max(p, floor));
  }
  return acc;
}

Mat r_kernel_mat(const std::vector<double>& freqs,
                 const std::vector<Mat>& effects, const Mat& rho,
                 double floor) {
  Mat r = Mat::Zero(rho.rows(), rho.cols());
  for (std::size_t l = 0; l < freqs.size(); ++l) {
    if (freqs[l] <= 0.0) continue;
    const double p =
        (rho.transpose().cwiseProduct(effects[l])).sum().real();
    r += (freqs[l] / std::max(p, floor)) * effects[l];
  }
  return hermitized_mat(r);
}

Mat step_mat(const std::vector<double>& freqs,
             const std::vector<Mat>& effects, const Mat& rho, double damping,
             double floor) {
  const Mat r = r_kernel_mat(freqs, effects, rho, floor);
  Mat next = r * rho * r;
  const double tr = next.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw std::runtime_error("mle_step: update has nonpositive trace");
  }
  next = hermitized_mat(next / tr);
  if (damping > 0.0) {
    next = hermitized_mat((1.0 - damping) * next + damping * rho);
  }
  return next;
}

std::vector<Mat> effect_mats(const Povm& povm) {
  std::vector<Mat> out;
  out.reserve(povm.size());
  for (const auto& e : povm.elements()) out.push_back(e.mat());
  return out;
}

}  // namespace

StateDataset::StateDataset(Povm povm_in, CountRecord record_in)
    : povm(std::move(povm_in)), record(std::move(record_in)) {
  record.validate();
  if (record.counts.size() != povm.size()) {
    throw std::invalid_argument(
        "StateDataset: record has " + std::to_string(record.counts.size()) +
        " outcomes but the POVM has " + std::to_string(povm.size()));
  }
}

double log_likelihood(const StateDataset& ds, const DensityMatrix& rho,
                      double floor) {
  if (rho.dim() != ds.povm.dim()) {
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  }
  return loglike_mat(ds.record.frequencies(), effect_mats(ds.povm),
                     rho.mat(), floor);
}

Operator r_kernel(const StateDataset& ds, const DensityMatrix& rho,
                  double floor) {
  if (rho.dim() != ds.povm.dim()) {
    throw std::invalid_argument("r_kernel: dimension mismatch");
  }
  return Operator(ds.povm.spaces(),
                  r_kernel_mat(ds.record.frequencies(),
                               effect_mats(ds.povm), rho.mat(), floor));
}

DensityMatrix mle_step(const StateDataset& ds, const DensityMatrix& rho,
                       double damping, double floor) {
  if (rho.dim() != ds.povm.dim()) {
    throw std::invalid_argument("mle_step: dimension mismatch");
  }
  if (damping < 0.0 || damping >= 1.0) {
    throw std::invalid_argument("mle_step: damping must lie in [0, 1)");
  }
  return DensityMatrix::unchecked(
      Operator(ds.povm.spaces(),
               step_mat(ds.record.frequencies(), effect_mats(ds.povm),
                        rho.mat(), damping, floor)));
}

MleReport estimate_state(const StateDataset& ds, const MleOptions& opts,
                         std::optional<DensityMatrix> init,
                         const StateObserver& observer) {
  if (opts.damping < 0.0 || opts.damping >= 1.0) {
    throw std::invalid_argument("estimate_state: damping must lie in [0, 1)");
  }
  const std::vector<double> freqs = ds.record.frequencies();
  const std::vector<Mat> effects = effect_mats(ds.povm);

  Mat rho;
  if (init.has_value()) {
    if (init->dim() != ds.povm.dim()) {
      throw std::invalid_argument("estimate_state: init dimension mismatch");
    }
    rho = init->mat();
  } else {
    rho = DensityMatrix::maximally_mixed(ds.povm.spaces()).mat();
  }

  MleReport report;
  double loglike = loglike_mat(freqs, effects, rho, opts.prob_floor);
  report.loglike_trace.push_back(loglike);

  for (int n = 1; n <= opts.max_iters; ++n) {
    report.iterations = n;
    double damping = opts.damping;
    Mat candidate = step_mat(freqs, effects, rho, damping, opts.prob_floor);
    double cand_loglike =
        loglike_mat(freqs, effects, candidate, opts.prob_floor);
    for (int k = 0; cand_loglike < loglike - kGuardSlack && k < kMaxBacktracks;
         ++k) {
      damping = damping < 0.5 ? 0.5 : 0.5 * (1.0 + damping);
      candidate = step_mat(freqs, effects, rho, damping, opts.prob_floor);
      cand_loglike = loglike_mat(freqs, effects, candidate, opts.prob_floor);
    }

    const double gain = cand_loglike - loglike;
    const double movement = max_abs_mat(candidate - rho);
    rho = std::move(candidate);
    loglike = cand_loglike;
    report.loglike_trace.push_back(loglike);
    if (observer) {
      observer(DensityMatrix::unchecked(Operator(ds.povm.spaces(), rho)), n);
    }
    if (std::abs(gain) < opts.tol_loglike || movement < opts.tol_fixedpoint) {
      report.converged = true;
      break;
    }
  }

  report.estimate =
      DensityMatrix::unchecked(Operator(ds.povm.spaces(), std::move(rho)));
  report.loglike = loglike;
  return report;
}

}  // namespace qtomo
