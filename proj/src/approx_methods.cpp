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

#include "qtomo/approx_methods.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace qtomo {
namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr int kMaxBacktracks = 60;
// Likelihood evaluations carry rounding noise proportional to the number of
// terms; decreases within this slack are noise, not regressions.
constexpr double kGuardSlack = 1e-13;
constexpr std::uint64_t kTrialSalt = 0x7a1;
constexpr std::uint64_t kStartSalt = 0x7a2;

double gaussian_objective(const std::vector<double>& freqs,
                          const std::vector<Mat>& effects, const Mat& rho,
                          double n_samples) {
  double acc = 0.0;
  for (std::size_t l = 0; l < freqs.size(); ++l) {
    const double p = (rho.transpose().cwiseProduct(effects[l])).sum().real();
    const double var = std::max(p * (1.0 - p), kVarianceFloor) / n_samples;
    const double d = freqs[l] - p;
    acc -= d * d / (2.0 * var);
  }
  return acc;
}

// rho(theta) = A^dagger A / Tr[A^dagger A]; theta packs Re/Im of A
// row-major.
Mat rho_from_params(const Eigen::VectorXd& theta, Eigen::Index d) {
  Mat a(d, d);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      a(r, c) = Complex(theta[i], theta[i + 1]);
      i += 2;
    }
  }
  Mat rho = a.adjoint() * a;
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) {
    // Degenerate parameter point; fall back to the maximally mixed state.
    return Mat::Identity(d, d) / static_cast<double>(d);
  }
  return hermitized_mat(rho / tr);
}

}  // namespace

double gaussian_loglike(const StateDataset& ds, const DensityMatrix& rho,
                        double n_samples) {
  if (!(n_samples > 0.0)) {
    throw std::invalid_argument("gaussian_loglike: n_samples must be positive");
  }
  if (rho.dim() != ds.povm.dim()) {
    throw std::invalid_argument("gaussian_loglike: dimension mismatch");
  }
  std::vector<Mat> effects;
  for (const auto& e : ds.povm.elements()) effects.push_back(e.mat());
  return gaussian_objective(ds.record.frequencies(), effects, rho.mat(),
                            n_samples);
}

MleReport estimate_state_gaussian(const StateDataset& ds, double n_samples,
                                  const GaussianOptions& opts) {
  if (!(n_samples > 0.0)) {
    throw std::invalid_argument(
        "estimate_state_gaussian: n_samples must be positive");
  }
  const Eigen::Index d = ds.povm.dim();
  const std::vector<double> freqs = ds.record.frequencies();
  std::vector<Mat> effects;
  for (const auto& e : ds.povm.elements()) effects.push_back(e.mat());

  const auto objective = [&](const Eigen::VectorXd& theta) {
    return gaussian_objective(freqs, effects, rho_from_params(theta, d),
                              n_samples);
  };

  const Eigen::Index n_params = 2 * d * d;
  MleReport best;
  best.loglike = -std::numeric_limits<double>::infinity();

  for (int start = 0; start <= opts.n_starts; ++start) {
    Eigen::VectorXd theta(n_params);
    if (start == 0) {
      // A = identity: the maximally mixed state.
      theta.setZero();
      for (Eigen::Index r = 0; r < d; ++r) theta[2 * (r * d + r)] = 1.0;
    } else {
      StreamRng rng(opts.seed.substream(kStartSalt)
                        .substream(static_cast<std::uint64_t>(start)));
      for (Eigen::Index i = 0; i < n_params; ++i) theta[i] = rng.gaussian();
    }

    double value = objective(theta);
    std::vector<double> trace{value};
    Eigen::VectorXd grad(n_params);
    int iters = 0;
    bool stalled = false;
    int small_gains = 0;

    for (int n = 1; n <= opts.max_iters; ++n) {
      iters = n;
      for (Eigen::Index i = 0; i < n_params; ++i) {
        const double h = opts.fd_step * std::max(1.0, std::abs(theta[i]));
        Eigen::VectorXd probe = theta;
        probe[i] = theta[i] + h;
        const double up = objective(probe);
        probe[i] = theta[i] - h;
        const double down = objective(probe);
        grad[i] = (up - down) / (2.0 * h);
      }
      const double gnorm = grad.norm();
      if (gnorm < 1e-11) {
        stalled = true;
        break;
      }

      double step = 1.0 / std::max(1.0, gnorm);
      double cand_value = value;
      Eigen::VectorXd cand = theta;
      bool improved = false;
      for (int k = 0; k < kMaxBacktracks; ++k) {
        cand = theta + step * grad;
        cand_value = objective(cand);
        if (cand_value > value) {
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) {
        stalled = true;
        break;
      }
      const double gain = cand_value - value;
      theta = std::move(cand);
      value = cand_value;
      trace.push_back(value);
      small_gains = gain < opts.tol_improve ? small_gains + 1 : 0;
      if (small_gains >= 2) {
        stalled = true;
        break;
      }
    }

    if (value > best.loglike) {
      best.loglike = value;
      best.estimate = DensityMatrix::unchecked(
          Operator(ds.povm.spaces(), rho_from_params(theta, d)));
      best.iterations = iters;
      best.converged = stalled;
      best.loglike_trace = std::move(trace);
    }
  }
  return best;
}

ProcessMleReport estimate_process_trace_only(const ProcessDataset& ds,
                                             const MleOptions& opts,
                                             std::optional<ChoiOperator> init) {
  if (opts.damping < 0.0 || opts.damping >= 1.0) {
    throw std::invalid_argument(
        "estimate_process_trace_only: damping must lie in [0, 1)");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  const std::vector<SpaceLabel> spaces{ds.input_space(), ds.output_space()};
  const double target_trace = static_cast<double>(dh);

  std::vector<std::vector<double>> freqs;
  std::vector<std::vector<Mat>> effects;
  // Sum of a probe's effects; its inner product with S is that probe's
  // total outcome weight, 1 exactly when S is trace preserving.
  std::vector<Mat> setting_sums;
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    freqs.push_back(ds.probe_frequencies(m));
    std::vector<Mat> row;
    Mat sum = Mat::Zero(dh * dk, dh * dk);
    for (const auto& e : ds.probe_effects(m)) {
      row.push_back(e.mat());
      sum += e.mat();
    }
    effects.push_back(std::move(row));
    setting_sums.push_back(std::move(sum));
  }

  // Off the trace-preserving manifold the raw values Tr[S G_ml] do not sum
  // to one over a probe's outcomes; each record is compared against the
  // normalized distribution p/q instead. Keeping the raw values would let
  // the likelihood's scale sensitivity re-impose the dropped constraint.
  const auto norm_of = [&](const Mat& s, std::size_t m) {
    const double q =
        (s.transpose().cwiseProduct(setting_sums[m])).sum().real();
    return std::max(q, opts.prob_floor);
  };
  const auto loglike_of = [&](const Mat& s) {
    double acc = 0.0;
    for (std::size_t m = 0; m < freqs.size(); ++m) {
      const double log_q = std::log(norm_of(s, m));
      for (std::size_t l = 0; l < freqs[m].size(); ++l) {
        if (freqs[m][l] <= 0.0) continue;
        const double p =
            (s.transpose().cwiseProduct(effects[m][l])).sum().real();
        acc += freqs[m][l] *
               (std::log(std::max(p, opts.prob_floor)) - log_q);
      }
    }
    return acc;
  };
  const auto step_of = [&](const Mat& s, double damping) {
    Mat k = Mat::Zero(s.rows(), s.cols());
    for (std::size_t m = 0; m < freqs.size(); ++m) {
      const double q = norm_of(s, m);
      for (std::size_t l = 0; l < freqs[m].size(); ++l) {
        if (freqs[m][l] <= 0.0) continue;
        const double p =
            (s.transpose().cwiseProduct(effects[m][l])).sum().real();
        k += (freqs[m][l] * q / std::max(p, opts.prob_floor)) *
             effects[m][l];
      }
    }
    k = hermitized_mat(k);
    Mat next = hermitized_mat(k * s * k);
    const double tr = next.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      throw std::runtime_error(
          "estimate_process_trace_only: update has nonpositive trace");
    }
    next *= target_trace / tr;
    if (damping > 0.0) {
      next = hermitized_mat((1.0 - damping) * next + damping * s);
    }
    return next;
  };

  Mat s;
  if (init.has_value()) {
    if (init->input_space().dim != dh || init->output_space().dim != dk) {
      throw std::invalid_argument(
          "estimate_process_trace_only: init dimension mismatch");
    }
    s = init->mat();
  } else {
    s = Mat::Identity(dh * dk, dh * dk) / static_cast<double>(dk);
  }

  ProcessMleReport report;
  double loglike = loglike_of(s);
  report.loglike_trace.push_back(loglike);

  for (int n = 1; n <= opts.max_iters; ++n) {
    report.iterations = n;
    double damping = opts.damping;
    Mat candidate = step_of(s, damping);
    double cand_loglike = loglike_of(candidate);
    for (int k = 0; cand_loglike < loglike - kGuardSlack && k < kMaxBacktracks;
         ++k) {
      damping = damping < 0.5 ? 0.5 : 0.5 * (1.0 + damping);
      candidate = step_of(s, damping);
      cand_loglike = loglike_of(candidate);
    }
    const double gain = cand_loglike - loglike;
    const double movement = max_abs_mat(candidate - s);
    s = std::move(candidate);
    loglike = cand_loglike;
    report.loglike_trace.push_back(loglike);
    if (std::abs(gain) < opts.tol_loglike || movement < opts.tol_fixedpoint) {
      report.converged = true;
      break;
    }
  }

  ChoiOperator estimate =
      ChoiOperator::unchecked(Operator(spaces, std::move(s)));
  report.tp_residual = estimate.tp_residual();
  report.loglike = loglike;
  report.estimate = std::move(estimate);
  return report;
}

ComparisonReport compare_variances(const ComparisonConfig& config) {
  if (config.trials <= 0) {
    throw std::invalid_argument("compare_variances: need at least one trial");
  }
  const ChoiOperator s_true = build_choi(config.channel);
  const std::vector<DensityMatrix> probes =
      config.probes.empty() ? pauli_eigenstates({"H", 2}) : config.probes;

  ComparisonReport report;
  report.trials = config.trials;
  for (int t = 0; t < config.trials; ++t) {
    const RngSeed trial_seed = config.seed.substream(kTrialSalt)
                                   .substream(static_cast<std::uint64_t>(t));
    const ProcessDataset ds = generate_process_dataset(
        s_true, probes, config.out_axes, config.n_per_axis, trial_seed,
        config.exact_frequencies);
    const Mat exact =
        estimate_process(ds, config.opts).estimate.mat();
    const Mat approx =
        estimate_process_trace_only(ds, config.opts).estimate.mat();
    report.sq_errors_exact.push_back(
        (exact - s_true.mat()).squaredNorm());
    report.sq_errors_approx.push_back(
        (approx - s_true.mat()).squaredNorm());
  }
  for (double e : report.sq_errors_exact) report.var_exact += e;
  for (double e : report.sq_errors_approx) report.var_approx += e;
  report.var_exact /= static_cast<double>(config.trials);
  report.var_approx /= static_cast<double>(config.trials);
  return report;
}

}  // namespace qtomo
