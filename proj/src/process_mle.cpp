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

#include "qtomo/process_mle.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qtomo {
namespace {

constexpr int kMaxBacktracks = 60;

// Likelihood evaluations carry O(|L| eps) rounding noise. Decreases within
// this slack are noise, not regressions; backtracking on them would damp
// the step to nothing and stall the iteration far from the optimum.
constexpr double kGuardSlack = 1e-13;

double trace_product(const Mat& a, const Mat& b) {
  // Re Tr[a b] for square matrices of equal size.
  return (a.transpose().cwiseProduct(b)).sum().real();
}

double loglike_mats(const std::vector<std::vector<double>>& freqs,
                    const std::vector<std::vector<Mat>>& effects,
                    const Mat& s, double floor) {
  double acc = 0.0;
  for (std::size_t m = 0; m < freqs.size(); ++m) {
    for (std::size_t l = 0; l < freqs[m].size(); ++l) {
      if (freqs[m][l] <= 0.0) continue;
      const double p = trace_product(s, effects[m][l]);
      acc += freqs[m][l] * std::log(std::max(p, floor));
    }
  }
  return acc;
}

Mat k_kernel_mats(const std::vector<std::vector<double>>& freqs,
                  const std::vector<std::vector<Mat>>& effects, const Mat& s,
                  double floor) {
  Mat k = Mat::Zero(s.rows(), s.cols());
  for (std::size_t m = 0; m < freqs.size(); ++m) {
    for (std::size_t l = 0; l < freqs[m].size(); ++l) {
      if (freqs[m][l] <= 0.0) continue;
      const double p = trace_product(s, effects[m][l]);
      k += (freqs[m][l] / std::max(p, floor)) * effects[m][l];
    }
  }
  return hermitized_mat(k);
}

// Sandwich by kron(x, I_dk) on both sides: kron(x,I) * s * kron(x,I).
Mat input_sandwich(const Mat& x, const Mat& s, Eigen::Index dh,
                   Eigen::Index dk) {
  const Mat xi = kron(x, Mat::Identity(dk, dk));
  Mat out = xi * s * xi;
  (void)dh;
  return out;
}

// Project a PSD operator onto Tr_out = identity by the symmetric rescaling
// S -> (t^-1/2 x I) S (t^-1/2 x I) with t = Tr_out[S].
Mat tp_project(const Mat& s, Eigen::Index dh, Eigen::Index dk) {
  const Mat t = ptrace_at(s, {dh, dk}, 1);
  const Mat tinv_sqrt =
      reg_inverse_mat(psd_sqrt_mat(hermitized_mat(t)), tol::lambda_floor);
  return hermitized_mat(input_sandwich(tinv_sqrt, s, dh, dk));
}

Mat step_mat(const std::vector<std::vector<double>>& freqs,
             const std::vector<std::vector<Mat>>& effects, const Mat& s,
             Eigen::Index dh, Eigen::Index dk, double damping, double floor) {
  const Mat k = k_kernel_mats(freqs, effects, s, floor);
  const Mat ksk = hermitized_mat(k * s * k);
  const Mat lam2 = ptrace_at(ksk, {dh, dk}, 1);
  const Mat lam_inv =
      reg_inverse_mat(psd_sqrt_mat(hermitized_mat(lam2)), tol::lambda_floor);
  Mat next = tp_project(hermitized_mat(input_sandwich(lam_inv, ksk, dh, dk)),
                        dh, dk);
  if (damping > 0.0) {
    next = hermitized_mat((1.0 - damping) * next + damping * s);
  }
  return next;
}

}  // namespace

ProbeSpec ProbeSpec::separable(DensityMatrix state) {
  if (state.op().spaces().size() != 1) {
    throw std::invalid_argument(
        "ProbeSpec::separable: state must live on a single space");
  }
  return ProbeSpec{Kind::separable, std::move(state)};
}

ProbeSpec ProbeSpec::entangled(DensityMatrix state) {
  if (state.op().spaces().size() != 2) {
    throw std::invalid_argument(
        "ProbeSpec::entangled: state must live on (input, ancilla)");
  }
  return ProbeSpec{Kind::entangled, std::move(state)};
}

ProcessDataset::ProcessDataset(std::vector<ProbeSpec> probes,
                               std::vector<Povm> povms,
                               std::vector<CountRecord> records)
    : probes_(std::move(probes)),
      povms_(std::move(povms)),
      records_(std::move(records)) {
  if (probes_.empty()) {
    throw std::invalid_argument("ProcessDataset: no probes");
  }
  if (povms_.size() != probes_.size() || records_.size() != probes_.size()) {
    throw std::invalid_argument(
        "ProcessDataset: probes, POVMs and records must align");
  }

  Eigen::Index dh = 0, dk = 0;
  for (std::size_t m = 0; m < probes_.size(); ++m) {
    const auto& probe = probes_[m];
    const auto& probe_spaces = probe.state.op().spaces();
    const auto& povm_spaces = povms_[m].spaces();
    const bool entangled = probe.kind == ProbeSpec::Kind::entangled;
    if (probe_spaces.size() != (entangled ? 2u : 1u)) {
      throw std::invalid_argument("ProcessDataset: probe " +
                                  std::to_string(m) +
                                  " has the wrong number of spaces");
    }
    if (povm_spaces.size() != (entangled ? 2u : 1u)) {
      throw std::invalid_argument(
          "ProcessDataset: POVM " + std::to_string(m) +
          (entangled ? " must live on (output, ancilla)"
                     : " must live on the output space alone"));
    }
    if (entangled && povm_spaces[1].dim != probe_spaces[1].dim) {
      throw std::invalid_argument("ProcessDataset: probe " +
                                  std::to_string(m) +
                                  " ancilla dimension mismatch");
    }
    records_[m].validate();
    if (records_[m].counts.size() != povms_[m].size()) {
      throw std::invalid_argument("ProcessDataset: record " +
                                  std::to_string(m) +
                                  " does not match its POVM");
    }
    if (m == 0) {
      dh = probe_spaces[0].dim;
      dk = povm_spaces[0].dim;
    } else if (probe_spaces[0].dim != dh || povm_spaces[0].dim != dk) {
      throw std::invalid_argument(
          "ProcessDataset: probes disagree on channel dimensions");
    }
  }
  input_space_ = SpaceLabel{"H", dh};
  output_space_ = SpaceLabel{"K", dk};

  // Reduce each (probe, POVM element) pair to an effect on (H, K).
  effects_.resize(probes_.size());
  freqs_.resize(probes_.size());
  for (std::size_t m = 0; m < probes_.size(); ++m) {
    freqs_[m] = records_[m].frequencies();
    effects_[m].reserve(povms_[m].size());
    if (probes_[m].kind == ProbeSpec::Kind::separable) {
      const Operator probe_t =
          probes_[m].state.op().renamed({"H"}).transpose();
      for (const auto& e : povms_[m].elements()) {
        effects_[m].push_back(tensor(probe_t, e.renamed({"K"})));
      }
    } else {
      const SpaceLabel b{"B", probes_[m].state.op().spaces()[1].dim};
      const std::vector<SpaceLabel> joint{input_space_, b, output_space_};
      const Operator probe_t = embed(
          partial_transpose(probes_[m].state.op().renamed({"H", "B"}), "H"),
          joint);
      for (const auto& e : povms_[m].elements()) {
        const Operator lifted = embed(e.renamed({"K", "B"}), joint);
        effects_[m].push_back(
            partial_trace(probe_t * lifted, "B").hermitized());
      }
    }
  }
}

double process_log_likelihood(const ProcessDataset& ds, const ChoiOperator& s,
                              double floor) {
  double acc = 0.0;
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    const auto& freqs = ds.probe_frequencies(m);
    const auto& effects = ds.probe_effects(m);
    for (std::size_t l = 0; l < freqs.size(); ++l) {
      if (freqs[l] <= 0.0) continue;
      const double p =
          (s.mat().transpose().cwiseProduct(effects[l].mat())).sum().real();
      acc += freqs[l] * std::log(std::max(p, floor));
    }
  }
  return acc;
}

Operator k_kernel(const ProcessDataset& ds, const ChoiOperator& s,
                  double floor) {
  Operator k =
      Operator::zero({ds.input_space(), ds.output_space()});
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    const auto& freqs = ds.probe_frequencies(m);
    const auto& effects = ds.probe_effects(m);
    for (std::size_t l = 0; l < freqs.size(); ++l) {
      if (freqs[l] <= 0.0) continue;
      const double p =
          (s.mat().transpose().cwiseProduct(effects[l].mat())).sum().real();
      k = k + (freqs[l] / std::max(p, floor)) * effects[l];
    }
  }
  return k.hermitized();
}

Operator lambda_multiplier(const Operator& k, const ChoiOperator& s) {
  if (k.spaces() != s.op().spaces()) {
    throw std::invalid_argument(
        "lambda_multiplier: kernel and Choi operator live on different "
        "spaces");
  }
  const Operator ksk = (k * s.op() * k).hermitized();
  const Operator lam = psd_sqrt(partial_trace(ksk, s.output_space()));
  return tensor(lam, Operator::identity({s.output_space()}));
}

ChoiOperator process_step(const ProcessDataset& ds, const ChoiOperator& s,
                          double damping, double floor) {
  if (damping < 0.0 || damping >= 1.0) {
    throw std::invalid_argument("process_step: damping must lie in [0, 1)");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  if (s.input_space().dim != dh || s.output_space().dim != dk) {
    throw std::invalid_argument("process_step: dimension mismatch");
  }
  std::vector<std::vector<double>> freqs;
  std::vector<std::vector<Mat>> effects;
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    freqs.push_back(ds.probe_frequencies(m));
    std::vector<Mat> row;
    for (const auto& e : ds.probe_effects(m)) row.push_back(e.mat());
    effects.push_back(std::move(row));
  }
  return ChoiOperator::unchecked(
      Operator({ds.input_space(), ds.output_space()},
               step_mat(freqs, effects, s.mat(), dh, dk, damping, floor)));
}

ProcessMleReport estimate_process(const ProcessDataset& ds,
                                  const MleOptions& opts,
                                  std::optional<ChoiOperator> init,
                                  const ProcessObserver& observer) {
  if (opts.damping < 0.0 || opts.damping >= 1.0) {
    throw std::invalid_argument(
        "estimate_process: damping must lie in [0, 1)");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  const std::vector<SpaceLabel> spaces{ds.input_space(), ds.output_space()};

  std::vector<std::vector<double>> freqs;
  std::vector<std::vector<Mat>> effects;
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    freqs.push_back(ds.probe_frequencies(m));
    std::vector<Mat> row;
    for (const auto& e : ds.probe_effects(m)) row.push_back(e.mat());
    effects.push_back(std::move(row));
  }

  Mat s;
  if (init.has_value()) {
    if (init->input_space().dim != dh || init->output_space().dim != dk) {
      throw std::invalid_argument("estimate_process: init dimension mismatch");
    }
    s = init->mat();
  } else {
    // Maximally depolarizing channel: unbiased and strictly positive.
    s = Mat::Identity(dh * dk, dh * dk) / static_cast<double>(dk);
  }

  ProcessMleReport report;
  double loglike = loglike_mats(freqs, effects, s, opts.prob_floor);
  report.loglike_trace.push_back(loglike);

  for (int n = 1; n <= opts.max_iters; ++n) {
    report.iterations = n;
    double damping = opts.damping;
    Mat candidate =
        step_mat(freqs, effects, s, dh, dk, damping, opts.prob_floor);
    double cand_loglike =
        loglike_mats(freqs, effects, candidate, opts.prob_floor);
    for (int k = 0; cand_loglike < loglike - kGuardSlack && k < kMaxBacktracks;
         ++k) {
      damping = damping < 0.5 ? 0.5 : 0.5 * (1.0 + damping);
      candidate =
          step_mat(freqs, effects, s, dh, dk, damping, opts.prob_floor);
      cand_loglike = loglike_mats(freqs, effects, candidate, opts.prob_floor);
    }

    const double gain = cand_loglike - loglike;
    const double movement = max_abs_mat(candidate - s);
    s = std::move(candidate);
    loglike = cand_loglike;
    report.loglike_trace.push_back(loglike);
    if (observer) {
      observer(ChoiOperator::unchecked(Operator(spaces, s)), n);
    }
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

}  // namespace qtomo
