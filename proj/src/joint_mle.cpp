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

#include "qtomo/joint_mle.hpp"

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
  return (a.transpose().cwiseProduct(b)).sum().real();
}

struct ProbeMats {
  std::vector<Mat> in_eff, out_eff;
  std::vector<double> in_f, out_f;
};

std::vector<ProbeMats> probe_mats(const JointDataset& ds) {
  std::vector<ProbeMats> out(ds.n_probes());
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    const auto& p = ds.probe(m);
    ProbeMats& pm = out[m];
    for (const auto& e : p.input_povm.elements()) pm.in_eff.push_back(e.mat());
    for (const auto& e : p.output_povm.elements())
      pm.out_eff.push_back(e.mat());
    pm.in_f = p.input_record.frequencies();
    pm.out_f = p.output_record.frequencies();
  }
  return out;
}

double in_loglike(const ProbeMats& pm, const Mat& rho, double floor) {
  double acc = 0.0;
  for (std::size_t k = 0; k < pm.in_f.size(); ++k) {
    if (pm.in_f[k] <= 0.0) continue;
    acc += pm.in_f[k] *
           std::log(std::max(trace_product(rho, pm.in_eff[k]), floor));
  }
  return acc;
}

double out_loglike(const ProbeMats& pm, const Mat& rho_out, double floor) {
  double acc = 0.0;
  for (std::size_t l = 0; l < pm.out_f.size(); ++l) {
    if (pm.out_f[l] <= 0.0) continue;
    acc += pm.out_f[l] *
           std::log(std::max(trace_product(rho_out, pm.out_eff[l]), floor));
  }
  return acc;
}

// Output-kernel weight operator W = sum_l (F_l / P_l) Pi_l for one probe.
Mat out_weight(const ProbeMats& pm, const Mat& rho_out, double floor) {
  Mat w = Mat::Zero(rho_out.rows(), rho_out.cols());
  for (std::size_t l = 0; l < pm.out_f.size(); ++l) {
    if (pm.out_f[l] <= 0.0) continue;
    const double p = trace_product(rho_out, pm.out_eff[l]);
    w += (pm.out_f[l] / std::max(p, floor)) * pm.out_eff[l];
  }
  return w;
}

Mat rm_kernel_mat(const ProbeMats& pm, const Mat& rho, const Mat& s,
                  Eigen::Index dh, Eigen::Index dk, double floor) {
  Mat r = Mat::Zero(dh, dh);
  for (std::size_t k = 0; k < pm.in_f.size(); ++k) {
    if (pm.in_f[k] <= 0.0) continue;
    const double p = trace_product(rho, pm.in_eff[k]);
    r += (pm.in_f[k] / std::max(p, floor)) * pm.in_eff[k];
  }
  const Mat rho_out = apply_choi_mat(s, rho, dh, dk);
  r += choi_back_mat(s, out_weight(pm, rho_out, floor), dh, dk);
  return hermitized_mat(r);
}

Mat probe_update(const ProbeMats& pm, const Mat& rho, const Mat& s,
                 Eigen::Index dh, Eigen::Index dk, double damping,
                 double floor) {
  const Mat r = rm_kernel_mat(pm, rho, s, dh, dk, floor);
  Mat next = r * rho * r;
  const double tr = next.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw std::runtime_error("joint probe update has nonpositive trace");
  }
  next = hermitized_mat(next / tr);
  if (damping > 0.0) {
    next = hermitized_mat((1.0 - damping) * next + damping * rho);
  }
  return next;
}

Mat tp_project(const Mat& s, Eigen::Index dh, Eigen::Index dk) {
  const Mat t = ptrace_at(s, {dh, dk}, 1);
  const Mat x =
      reg_inverse_mat(psd_sqrt_mat(hermitized_mat(t)), tol::lambda_floor);
  const Mat xi = kron(x, Mat::Identity(dk, dk));
  return hermitized_mat(xi * s * xi);
}

Mat process_update(const std::vector<ProbeMats>& pms,
                   const std::vector<Mat>& rhos, const Mat& s,
                   Eigen::Index dh, Eigen::Index dk, double damping,
                   double floor) {
  Mat k = Mat::Zero(dh * dk, dh * dk);
  for (std::size_t m = 0; m < pms.size(); ++m) {
    const Mat rho_out = apply_choi_mat(s, rhos[m], dh, dk);
    k += kron(rhos[m].transpose(), out_weight(pms[m], rho_out, floor));
  }
  k = hermitized_mat(k);
  const Mat ksk = hermitized_mat(k * s * k);
  const Mat lam_inv = reg_inverse_mat(
      psd_sqrt_mat(hermitized_mat(ptrace_at(ksk, {dh, dk}, 1))),
      tol::lambda_floor);
  const Mat li = kron(lam_inv, Mat::Identity(dk, dk));
  Mat next = tp_project(hermitized_mat(li * ksk * li), dh, dk);
  if (damping > 0.0) {
    next = hermitized_mat((1.0 - damping) * next + damping * s);
  }
  return next;
}

double total_loglike(const std::vector<ProbeMats>& pms,
                     const std::vector<Mat>& rhos, const Mat& s,
                     Eigen::Index dh, Eigen::Index dk, double floor) {
  double acc = 0.0;
  for (std::size_t m = 0; m < pms.size(); ++m) {
    acc += in_loglike(pms[m], rhos[m], floor);
    acc += out_loglike(pms[m], apply_choi_mat(s, rhos[m], dh, dk), floor);
  }
  return acc;
}

}  // namespace

JointDataset::JointDataset(std::vector<JointProbeData> probes)
    : probes_(std::move(probes)) {
  if (probes_.empty()) {
    throw std::invalid_argument("JointDataset: no probes");
  }
  Eigen::Index dh = 0, dk = 0;
  for (std::size_t m = 0; m < probes_.size(); ++m) {
    auto& p = probes_[m];
    if (p.input_povm.spaces().size() != 1 ||
        p.output_povm.spaces().size() != 1) {
      throw std::invalid_argument("JointDataset: probe " + std::to_string(m) +
                                  " POVMs must live on a single space");
    }
    p.input_record.validate();
    p.output_record.validate();
    if (p.input_record.counts.size() != p.input_povm.size() ||
        p.output_record.counts.size() != p.output_povm.size()) {
      throw std::invalid_argument("JointDataset: probe " + std::to_string(m) +
                                  " records do not match its POVMs");
    }
    if (m == 0) {
      dh = p.input_povm.dim();
      dk = p.output_povm.dim();
    } else if (p.input_povm.dim() != dh || p.output_povm.dim() != dk) {
      throw std::invalid_argument(
          "JointDataset: probes disagree on space dimensions");
    }
    p.input_povm = p.input_povm.renamed({"H"});
    p.output_povm = p.output_povm.renamed({"K"});
    if (!is_tomographically_complete(p.input_povm)) {
      input_span_deficient_ = true;
    }
  }
  input_space_ = SpaceLabel{"H", dh};
  output_space_ = SpaceLabel{"K", dk};
}

double joint_log_likelihood(const JointDataset& ds,
                            const std::vector<DensityMatrix>& probes,
                            const ChoiOperator& s, double floor) {
  if (probes.size() != ds.n_probes()) {
    throw std::invalid_argument("joint_log_likelihood: probe count mismatch");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  const auto pms = probe_mats(ds);
  std::vector<Mat> rhos;
  for (const auto& r : probes) {
    if (r.dim() != dh) {
      throw std::invalid_argument(
          "joint_log_likelihood: probe dimension mismatch");
    }
    rhos.push_back(r.mat());
  }
  return total_loglike(pms, rhos, s.mat(), dh, dk, floor);
}

Operator rm_kernel(const JointDataset& ds, std::size_t m,
                   const DensityMatrix& rho_m, const ChoiOperator& s,
                   double floor) {
  if (m >= ds.n_probes()) {
    throw std::invalid_argument("rm_kernel: probe index out of range");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  if (rho_m.dim() != dh || s.input_space().dim != dh ||
      s.output_space().dim != dk) {
    throw std::invalid_argument("rm_kernel: dimension mismatch");
  }
  const auto pms = probe_mats(ds);
  return Operator({ds.input_space()},
                  rm_kernel_mat(pms[m], rho_m.mat(), s.mat(), dh, dk, floor));
}

std::pair<std::vector<DensityMatrix>, ChoiOperator> joint_step(
    const JointDataset& ds, const std::vector<DensityMatrix>& probes,
    const ChoiOperator& s, double damping, double floor) {
  if (probes.size() != ds.n_probes()) {
    throw std::invalid_argument("joint_step: probe count mismatch");
  }
  if (damping < 0.0 || damping >= 1.0) {
    throw std::invalid_argument("joint_step: damping must lie in [0, 1)");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  const auto pms = probe_mats(ds);

  std::vector<Mat> rhos;
  for (const auto& r : probes) rhos.push_back(r.mat());
  const Mat& sm = s.mat();
  for (std::size_t m = 0; m < rhos.size(); ++m) {
    rhos[m] = probe_update(pms[m], rhos[m], sm, dh, dk, damping, floor);
  }
  Mat s_next = process_update(pms, rhos, sm, dh, dk, damping, floor);

  std::vector<DensityMatrix> out_probes;
  for (auto& r : rhos) {
    out_probes.push_back(DensityMatrix::unchecked(
        Operator({ds.input_space()}, std::move(r))));
  }
  return {std::move(out_probes),
          ChoiOperator::unchecked(Operator(
              {ds.input_space(), ds.output_space()}, std::move(s_next)))};
}

JointReport estimate_joint(const JointDataset& ds, const MleOptions& opts,
                           std::optional<JointInit> init,
                           const JointObserver& observer) {
  if (opts.damping < 0.0 || opts.damping >= 1.0) {
    throw std::invalid_argument("estimate_joint: damping must lie in [0, 1)");
  }
  const Eigen::Index dh = ds.input_space().dim;
  const Eigen::Index dk = ds.output_space().dim;
  const auto pms = probe_mats(ds);

  std::vector<Mat> rhos(ds.n_probes());
  Mat s;
  if (init.has_value()) {
    if (init->probes.size() != ds.n_probes()) {
      throw std::invalid_argument("estimate_joint: init probe count mismatch");
    }
    for (std::size_t m = 0; m < rhos.size(); ++m) {
      if (init->probes[m].dim() != dh) {
        throw std::invalid_argument(
            "estimate_joint: init probe dimension mismatch");
      }
      rhos[m] = init->probes[m].mat();
    }
    if (init->process.input_space().dim != dh ||
        init->process.output_space().dim != dk) {
      throw std::invalid_argument(
          "estimate_joint: init process dimension mismatch");
    }
    s = init->process.mat();
  } else {
    for (auto& r : rhos) {
      r = Mat::Identity(dh, dh) / static_cast<double>(dh);
    }
    s = Mat::Identity(dh * dk, dh * dk) / static_cast<double>(dk);
  }

  JointReport report;
  report.input_span_deficient = ds.input_span_deficient();
  double loglike = total_loglike(pms, rhos, s, dh, dk, opts.prob_floor);
  report.loglike_trace.push_back(loglike);

  for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
    report.iterations = sweep;
    double movement = 0.0;

    // Probe updates, each guarded by its own likelihood terms (the only
    // ones that depend on it).
    for (std::size_t m = 0; m < rhos.size(); ++m) {
      const double before =
          in_loglike(pms[m], rhos[m], opts.prob_floor) +
          out_loglike(pms[m], apply_choi_mat(s, rhos[m], dh, dk),
                      opts.prob_floor);
      double damping = opts.damping;
      Mat cand =
          probe_update(pms[m], rhos[m], s, dh, dk, damping, opts.prob_floor);
      double after =
          in_loglike(pms[m], cand, opts.prob_floor) +
          out_loglike(pms[m], apply_choi_mat(s, cand, dh, dk),
                      opts.prob_floor);
      for (int k = 0; after < before - kGuardSlack && k < kMaxBacktracks;
           ++k) {
        damping = damping < 0.5 ? 0.5 : 0.5 * (1.0 + damping);
        cand = probe_update(pms[m], rhos[m], s, dh, dk, damping,
                            opts.prob_floor);
        after = in_loglike(pms[m], cand, opts.prob_floor) +
                out_loglike(pms[m], apply_choi_mat(s, cand, dh, dk),
                            opts.prob_floor);
      }
      movement = std::max(movement, max_abs_mat(cand - rhos[m]));
      rhos[m] = std::move(cand);
    }

    // Channel update from the refreshed probes, guarded by the output terms.
    {
      double before = 0.0;
      for (std::size_t m = 0; m < rhos.size(); ++m) {
        before += out_loglike(pms[m], apply_choi_mat(s, rhos[m], dh, dk),
                              opts.prob_floor);
      }
      double damping = opts.damping;
      Mat cand =
          process_update(pms, rhos, s, dh, dk, damping, opts.prob_floor);
      auto out_total = [&](const Mat& sc) {
        double acc = 0.0;
        for (std::size_t m = 0; m < rhos.size(); ++m) {
          acc += out_loglike(pms[m], apply_choi_mat(sc, rhos[m], dh, dk),
                             opts.prob_floor);
        }
        return acc;
      };
      double after = out_total(cand);
      for (int k = 0; after < before - kGuardSlack && k < kMaxBacktracks;
           ++k) {
        damping = damping < 0.5 ? 0.5 : 0.5 * (1.0 + damping);
        cand = process_update(pms, rhos, s, dh, dk, damping, opts.prob_floor);
        after = out_total(cand);
      }
      movement = std::max(movement, max_abs_mat(cand - s));
      s = std::move(cand);
    }

    const double next_loglike =
        total_loglike(pms, rhos, s, dh, dk, opts.prob_floor);
    const double gain = next_loglike - loglike;
    loglike = next_loglike;
    report.loglike_trace.push_back(loglike);

    if (observer) {
      std::vector<DensityMatrix> snap;
      for (const auto& r : rhos) {
        snap.push_back(
            DensityMatrix::unchecked(Operator({ds.input_space()}, r)));
      }
      observer(snap,
               ChoiOperator::unchecked(
                   Operator({ds.input_space(), ds.output_space()}, s)),
               sweep);
    }
    if (std::abs(gain) < opts.tol_loglike ||
        movement < opts.tol_fixedpoint) {
      report.converged = true;
      break;
    }
  }

  for (auto& r : rhos) {
    report.probe_estimates.push_back(
        DensityMatrix::unchecked(Operator({ds.input_space()}, std::move(r))));
  }
  report.process_estimate = ChoiOperator::unchecked(
      Operator({ds.input_space(), ds.output_space()}, std::move(s)));
  report.loglike = loglike;
  return report;
}

JointReport sequential_baseline(const JointDataset& ds,
                                const MleOptions& opts) {
  JointReport report;
  report.input_span_deficient = ds.input_span_deficient();

  int iterations = 0;
  bool converged = true;
  std::vector<ProbeSpec> probe_specs;
  std::vector<Povm> povms;
  std::vector<CountRecord> records;
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    const auto& p = ds.probe(m);
    MleReport state_report =
        estimate_state(StateDataset(p.input_povm, p.input_record), opts);
    iterations += state_report.iterations;
    converged = converged && state_report.converged;
    report.probe_estimates.push_back(state_report.estimate);
    probe_specs.push_back(ProbeSpec::separable(state_report.estimate));
    povms.push_back(p.output_povm);
    records.push_back(p.output_record);
  }

  ProcessMleReport process_report = estimate_process(
      ProcessDataset(std::move(probe_specs), std::move(povms),
                     std::move(records)),
      opts);
  iterations += process_report.iterations;
  converged = converged && process_report.converged;

  report.process_estimate = process_report.estimate;
  report.loglike = joint_log_likelihood(ds, report.probe_estimates,
                                        report.process_estimate,
                                        opts.prob_floor);
  report.iterations = iterations;
  report.converged = converged;
  report.loglike_trace.push_back(report.loglike);
  return report;
}

}  // namespace qtomo
