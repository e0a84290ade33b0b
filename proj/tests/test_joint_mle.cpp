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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qtomo/joint_mle.hpp"
#include "qtomo/simkit.hpp"
#include "qtomo/state_mle.hpp"

using namespace qtomo;

namespace {

const std::vector<Axis> kAllAxes{Axis::x, Axis::y, Axis::z};

ChoiOperator test_channel() {
  return build_choi(ChannelSpec::mixture(
      0.5, ChannelSpec::depolarizing(),
      ChannelSpec::rotation(std::numbers::pi / 8)));
}

MleOptions tight_options() {
  MleOptions opts;
  opts.max_iters = 50000;
  opts.tol_loglike = 1e-15;
  opts.tol_fixedpoint = 1e-13;
  return opts;
}

}  // namespace

TEST_CASE("joint datasets canonicalize spaces and flag deficient inputs") {
  const ChoiOperator truth = test_channel();
  const JointSample sample =
      generate_joint_dataset(truth, 3, kAllAxes, kAllAxes, 100, {301, 0});
  CHECK(sample.dataset.n_probes() == 3);
  CHECK(sample.dataset.input_space().name == "H");
  CHECK(sample.dataset.output_space().name == "K");
  CHECK(sample.dataset.probe(0).input_povm.spaces()[0].name == "H");
  CHECK(sample.dataset.probe(0).output_povm.spaces()[0].name == "K");
  CHECK_FALSE(sample.dataset.input_span_deficient());

  const JointSample thin = generate_joint_dataset(
      truth, 3, {Axis::x, Axis::y}, kAllAxes, 100, {301, 1});
  CHECK(thin.dataset.input_span_deficient());
}

TEST_CASE("at exact data the probe kernel is twice the identity") {
  // With frequencies equal to probabilities both the input sum and the
  // channel pull-back of the output sum reduce to the identity on H.
  const ChoiOperator truth = test_channel();
  const JointSample sample = generate_joint_dataset(
      truth, 4, kAllAxes, kAllAxes, 400, {302, 0}, /*exact_frequencies=*/true);

  for (std::size_t m = 0; m < sample.dataset.n_probes(); ++m) {
    const Operator r =
        rm_kernel(sample.dataset, m, sample.true_probes[m], truth);
    CHECK((r.mat() - 2.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("the truth is a fixed point of the sweep on exact data") {
  const ChoiOperator truth = test_channel();
  const JointSample sample = generate_joint_dataset(
      truth, 3, kAllAxes, kAllAxes, 400, {303, 0}, /*exact_frequencies=*/true);

  const auto [probes, s] =
      joint_step(sample.dataset, sample.true_probes, truth);
  for (std::size_t m = 0; m < probes.size(); ++m) {
    CHECK(max_abs_mat(probes[m].mat() - sample.true_probes[m].mat()) < 1e-9);
  }
  CHECK(max_abs_mat(s.mat() - truth.mat()) < 1e-9);
}

TEST_CASE("an uninformative output measurement reduces to state estimation") {
  // With the trivial output POVM {identity} every output probability is one
  // for a trace-preserving channel: probes must converge to their standalone
  // estimates and the channel must stay at its depolarizing start.
  std::vector<JointProbeData> data;
  for (int m = 0; m < 2; ++m) {
    const DensityMatrix probe = random_mixed_state({304, (uint64_t)(m + 1)});
    JointProbeData d;
    d.input_povm = pauli_povm(kAllAxes);
    d.input_record = measure_pauli_axes(probe, kAllAxes, 300,
                                        {305, (uint64_t)m}, /*exact=*/false);
    d.output_povm = Povm({Operator::identity({{"K", 2}})});
    d.output_record = CountRecord{"", {900}, 900};
    data.push_back(std::move(d));
  }
  const JointDataset ds(std::move(data));

  const JointReport report = estimate_joint(ds, tight_options());
  CHECK(report.converged);
  for (std::size_t m = 0; m < 2; ++m) {
    const MleReport solo = estimate_state(
        StateDataset(ds.probe(m).input_povm, ds.probe(m).input_record),
        tight_options());
    CHECK(max_abs_mat(report.probe_estimates[m].mat() - solo.estimate.mat()) <
          1e-6);
  }
  CHECK(max_abs_mat(report.process_estimate.mat() -
                    0.5 * Mat::Identity(4, 4)) < 1e-9);
}

TEST_CASE("joint likelihood decomposes into input and output sums") {
  const ChoiOperator truth = test_channel();
  const JointSample sample =
      generate_joint_dataset(truth, 3, kAllAxes, kAllAxes, 150, {306, 0});
  const JointDataset& ds = sample.dataset;

  std::vector<DensityMatrix> probes;
  for (int m = 0; m < 3; ++m) {
    probes.push_back(random_mixed_state({306, (uint64_t)(m + 10)}));
  }
  const ChoiOperator s = build_choi(ChannelSpec::rotation(0.3));

  double manual = 0.0;
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    manual += log_likelihood(
        StateDataset(ds.probe(m).input_povm, ds.probe(m).input_record),
        probes[m]);
    const DensityMatrix out = apply_channel(s, probes[m]);
    const auto out_f = ds.probe(m).output_record.frequencies();
    for (std::size_t l = 0; l < out_f.size(); ++l) {
      if (out_f[l] <= 0.0) continue;
      manual +=
          out_f[l] *
          std::log(born_probability(out, ds.probe(m).output_povm.at(l)));
    }
  }
  CHECK(joint_log_likelihood(ds, probes, s) ==
        doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("the joint estimate dominates the sequential baseline") {
  const ChoiOperator truth = test_channel();
  const JointSample sample =
      generate_joint_dataset(truth, 3, kAllAxes, kAllAxes, 100, {307, 0});

  const JointReport seq = sequential_baseline(sample.dataset, tight_options());
  const JointReport warm = estimate_joint(
      sample.dataset, tight_options(),
      JointInit{seq.probe_estimates, seq.process_estimate});
  CHECK(warm.loglike >= seq.loglike - 1e-9);

  // Likelihood agreement between the two reporting paths.
  CHECK(joint_log_likelihood(sample.dataset, warm.probe_estimates,
                             warm.process_estimate) ==
        doctest::Approx(warm.loglike).epsilon(1e-10));
}

TEST_CASE("deficient input measurements are survivable for the joint solver") {
  const ChoiOperator truth = test_channel();
  for (uint64_t trial = 0; trial < 3; ++trial) {
    const JointSample sample = generate_joint_dataset(
        truth, 6, {Axis::x, Axis::y}, {Axis::y, Axis::z}, 100, {308, trial});
    REQUIRE(sample.dataset.input_span_deficient());

    const JointReport seq = sequential_baseline(sample.dataset);
    CHECK(seq.input_span_deficient);

    const JointReport joint = estimate_joint(sample.dataset);
    CHECK(joint.converged);
    CHECK(joint.input_span_deficient);

    const JointReport warm = estimate_joint(
        sample.dataset, MleOptions{},
        JointInit{seq.probe_estimates, seq.process_estimate});
    CHECK(warm.loglike >= seq.loglike - 1e-9);
  }
}

TEST_CASE("sweeps are observed in order and the trace is monotone") {
  const ChoiOperator truth = test_channel();
  const JointSample sample =
      generate_joint_dataset(truth, 2, kAllAxes, kAllAxes, 80, {309, 0});

  int sweeps = 0;
  const JointReport report = estimate_joint(
      sample.dataset, MleOptions{}, std::nullopt,
      [&](const std::vector<DensityMatrix>& probes, const ChoiOperator& s,
          int n) {
        ++sweeps;
        CHECK(n == sweeps);
        CHECK(probes.size() == 2);
        CHECK(s.op().dim() == 4);
      });
  CHECK(sweeps == report.iterations);
  REQUIRE(report.loglike_trace.size() ==
          static_cast<std::size_t>(report.iterations) + 1);
  for (std::size_t i = 1; i < report.loglike_trace.size(); ++i) {
    CHECK(report.loglike_trace[i] >= report.loglike_trace[i - 1] - 1e-12);
  }
  CHECK(report.loglike == doctest::Approx(report.loglike_trace.back()));

  // Physicality of the result.
  CHECK(report.process_estimate.tp_residual() < 1e-9);
  for (const auto& rho : report.probe_estimates) {
    CHECK(std::abs(rho.op().trace().real() - 1.0) < 1e-9);
  }
}

TEST_CASE("invalid joint inputs are rejected") {
  CHECK_THROWS_AS(JointDataset({}), std::invalid_argument);

  JointProbeData d;
  d.input_povm = pauli_povm(kAllAxes);
  d.input_record = CountRecord{"", {1, 1, 1, 1, 1, 1}, 6};
  d.output_povm = pauli_povm(kAllAxes, {"K", 2});
  d.output_record = CountRecord{"", {1, 1, 1}, 3};  // wrong outcome count
  CHECK_THROWS_AS(JointDataset({d}), std::invalid_argument);

  d.output_record = CountRecord{"", {1, 1, 1, 1, 1, 1}, 6};
  const JointDataset ds({d});
  MleOptions bad;
  bad.damping = 1.5;
  CHECK_THROWS_AS(estimate_joint(ds, bad), std::invalid_argument);

  CHECK_THROWS_AS(
      joint_log_likelihood(ds, {}, test_channel()), std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_joint(ds, MleOptions{}, JointInit{{}, test_channel()}),
      std::invalid_argument);
  CHECK_THROWS_AS(rm_kernel(ds, 5, DensityMatrix::maximally_mixed(
                                       SpaceLabel{"H", 2}),
                            test_channel()),
                  std::invalid_argument);
}
