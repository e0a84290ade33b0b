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

#include "qtomo/process_mle.hpp"
#include "qtomo/simkit.hpp"

using namespace qtomo;

namespace {

const std::vector<Axis> kAllAxes{Axis::x, Axis::y, Axis::z};

ChoiOperator test_channel() {
  return build_choi(ChannelSpec::mixture(
      0.5, ChannelSpec::depolarizing(),
      ChannelSpec::rotation(std::numbers::pi / 8)));
}

ProcessDataset exact_eigenprobe_dataset(const ChoiOperator& s) {
  return generate_process_dataset(s, pauli_eigenstates(), kAllAxes, 1000,
                                  {0, 0}, /*exact_frequencies=*/true);
}

double trace_with(const ChoiOperator& s, const Operator& effect) {
  return (s.mat().transpose().cwiseProduct(effect.mat())).sum().real();
}

MleOptions tight_options() {
  MleOptions opts;
  opts.max_iters = 50000;
  opts.tol_loglike = 1e-15;
  opts.tol_fixedpoint = 1e-13;
  return opts;
}

double min_eigenvalue(const Mat& a) {
  return herm_eig_mat(hermitized_mat(a)).values.minCoeff();
}

}  // namespace

TEST_CASE("separable probe effects are transposed-probe tensor element") {
  const DensityMatrix probe = pauli_eigenstate(Axis::z, +1);
  const Povm povm = pauli_povm({Axis::x}, {"K", 2});
  const CountRecord record{"", {1, 1}, 2};
  const ProcessDataset ds({ProbeSpec::separable(probe)}, {povm}, {record});

  // probe = |0><0| so the transposed probe selects the (h=0, h'=0) block,
  // which must equal the POVM element (1 + sigma_x)/2.
  const Mat g = ds.probe_effects(0)[0].mat();
  REQUIRE(g.rows() == 4);
  Mat expect_block(2, 2);
  expect_block << 0.5, 0.5, 0.5, 0.5;
  CHECK(max_abs_mat(g.block(0, 0, 2, 2) - expect_block) < 1e-14);
  CHECK(max_abs_mat(g.block(2, 0, 2, 4)) < 1e-14);
  CHECK(max_abs_mat(g.block(0, 2, 2, 2)) < 1e-14);

  // Effects reproduce the forward probabilities for any channel.
  const ChoiOperator s = test_channel();
  const DensityMatrix out = apply_channel(s, probe);
  for (std::size_t l = 0; l < povm.size(); ++l) {
    CHECK(trace_with(s, ds.probe_effects(0)[l]) ==
          doctest::Approx(born_probability(out, povm.at(l))).epsilon(1e-12));
  }
}

TEST_CASE("at exact data the kernel and multiplier are scalar matrices") {
  // The six Pauli eigenstates sum to 3 * identity, so with per-outcome
  // frequency ratios f/p = 1 the kernel collapses to 3 * identity on (H, K)
  // and the multiplier does too.
  const ChoiOperator truth = test_channel();
  const ProcessDataset ds = exact_eigenprobe_dataset(truth);

  const Operator k = k_kernel(ds, truth);
  CHECK((k.mat() - 3.0 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);

  const Operator lam = lambda_multiplier(k, truth);
  CHECK((lam.mat() - 3.0 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-8);

  const ChoiOperator next = process_step(ds, truth);
  CHECK(max_abs_mat(next.mat() - truth.mat()) < 1e-10);
}

TEST_CASE("process step matches its literal composition") {
  const ChoiOperator truth = test_channel();
  const ProcessDataset ds = generate_process_dataset(
      truth, pauli_eigenstates(), kAllAxes, 200, {42, 0},
      /*exact_frequencies=*/false);

  const Mat s = truth.mat();
  const Mat k = k_kernel(ds, truth).mat();
  const Mat id2 = Mat::Identity(2, 2);

  const Mat ksk = hermitized_mat(k * s * k);
  const Mat lam_inv = reg_inverse_mat(
      psd_sqrt_mat(hermitized_mat(ptrace_at(ksk, {2, 2}, 1))),
      tol::lambda_floor);
  const Mat mid = hermitized_mat(kron(lam_inv, id2) * ksk *
                                 kron(lam_inv, id2));
  const Mat t_inv = reg_inverse_mat(
      psd_sqrt_mat(hermitized_mat(ptrace_at(mid, {2, 2}, 1))),
      tol::lambda_floor);
  const Mat expect =
      hermitized_mat(kron(t_inv, id2) * mid * kron(t_inv, id2));

  const ChoiOperator stepped = process_step(ds, truth);
  CHECK(max_abs_mat(stepped.mat() - expect) < 1e-12);
  // The multiplier sandwich already lands on a trace-preserving operator.
  CHECK(stepped.tp_residual() < 1e-9);
}

TEST_CASE("noiseless data recovers the channel") {
  const ChoiOperator truth = test_channel();
  const ProcessDataset ds = exact_eigenprobe_dataset(truth);
  const ProcessMleReport report = estimate_process(ds, tight_options());
  CHECK(report.converged);
  CHECK(max_abs_mat(report.estimate.mat() - truth.mat()) < 1e-6);
  CHECK(report.tp_residual < 1e-9);
}

TEST_CASE("sampled data yields a monotone run and a physical estimate") {
  const ChoiOperator truth = test_channel();
  const ProcessDataset ds = generate_process_dataset(
      truth, pauli_eigenstates(), kAllAxes, 100, {43, 0},
      /*exact_frequencies=*/false);

  int observed = 0;
  const ProcessMleReport report = estimate_process(
      ds, MleOptions{}, std::nullopt,
      [&](const ChoiOperator&, int n) {
        ++observed;
        CHECK(n == observed);
      });
  CHECK(observed == report.iterations);
  REQUIRE(report.loglike_trace.size() ==
          static_cast<std::size_t>(report.iterations) + 1);
  for (std::size_t i = 1; i < report.loglike_trace.size(); ++i) {
    CHECK(report.loglike_trace[i] >= report.loglike_trace[i - 1] - 1e-12);
  }
  CHECK(report.tp_residual < 1e-9);
  CHECK(min_eigenvalue(report.estimate.mat()) > -1e-8);
}

TEST_CASE("an entangled probe reproduces the ancilla-assisted statistics") {
  // Maximally entangled probe on (H, B), joint Pauli product measurement on
  // (K, B) after the channel acts on the H half.
  Mat phi = Mat::Zero(4, 4);
  phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
  const DensityMatrix pair(Operator({{"H", 2}, {"B", 2}}, phi));

  std::vector<Operator> elems;
  const Povm pk = pauli_povm(kAllAxes, {"K", 2});
  const Povm pb = pauli_povm(kAllAxes, {"B", 2});
  for (std::size_t i = 0; i < pk.size(); ++i) {
    for (std::size_t j = 0; j < pb.size(); ++j) {
      elems.push_back(tensor(pk.at(i), pb.at(j)));
    }
  }
  const Povm joint(elems);

  const ChoiOperator truth = test_channel();
  const DensityMatrix out = apply_channel_with_ancilla(truth, pair);
  const CountRecord record = exact_counts(out, joint, 10000, "pair");
  const ProcessDataset ds({ProbeSpec::entangled(pair)}, {joint}, {record});

  double psum = 0.0;
  for (std::size_t l = 0; l < joint.size(); ++l) {
    const double via_effect = trace_with(truth, ds.probe_effects(0)[l]);
    const double via_forward = born_probability(out, joint.at(l));
    CHECK(std::abs(via_effect - via_forward) < 1e-12);
    psum += via_effect;
  }
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-10));

  // One maximally entangled probe with an informationally complete joint
  // measurement pins down the channel.
  const ProcessMleReport report = estimate_process(ds, tight_options());
  CHECK(report.converged);
  CHECK(max_abs_mat(report.estimate.mat() - truth.mat()) < 1e-6);
}

TEST_CASE("a product probe in entangled form reduces to the separable case") {
  const DensityMatrix rho_h = bloch_state(0.2, -0.1, 0.3, {"H", 2});
  const DensityMatrix sigma_b = bloch_state(-0.4, 0.5, 0.1, {"B", 2});
  const DensityMatrix product(tensor(rho_h.op(), sigma_b.op()));

  const Povm pk = pauli_povm(kAllAxes, {"K", 2});
  std::vector<Operator> lifted;
  for (std::size_t i = 0; i < pk.size(); ++i) {
    lifted.push_back(tensor(pk.at(i), Operator::identity({{"B", 2}})));
  }
  const Povm povm_kb(lifted);
  const CountRecord record{"", std::vector<double>(pk.size(), 1.0),
                           static_cast<double>(pk.size())};

  const ProcessDataset entangled({ProbeSpec::entangled(product)}, {povm_kb},
                                 {record});
  const ProcessDataset separable({ProbeSpec::separable(rho_h)}, {pk},
                                 {record});

  for (std::size_t l = 0; l < pk.size(); ++l) {
    CHECK(max_abs_mat(entangled.probe_effects(0)[l].mat() -
                      separable.probe_effects(0)[l].mat()) < 1e-12);
  }
}

TEST_CASE("rectangular channels are recovered from complete data") {
  // Channel from a qubit into a qutrit: an isometry mixed with full
  // depolarizing noise.
  StreamRng rng({201, 0});
  Mat g(3, 3);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      g(r, c) = Complex(rng.gaussian(), rng.gaussian());
    }
  }
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
  const Mat v = q.block(0, 0, 3, 2);  // isometry C^2 -> C^3

  Eigen::VectorXcd vec(6);
  for (Eigen::Index h = 0; h < 2; ++h) {
    for (Eigen::Index k = 0; k < 3; ++k) {
      vec(h * 3 + k) = v(k, h);
    }
  }
  const Mat s_iso = vec * vec.adjoint();
  const Mat s_mix = 0.5 * s_iso + 0.5 * Mat::Identity(6, 6) / 3.0;
  const ChoiOperator truth(Operator({{"H", 2}, {"K", 3}}, s_mix));

  // An informationally complete twelve-outcome POVM on the qutrit: four
  // projective bases (computational, Fourier, two random unitaries) at
  // weight 1/4 each. Measuring whole bases keeps the frame well
  // conditioned, which a pile of random rank-1 elements does not.
  std::vector<Mat> bases;
  bases.push_back(Mat::Identity(3, 3));
  Mat fourier(3, 3);
  const double w = 2.0 * std::numbers::pi / 3.0;
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      fourier(r, c) = Complex(std::cos(w * static_cast<double>(r * c)),
                              std::sin(w * static_cast<double>(r * c))) /
                      std::sqrt(3.0);
    }
  }
  bases.push_back(fourier);
  for (int b = 0; b < 2; ++b) {
    Mat gb(3, 3);
    for (Eigen::Index r = 0; r < 3; ++r) {
      for (Eigen::Index c = 0; c < 3; ++c) {
        gb(r, c) = Complex(rng.gaussian(), rng.gaussian());
      }
    }
    bases.push_back(Mat(Eigen::HouseholderQR<Mat>(gb).householderQ()));
  }
  std::vector<Operator> elems;
  for (const Mat& u : bases) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      const Eigen::VectorXcd col = u.col(c);
      elems.push_back(Operator(
          {{"K", 3}}, hermitized_mat(0.25 * (col * col.adjoint()))));
    }
  }
  const Povm povm12(elems);
  REQUIRE(is_tomographically_complete(povm12));

  std::vector<ProbeSpec> probes;
  std::vector<Povm> povms;
  std::vector<CountRecord> records;
  for (const DensityMatrix& probe : pauli_eigenstates()) {
    probes.push_back(ProbeSpec::separable(probe));
    povms.push_back(povm12);
    records.push_back(
        exact_counts(apply_channel(truth, probe), povm12, 10000, ""));
  }
  const ProcessDataset ds(probes, povms, records);
  CHECK(ds.input_space().dim == 2);
  CHECK(ds.output_space().dim == 3);

  // Recovery to 1e-6 needs the movement criterion to drive termination;
  // likelihood gains underflow a little earlier.
  MleOptions opts = tight_options();
  opts.tol_loglike = 0.0;
  const ProcessMleReport report = estimate_process(ds, opts);
  CHECK(report.converged);
  CHECK(max_abs_mat(report.estimate.mat() - truth.mat()) < 1e-6);
  CHECK(report.tp_residual < 1e-9);
}

TEST_CASE("invalid process datasets are rejected") {
  const DensityMatrix probe = pauli_eigenstate(Axis::z, +1);
  const Povm povm = pauli_povm(kAllAxes, {"K", 2});
  const CountRecord record{"", {1, 1, 1, 1, 1, 1}, 6};

  CHECK_THROWS_AS(ProcessDataset({}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      ProcessDataset({ProbeSpec::separable(probe)}, {povm, povm}, {record}),
      std::invalid_argument);
  CHECK_THROWS_AS(ProcessDataset({ProbeSpec::separable(probe)}, {povm},
                                 {CountRecord{"", {1, 1}, 2}}),
                  std::invalid_argument);

  // Probes disagreeing on the channel dimensions.
  const DensityMatrix qutrit =
      DensityMatrix::maximally_mixed(SpaceLabel{"H", 3});
  CHECK_THROWS_AS(
      ProcessDataset(
          {ProbeSpec::separable(probe), ProbeSpec::separable(qutrit)},
          {povm, povm}, {record, record}),
      std::invalid_argument);

  // Kind/space mismatches.
  CHECK_THROWS_AS(ProbeSpec::entangled(probe), std::invalid_argument);
  Mat phi = Mat::Zero(4, 4);
  phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
  const DensityMatrix pair(Operator({{"H", 2}, {"B", 2}}, phi));
  CHECK_THROWS_AS(ProbeSpec::separable(pair), std::invalid_argument);
  CHECK_THROWS_AS(
      ProcessDataset({ProbeSpec::entangled(pair)}, {povm}, {record}),
      std::invalid_argument);

  const ProcessDataset ds({ProbeSpec::separable(probe)}, {povm}, {record});
  MleOptions bad;
  bad.damping = -0.1;
  CHECK_THROWS_AS(estimate_process(ds, bad), std::invalid_argument);
  CHECK_THROWS_AS(
      lambda_multiplier(Operator::identity({{"X", 4}}), test_channel()),
      std::invalid_argument);
}
