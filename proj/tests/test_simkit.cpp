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

#include "qtomo/simkit.hpp"

using namespace qtomo;

namespace {

const std::vector<Axis> kAllAxes{Axis::x, Axis::y, Axis::z};

}  // namespace

TEST_CASE("axis names round trip") {
  for (Axis a : kAllAxes) {
    CHECK(axis_from_name(axis_name(a)) == a);
  }
  CHECK_THROWS_AS(axis_from_name("w"), std::invalid_argument);
}

TEST_CASE("bloch states have the right spectrum and moments") {
  const DensityMatrix rho = bloch_state(0.3, -0.4, 0.5);
  CHECK(std::abs(rho.op().trace() - Complex(1, 0)) < 1e-14);
  CHECK((rho.mat() * sigma_x()).trace().real() ==
        doctest::Approx(0.3).epsilon(1e-12));
  CHECK((rho.mat() * sigma_y()).trace().real() ==
        doctest::Approx(-0.4).epsilon(1e-12));
  CHECK((rho.mat() * sigma_z()).trace().real() ==
        doctest::Approx(0.5).epsilon(1e-12));

  const double r = std::sqrt(0.09 + 0.16 + 0.25);
  const HermEig eig = herm_eig(rho.op());
  CHECK(eig.values[0] == doctest::Approx(0.5 * (1 - r)).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(0.5 * (1 + r)).epsilon(1e-12));

  CHECK_THROWS_AS(bloch_state(1.0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("pauli eigenstates are eigenstates in the documented order") {
  const auto states = pauli_eigenstates();
  REQUIRE(states.size() == 6);
  const Axis axes[6] = {Axis::x, Axis::x, Axis::y, Axis::y, Axis::z, Axis::z};
  const double signs[6] = {1, -1, 1, -1, 1, -1};
  for (int i = 0; i < 6; ++i) {
    const Mat sigma = pauli_mat(axes[i]);
    CHECK(max_abs_mat(sigma * states[i].mat() - signs[i] * states[i].mat()) <
          1e-12);
    CHECK(std::abs(states[i].op().trace() - Complex(1, 0)) < 1e-14);
  }
}

TEST_CASE("pauli povm elements sum to the identity under any axis choice") {
  for (const auto& axes : std::vector<std::vector<Axis>>{
           {Axis::z}, {Axis::x, Axis::y}, kAllAxes}) {
    const Povm povm = pauli_povm(axes);
    REQUIRE(povm.size() == 2 * axes.size());
    Mat sum = Mat::Zero(2, 2);
    for (const auto& e : povm.elements()) sum += e.mat();
    CHECK(max_abs_mat(sum - Mat::Identity(2, 2)) < 1e-12);
  }
  CHECK_THROWS_AS(pauli_povm({}), std::invalid_argument);
}

TEST_CASE("built choi operators match their closed forms") {
  const Mat id_choi = build_choi(ChannelSpec::identity_channel()).mat();
  Mat expect_id = Mat::Zero(4, 4);
  expect_id(0, 0) = expect_id(0, 3) = expect_id(3, 0) = expect_id(3, 3) = 1.0;
  CHECK(max_abs_mat(id_choi - expect_id) < 1e-14);

  const Mat dep_choi = build_choi(ChannelSpec::depolarizing()).mat();
  CHECK(max_abs_mat(dep_choi - 0.5 * Mat::Identity(4, 4)) < 1e-14);

  const double theta = 0.3;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::VectorXcd v(4);
  v << c, s, -s, c;  // column-then-row layout of the rotation matrix
  const Mat rot_choi = build_choi(ChannelSpec::rotation(theta)).mat();
  CHECK(max_abs_mat(rot_choi - Mat(v * v.adjoint())) < 1e-13);

  const Mat mix_choi =
      build_choi(ChannelSpec::mixture(0.25, ChannelSpec::depolarizing(),
                                      ChannelSpec::rotation(theta)))
          .mat();
  CHECK(max_abs_mat(mix_choi - (0.25 * dep_choi + 0.75 * rot_choi)) < 1e-13);

  CHECK_THROWS_AS(build_choi(ChannelSpec::rotation(0.1), 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(ChannelSpec::mixture(1.5, ChannelSpec::depolarizing(),
                                       ChannelSpec::depolarizing()),
                  std::invalid_argument);
}

TEST_CASE("random mixed states are deterministic, unit-trace and full rank") {
  const DensityMatrix a = random_mixed_state({7, 3});
  const DensityMatrix b = random_mixed_state({7, 3});
  const DensityMatrix c = random_mixed_state({7, 4});
  CHECK(max_abs_mat(a.mat() - b.mat()) == 0.0);
  CHECK(max_abs_mat(a.mat() - c.mat()) > 1e-3);
  CHECK(std::abs(a.op().trace() - Complex(1, 0)) < 1e-12);
  CHECK(herm_eig(a.op()).values.minCoeff() > 0.0);

  const DensityMatrix big = random_mixed_state({7, 5}, 3, {"H", 3});
  CHECK(big.dim() == 3);
  CHECK(std::abs(big.op().trace() - Complex(1, 0)) < 1e-12);
}

TEST_CASE("sampled counts are reproducible and track the probabilities") {
  const DensityMatrix rho = bloch_state(0.2, 0.1, -0.6);
  const Povm povm = pauli_povm(kAllAxes);
  const std::int64_t n = 100000;
  const CountRecord rec = sample_counts(rho, povm, n, {8, 1}, "big");
  CHECK(rec.setting == "big");
  CHECK(rec.total == doctest::Approx((double)n));
  double total = 0.0;
  for (std::size_t l = 0; l < povm.size(); ++l) {
    const double p = born_probability(rho, povm.at(l));
    const double se = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(rec.counts[l] - n * p) < 5 * se);
    total += rec.counts[l];
  }
  CHECK(total == doctest::Approx((double)n));

  const CountRecord again = sample_counts(rho, povm, n, {8, 1}, "big");
  for (std::size_t l = 0; l < povm.size(); ++l) {
    CHECK(rec.counts[l] == again.counts[l]);
  }
}

TEST_CASE("exact counts equal shots times probabilities") {
  const DensityMatrix rho = bloch_state(-0.3, 0.5, 0.1);
  const Povm povm = pauli_povm(kAllAxes);
  const CountRecord rec = exact_counts(rho, povm, 600, "exact");
  for (std::size_t l = 0; l < povm.size(); ++l) {
    CHECK(rec.counts[l] ==
          doctest::Approx(600 * born_probability(rho, povm.at(l)))
              .epsilon(1e-12));
  }
  rec.validate();
}

TEST_CASE("per-axis measurement fixes the per-axis totals") {
  const DensityMatrix rho = bloch_state(0.4, -0.2, 0.3);
  const CountRecord rec =
      measure_pauli_axes(rho, kAllAxes, 500, {9, 1}, /*exact=*/false);
  REQUIRE(rec.counts.size() == 6);
  CHECK(rec.total == doctest::Approx(1500.0));
  for (int a = 0; a < 3; ++a) {
    CHECK(rec.counts[2 * a] + rec.counts[2 * a + 1] ==
          doctest::Approx(500.0));
  }

  // Exact mode reproduces the marginal probabilities per axis.
  const CountRecord ex =
      measure_pauli_axes(rho, kAllAxes, 500, {9, 2}, /*exact=*/true);
  const double bloch[3] = {0.4, -0.2, 0.3};
  for (int a = 0; a < 3; ++a) {
    CHECK(ex.counts[2 * a] ==
          doctest::Approx(500 * 0.5 * (1 + bloch[a])).epsilon(1e-12));
  }

  // The record aligns with the shared-axes POVM: frequencies match the
  // Born probabilities of pauli_povm.
  const Povm povm = pauli_povm(kAllAxes);
  const auto freqs = ex.frequencies();
  for (std::size_t l = 0; l < povm.size(); ++l) {
    CHECK(freqs[l] ==
          doctest::Approx(born_probability(rho, povm.at(l))).epsilon(1e-12));
  }
}

TEST_CASE("process dataset generation is exact-mode consistent") {
  const ChoiOperator truth = build_choi(ChannelSpec::mixture(
      0.5, ChannelSpec::depolarizing(),
      ChannelSpec::rotation(std::numbers::pi / 8)));
  const auto probes = pauli_eigenstates();
  const ProcessDataset ds = generate_process_dataset(
      truth, probes, kAllAxes, 400, {10, 1}, /*exact_frequencies=*/true);

  REQUIRE(ds.n_probes() == probes.size());
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    CHECK(ds.records()[m].setting == "probe" + std::to_string(m));
    const auto freqs = ds.probe_frequencies(m);
    for (std::size_t l = 0; l < freqs.size(); ++l) {
      const double p =
          process_probability(truth, probes[m], ds.povms()[m].at(l));
      CHECK(std::abs(freqs[l] - p) < 1e-12);
    }
  }
}

TEST_CASE("process dataset sampling is deterministic in the seed") {
  const ChoiOperator truth = build_choi(ChannelSpec::rotation(0.4));
  const auto probes = pauli_eigenstates();
  const ProcessDataset a =
      generate_process_dataset(truth, probes, kAllAxes, 200, {11, 1});
  const ProcessDataset b =
      generate_process_dataset(truth, probes, kAllAxes, 200, {11, 1});
  const ProcessDataset c =
      generate_process_dataset(truth, probes, kAllAxes, 200, {11, 2});
  bool all_equal = true;
  bool any_diff = false;
  for (std::size_t m = 0; m < a.n_probes(); ++m) {
    for (std::size_t l = 0; l < a.records()[m].counts.size(); ++l) {
      all_equal = all_equal &&
                  a.records()[m].counts[l] == b.records()[m].counts[l];
      any_diff = any_diff ||
                 a.records()[m].counts[l] != c.records()[m].counts[l];
    }
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("joint dataset generation carries its ground truth") {
  const ChoiOperator truth = build_choi(ChannelSpec::rotation(0.2));
  const JointSample sample =
      generate_joint_dataset(truth, 4, kAllAxes, kAllAxes, 250, {12, 1});
  REQUIRE(sample.true_probes.size() == 4);
  CHECK(sample.dataset.n_probes() == 4);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(std::abs(sample.true_probes[m].op().trace() - Complex(1, 0)) <
          1e-12);
    CHECK(sample.dataset.probe(m).input_record.setting ==
          "probe" + std::to_string(m) + "/in");
    CHECK(sample.dataset.probe(m).output_record.setting ==
          "probe" + std::to_string(m) + "/out");
    CHECK(sample.dataset.probe(m).input_record.total ==
          doctest::Approx(750.0));
  }

  const JointSample again =
      generate_joint_dataset(truth, 4, kAllAxes, kAllAxes, 250, {12, 1});
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(max_abs_mat(sample.true_probes[m].mat() -
                      again.true_probes[m].mat()) == 0.0);
    for (std::size_t l = 0;
         l < sample.dataset.probe(m).input_record.counts.size(); ++l) {
      CHECK(sample.dataset.probe(m).input_record.counts[l] ==
            again.dataset.probe(m).input_record.counts[l]);
    }
  }

  // In exact mode the output frequencies match the pushed-forward state.
  const JointSample exact = generate_joint_dataset(
      truth, 2, kAllAxes, kAllAxes, 300, {12, 3}, /*exact_frequencies=*/true);
  for (std::size_t m = 0; m < 2; ++m) {
    const DensityMatrix out =
        apply_channel(truth, exact.true_probes[m]);
    const auto freqs = exact.dataset.probe(m).output_record.frequencies();
    for (std::size_t l = 0; l < freqs.size(); ++l) {
      CHECK(std::abs(freqs[l] -
                     born_probability(
                         out, exact.dataset.probe(m).output_povm.at(l))) <
            1e-12);
    }
  }
}

TEST_CASE("generators reject empty or nonpositive requests") {
  const ChoiOperator truth = build_choi(ChannelSpec::identity_channel());
  CHECK_THROWS_AS(
      generate_process_dataset(truth, {}, kAllAxes, 100, {13, 1}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      generate_joint_dataset(truth, 0, kAllAxes, kAllAxes, 100, {13, 1}),
      std::invalid_argument);
  const DensityMatrix rho = bloch_state(0, 0, 0.5);
  CHECK_THROWS_AS(sample_counts(rho, pauli_povm(kAllAxes), 0, {13, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(measure_pauli_axes(rho, {}, 10, {13, 3}, false),
                  std::invalid_argument);
}
