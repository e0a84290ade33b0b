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
#include <vector>

#include "qtomo/simkit.hpp"
#include "qtomo/state_mle.hpp"

using namespace qtomo;

namespace {

const std::vector<Axis> kAllAxes{Axis::x, Axis::y, Axis::z};

StateDataset exact_dataset(const DensityMatrix& rho, double n_per_axis) {
  return StateDataset(pauli_povm(kAllAxes),
                      measure_pauli_axes(rho, kAllAxes, n_per_axis, {0, 0},
                                         /*exact=*/true));
}

double bloch_component(const DensityMatrix& rho, Axis axis) {
  return (rho.mat() * pauli_mat(axis)).trace().real();
}

MleOptions tight_options() {
  MleOptions opts;
  opts.max_iters = 50000;
  opts.tol_loglike = 1e-15;
  opts.tol_fixedpoint = 1e-13;
  return opts;
}

}  // namespace

TEST_CASE("uniform counts give the maximally mixed estimate") {
  const Povm povm = pauli_povm(kAllAxes);
  const StateDataset ds(povm, {"", {500, 500, 500, 500, 500, 500}, 3000});
  const MleReport report = estimate_state(ds, tight_options());
  CHECK(report.converged);
  CHECK(max_abs_mat(report.estimate.mat() - 0.5 * Mat::Identity(2, 2)) <
        1e-9);
  // All six outcome probabilities are 1/6.
  CHECK(report.loglike == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("at exact data the kernel is the identity and the step is fixed") {
  const DensityMatrix truth = bloch_state(0.3, -0.2, 0.4);
  const StateDataset ds = exact_dataset(truth, 1000);

  const Operator r = r_kernel(ds, truth);
  CHECK((r.mat() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  const DensityMatrix next = mle_step(ds, truth);
  CHECK(max_abs_mat(next.mat() - truth.mat()) < 1e-12);
}

TEST_CASE("noiseless data recovers the true state") {
  for (int i = 0; i < 3; ++i) {
    const DensityMatrix truth = random_mixed_state({101, (uint64_t)i});
    const StateDataset ds = exact_dataset(truth, 1000);
    const MleReport report = estimate_state(ds, tight_options());
    CHECK(report.converged);
    CHECK(max_abs_mat(report.estimate.mat() - truth.mat()) < 1e-6);
  }
}

TEST_CASE("noiseless data recovers a pure state on the boundary") {
  const DensityMatrix truth = pauli_eigenstate(Axis::z, +1);
  const StateDataset ds = exact_dataset(truth, 1000);
  const MleReport report = estimate_state(ds, tight_options());
  CHECK(report.converged);
  CHECK(max_abs_mat(report.estimate.mat() - truth.mat()) < 1e-6);
}

TEST_CASE("interior solutions match linear inversion of the frequencies") {
  const DensityMatrix truth = bloch_state(0.3, -0.2, 0.4);
  const CountRecord record =
      measure_pauli_axes(truth, kAllAxes, 1000, {102, 0}, /*exact=*/false);
  const StateDataset ds(pauli_povm(kAllAxes), record);

  // Per-axis inversion: r_a = (n_plus - n_minus) / n_axis.
  double r_hat[3];
  for (int a = 0; a < 3; ++a) {
    r_hat[a] = (record.counts[2 * a] - record.counts[2 * a + 1]) / 1000.0;
  }
  const double norm = std::sqrt(r_hat[0] * r_hat[0] + r_hat[1] * r_hat[1] +
                                r_hat[2] * r_hat[2]);
  REQUIRE(norm < 0.999);  // interior, so the two solutions must coincide

  const MleReport report = estimate_state(ds, tight_options());
  CHECK(report.converged);
  CHECK(std::abs(bloch_component(report.estimate, Axis::x) - r_hat[0]) <
        1e-6);
  CHECK(std::abs(bloch_component(report.estimate, Axis::y) - r_hat[1]) <
        1e-6);
  CHECK(std::abs(bloch_component(report.estimate, Axis::z) - r_hat[2]) <
        1e-6);
}

TEST_CASE("likelihood trace is monotone non-decreasing") {
  const DensityMatrix truth = bloch_state(0.6, 0.1, -0.5);
  const CountRecord record =
      measure_pauli_axes(truth, kAllAxes, 100, {103, 0}, /*exact=*/false);
  const StateDataset ds(pauli_povm(kAllAxes), record);
  const MleReport report = estimate_state(ds);
  REQUIRE(report.loglike_trace.size() ==
          static_cast<std::size_t>(report.iterations) + 1);
  for (std::size_t i = 1; i < report.loglike_trace.size(); ++i) {
    CHECK(report.loglike_trace[i] >= report.loglike_trace[i - 1] - 1e-12);
  }
  CHECK(report.loglike == doctest::Approx(report.loglike_trace.back()));
}

TEST_CASE("estimate is invariant under outcome reordering") {
  const DensityMatrix truth = bloch_state(-0.1, 0.5, 0.2);
  const CountRecord record =
      measure_pauli_axes(truth, kAllAxes, 500, {104, 0}, /*exact=*/false);
  const Povm povm = pauli_povm(kAllAxes);

  const std::vector<std::size_t> perm{4, 2, 0, 5, 3, 1};
  std::vector<Operator> shuffled_effects;
  std::vector<double> shuffled_counts;
  for (std::size_t idx : perm) {
    shuffled_effects.push_back(povm.at(idx));
    shuffled_counts.push_back(record.counts[idx]);
  }
  const StateDataset original(povm, record);
  const StateDataset shuffled(Povm(shuffled_effects),
                              {"", shuffled_counts, record.total});

  // Summation order differs between the two datasets, so drive both to the
  // movement criterion; likelihood-gain stopping fires at noise level and
  // leaves an ordering-dependent residual.
  MleOptions opts = tight_options();
  opts.tol_loglike = 0.0;
  const MleReport a = estimate_state(original, opts);
  const MleReport b = estimate_state(shuffled, opts);
  CHECK(max_abs_mat(a.estimate.mat() - b.estimate.mat()) < 1e-9);
  CHECK(a.loglike == doctest::Approx(b.loglike).epsilon(1e-12));
}

TEST_CASE("observer sees every accepted iterate in order") {
  const DensityMatrix truth = bloch_state(0.2, 0.3, -0.4);
  const CountRecord record =
      measure_pauli_axes(truth, kAllAxes, 200, {105, 0}, /*exact=*/false);
  const StateDataset ds(pauli_povm(kAllAxes), record);

  int calls = 0;
  Mat last_seen;
  const MleReport report = estimate_state(
      ds, MleOptions{}, std::nullopt,
      [&](const DensityMatrix& rho, int n) {
        ++calls;
        CHECK(n == calls);
        CHECK(std::abs(rho.op().trace().real() - 1.0) < 1e-9);
        last_seen = rho.mat();
      });
  CHECK(calls == report.iterations);
  CHECK(max_abs_mat(last_seen - report.estimate.mat()) < 1e-15);
}

TEST_CASE("damped iterations reach the same optimum") {
  const DensityMatrix truth = bloch_state(0.4, -0.3, 0.1);
  const CountRecord record =
      measure_pauli_axes(truth, kAllAxes, 500, {106, 0}, /*exact=*/false);
  const StateDataset ds(pauli_povm(kAllAxes), record);

  MleOptions plain = tight_options();
  MleOptions damped = tight_options();
  damped.damping = 0.4;

  const MleReport a = estimate_state(ds, plain);
  const MleReport b = estimate_state(ds, damped);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(std::abs(a.loglike - b.loglike) < 1e-9);
  CHECK(max_abs_mat(a.estimate.mat() - b.estimate.mat()) < 1e-5);
}

TEST_CASE("invalid inputs are rejected") {
  const Povm povm = pauli_povm(kAllAxes);
  CHECK_THROWS_AS(StateDataset(povm, CountRecord{"", {1, 2, 3}, 6}),
                  std::invalid_argument);

  const StateDataset ds(povm, {"", {1, 2, 3, 4, 5, 6}, 21});
  MleOptions bad;
  bad.damping = 1.0;
  CHECK_THROWS_AS(estimate_state(ds, bad), std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_state(ds, MleOptions{},
                     DensityMatrix::maximally_mixed(SpaceLabel{"H", 4})),
      std::invalid_argument);
  CHECK_THROWS_AS(mle_step(ds, DensityMatrix::maximally_mixed(
                                   SpaceLabel{"H", 4})),
                  std::invalid_argument);
}
