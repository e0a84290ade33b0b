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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qtomo/joint_mle.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

enum class Axis { x, y, z };

std::string axis_name(Axis a);
Axis axis_from_name(const std::string& name);

Mat sigma_x();
Mat sigma_y();
Mat sigma_z();
Mat pauli_mat(Axis a);

/// Qubit state (1 + x sx + y sy + z sz) / 2; the Bloch vector must have
/// norm at most one.
DensityMatrix bloch_state(double x, double y, double z,
                          SpaceLabel space = {"H", 2});

/// Pure eigenstate of the Pauli on `axis` with eigenvalue `sign` (+1/-1).
DensityMatrix pauli_eigenstate(Axis axis, int sign,
                               SpaceLabel space = {"H", 2});

/// The six Pauli eigenstates in the order x+, x-, y+, y-, z+, z-.
std::vector<DensityMatrix> pauli_eigenstates(SpaceLabel space = {"H", 2});

/// POVM describing measurements shared equally over the listed Pauli axes:
/// for each axis, the projectors (1 +- sigma)/2 scaled by 1/n_axes. Three
/// axes give the informationally complete six-outcome measurement.
Povm pauli_povm(const std::vector<Axis>& axes, SpaceLabel space = {"H", 2});

/// Recursive description of a test channel, serializable to JSON.
struct ChannelSpec {
  enum class Kind { identity, depolarizing, rotation, mixture };

  Kind kind = Kind::identity;
  double theta = 0.0;   // rotation only
  double weight = 0.0;  // mixture only: weight of branch `a`
  std::shared_ptr<ChannelSpec> a, b;

  static ChannelSpec identity_channel();
  static ChannelSpec depolarizing();
  static ChannelSpec rotation(double theta);
  static ChannelSpec mixture(double weight, ChannelSpec a, ChannelSpec b);
};

/// Choi operator of the described channel on ({"H", dim}, {"K", dim}).
/// `rotation` requires dim == 2.
ChoiOperator build_choi(const ChannelSpec& spec, Eigen::Index dim = 2);

/// Random full-rank state: G G^dagger / Tr[...] with standard complex
/// Gaussian entries drawn deterministically from `seed` (row-major, real
/// part before imaginary part).
DensityMatrix random_mixed_state(RngSeed seed, Eigen::Index dim = 2,
                                 SpaceLabel space = {"H", 2});

/// One multinomial draw of `n` shots of `povm` on `rho`.
CountRecord sample_counts(const DensityMatrix& rho, const Povm& povm,
                          std::int64_t n, RngSeed seed,
                          std::string setting = {});

/// Infinite-sample record: counts are n times the exact outcome
/// probabilities.
CountRecord exact_counts(const DensityMatrix& rho, const Povm& povm,
                         std::int64_t n, std::string setting = {});

/// Measure `n_per_axis` copies on each listed Pauli axis and merge the
/// tallies into one record aligned with pauli_povm(axes). With `exact` the
/// counts are the expected values instead of a draw.
CountRecord measure_pauli_axes(const DensityMatrix& rho,
                               const std::vector<Axis>& axes,
                               std::int64_t n_per_axis, RngSeed seed,
                               bool exact, std::string setting = {});

/// Process-tomography data for known probes: each probe is sent through the
/// channel and its output measured on `out_axes`.
ProcessDataset generate_process_dataset(const ChoiOperator& s_true,
                                        const std::vector<DensityMatrix>& probes,
                                        const std::vector<Axis>& out_axes,
                                        std::int64_t n_per_axis, RngSeed seed,
                                        bool exact_frequencies = false);

struct JointSample {
  JointDataset dataset;
  std::vector<DensityMatrix> true_probes;
};

/// Data for simultaneous estimation: `m_probes` random mixed probes, each
/// measured on `in_axes` directly and on `out_axes` after the channel, with
/// `n_per_axis` copies per axis on either side.
JointSample generate_joint_dataset(const ChoiOperator& s_true, int m_probes,
                                   const std::vector<Axis>& in_axes,
                                   const std::vector<Axis>& out_axes,
                                   std::int64_t n_per_axis, RngSeed seed,
                                   bool exact_frequencies = false);

}  // namespace qtomo
