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

#include "qtomo/simkit.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qtomo {
namespace {

// Substream salts for dataset generation; fixed so every sampled ensemble
// is a pure function of the caller's seed.
constexpr std::uint64_t kProbeSalt = 0x701;
constexpr std::uint64_t kInputSalt = 0x702;
constexpr std::uint64_t kOutputSalt = 0x703;

}  // namespace

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  throw std::invalid_argument("axis_name: invalid axis");
}

Axis axis_from_name(const std::string& name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw std::invalid_argument("axis_from_name: unknown axis '" + name + "'");
}

Mat sigma_x() {
  Mat m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
  return m;
}

Mat sigma_y() {
  Mat m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Mat sigma_z() {
  Mat m(2, 2);
  m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return m;
}

Mat pauli_mat(Axis a) {
  switch (a) {
    case Axis::x: return sigma_x();
    case Axis::y: return sigma_y();
    case Axis::z: return sigma_z();
  }
  throw std::invalid_argument("pauli_mat: invalid axis");
}

DensityMatrix bloch_state(double x, double y, double z, SpaceLabel space) {
  if (space.dim != 2) {
    throw std::invalid_argument("bloch_state: space must be a qubit");
  }
  const double norm2 = x * x + y * y + z * z;
  if (norm2 > 1.0 + 1e-12) {
    throw std::invalid_argument("bloch_state: Bloch vector norm exceeds one");
  }
  const Mat m = 0.5 * (Mat::Identity(2, 2) + x * sigma_x() + y * sigma_y() +
                       z * sigma_z());
  return DensityMatrix::unchecked(Operator({std::move(space)}, m));
}

DensityMatrix pauli_eigenstate(Axis axis, int sign, SpaceLabel space) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("pauli_eigenstate: sign must be +1 or -1");
  }
  const double s = static_cast<double>(sign);
  switch (axis) {
    case Axis::x: return bloch_state(s, 0, 0, std::move(space));
    case Axis::y: return bloch_state(0, s, 0, std::move(space));
    case Axis::z: return bloch_state(0, 0, s, std::move(space));
  }
  throw std::invalid_argument("pauli_eigenstate: invalid axis");
}

std::vector<DensityMatrix> pauli_eigenstates(SpaceLabel space) {
  std::vector<DensityMatrix> out;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    out.push_back(pauli_eigenstate(a, +1, space));
    out.push_back(pauli_eigenstate(a, -1, space));
  }
  return out;
}

Povm pauli_povm(const std::vector<Axis>& axes, SpaceLabel space) {
  if (axes.empty()) {
    throw std::invalid_argument("pauli_povm: no axes");
  }
  if (space.dim != 2) {
    throw std::invalid_argument("pauli_povm: space must be a qubit");
  }
  const double scale = 1.0 / static_cast<double>(axes.size());
  std::vector<Operator> elements;
  for (Axis a : axes) {
    const Mat sigma = pauli_mat(a);
    elements.emplace_back(std::vector<SpaceLabel>{space},
                          scale * 0.5 * (Mat::Identity(2, 2) + sigma));
    elements.emplace_back(std::vector<SpaceLabel>{space},
                          scale * 0.5 * (Mat::Identity(2, 2) - sigma));
  }
  return Povm(std::move(elements));
}

ChannelSpec ChannelSpec::identity_channel() {
  return ChannelSpec{Kind::identity, 0.0, 0.0, nullptr, nullptr};
}

ChannelSpec ChannelSpec::depolarizing() {
  return ChannelSpec{Kind::depolarizing, 0.0, 0.0, nullptr, nullptr};
}

ChannelSpec ChannelSpec::rotation(double theta) {
  return ChannelSpec{Kind::rotation, theta, 0.0, nullptr, nullptr};
}

ChannelSpec ChannelSpec::mixture(double weight, ChannelSpec a,
                                 ChannelSpec b) {
  if (weight < 0.0 || weight > 1.0) {
    throw std::invalid_argument("ChannelSpec::mixture: weight outside [0,1]");
  }
  return ChannelSpec{Kind::mixture, 0.0, weight,
                     std::make_shared<ChannelSpec>(std::move(a)),
                     std::make_shared<ChannelSpec>(std::move(b))};
}

namespace {

Mat build_choi_mat(const ChannelSpec& spec, Eigen::Index d) {
  switch (spec.kind) {
    case ChannelSpec::Kind::identity: {
      // S[(h,k),(h',k')] = delta_{hk} delta_{h'k'}.
      Mat s = Mat::Zero(d * d, d * d);
      for (Eigen::Index h = 0; h < d; ++h) {
        for (Eigen::Index hp = 0; hp < d; ++hp) {
          s(h * d + h, hp * d + hp) = Complex(1.0, 0.0);
        }
      }
      return s;
    }
    case ChannelSpec::Kind::depolarizing:
      return Mat::Identity(d * d, d * d) / static_cast<double>(d);
    case ChannelSpec::Kind::rotation: {
      if (d != 2) {
        throw std::invalid_argument("build_choi: rotation needs a qubit");
      }
      Mat u(2, 2);
      u << Complex(std::cos(spec.theta), 0),
          Complex(-std::sin(spec.theta), 0),
          Complex(std::sin(spec.theta), 0), Complex(std::cos(spec.theta), 0);
      // S = v v^dagger with v[(h,k)] = U[k,h].
      Eigen::VectorXcd v(d * d);
      for (Eigen::Index h = 0; h < d; ++h) {
        for (Eigen::Index k = 0; k < d; ++k) {
          v(h * d + k) = u(k, h);
        }
      }
      return v * v.adjoint();
    }
    case ChannelSpec::Kind::mixture: {
      if (!spec.a || !spec.b) {
        throw std::invalid_argument("build_choi: mixture missing a branch");
      }
      return spec.weight * build_choi_mat(*spec.a, d) +
             (1.0 - spec.weight) * build_choi_mat(*spec.b, d);
    }
  }
  throw std::invalid_argument("build_choi: invalid channel kind");
}

}  // namespace

ChoiOperator build_choi(const ChannelSpec& spec, Eigen::Index dim) {
  if (dim <= 0) {
    throw std::invalid_argument("build_choi: dimension must be positive");
  }
  return ChoiOperator(Operator({{"H", dim}, {"K", dim}},
                               build_choi_mat(spec, dim)));
}

DensityMatrix random_mixed_state(RngSeed seed, Eigen::Index dim,
                                 SpaceLabel space) {
  if (dim <= 0 || space.dim != dim) {
    throw std::invalid_argument("random_mixed_state: bad dimensions");
  }
  StreamRng rng(seed);
  Mat g(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      g(r, c) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::unchecked(
      Operator({std::move(space)}, hermitized_mat(rho)));
}

CountRecord sample_counts(const DensityMatrix& rho, const Povm& povm,
                          std::int64_t n, RngSeed seed, std::string setting) {
  if (n <= 0) {
    throw std::invalid_argument("sample_counts: need a positive shot count");
  }
  std::vector<double> probs;
  probs.reserve(povm.size());
  for (const auto& e : povm.elements()) {
    probs.push_back(born_probability(rho, e));
  }
  StreamRng rng(seed);
  const auto draws = rng.multinomial(n, probs);
  CountRecord rec;
  rec.setting = std::move(setting);
  rec.total = static_cast<double>(n);
  rec.counts.reserve(draws.size());
  for (auto c : draws) rec.counts.push_back(static_cast<double>(c));
  return rec;
}

CountRecord exact_counts(const DensityMatrix& rho, const Povm& povm,
                         std::int64_t n, std::string setting) {
  if (n <= 0) {
    throw std::invalid_argument("exact_counts: need a positive shot count");
  }
  CountRecord rec;
  rec.setting = std::move(setting);
  rec.total = static_cast<double>(n);
  rec.counts.reserve(povm.size());
  for (const auto& e : povm.elements()) {
    rec.counts.push_back(static_cast<double>(n) * born_probability(rho, e));
  }
  return rec;
}

CountRecord measure_pauli_axes(const DensityMatrix& rho,
                               const std::vector<Axis>& axes,
                               std::int64_t n_per_axis, RngSeed seed,
                               bool exact, std::string setting) {
  if (axes.empty()) {
    throw std::invalid_argument("measure_pauli_axes: no axes");
  }
  if (n_per_axis <= 0) {
    throw std::invalid_argument("measure_pauli_axes: need positive shots");
  }
  CountRecord rec;
  rec.setting = std::move(setting);
  rec.total = static_cast<double>(n_per_axis) *
              static_cast<double>(axes.size());
  StreamRng rng(seed);
  for (Axis a : axes) {
    const Mat plus = 0.5 * (Mat::Identity(2, 2) + pauli_mat(a));
    const double p_plus = born_probability(
        rho, Operator(rho.op().spaces(), plus));
    if (exact) {
      rec.counts.push_back(static_cast<double>(n_per_axis) * p_plus);
      rec.counts.push_back(static_cast<double>(n_per_axis) *
                           (1.0 - p_plus));
    } else {
      const auto draws = rng.multinomial(n_per_axis, {p_plus, 1.0 - p_plus});
      rec.counts.push_back(static_cast<double>(draws[0]));
      rec.counts.push_back(static_cast<double>(draws[1]));
    }
  }
  return rec;
}

ProcessDataset generate_process_dataset(
    const ChoiOperator& s_true, const std::vector<DensityMatrix>& probes,
    const std::vector<Axis>& out_axes, std::int64_t n_per_axis, RngSeed seed,
    bool exact_frequencies) {
  if (probes.empty()) {
    throw std::invalid_argument("generate_process_dataset: no probes");
  }
  std::vector<ProbeSpec> specs;
  std::vector<Povm> povms;
  std::vector<CountRecord> records;
  const Povm out_povm =
      pauli_povm(out_axes, {"K", s_true.output_space().dim});
  for (std::size_t m = 0; m < probes.size(); ++m) {
    const DensityMatrix out = apply_channel(s_true, probes[m]);
    records.push_back(measure_pauli_axes(
        out, out_axes, n_per_axis,
        seed.substream(kOutputSalt).substream(m), exact_frequencies,
        "probe" + std::to_string(m)));
    specs.push_back(ProbeSpec::separable(probes[m]));
    povms.push_back(out_povm);
  }
  return ProcessDataset(std::move(specs), std::move(povms),
                        std::move(records));
}

JointSample generate_joint_dataset(const ChoiOperator& s_true, int m_probes,
                                   const std::vector<Axis>& in_axes,
                                   const std::vector<Axis>& out_axes,
                                   std::int64_t n_per_axis, RngSeed seed,
                                   bool exact_frequencies) {
  if (m_probes <= 0) {
    throw std::invalid_argument("generate_joint_dataset: need probes");
  }
  const Eigen::Index dh = s_true.input_space().dim;
  const Povm in_povm = pauli_povm(in_axes, {"H", dh});
  const Povm out_povm = pauli_povm(out_axes, {"K", s_true.output_space().dim});

  std::vector<JointProbeData> data;
  std::vector<DensityMatrix> true_probes;
  for (int m = 0; m < m_probes; ++m) {
    DensityMatrix rho = random_mixed_state(
        seed.substream(kProbeSalt).substream(static_cast<std::uint64_t>(m)),
        dh, {"H", dh});
    CountRecord in_rec = measure_pauli_axes(
        rho, in_axes, n_per_axis,
        seed.substream(kInputSalt).substream(static_cast<std::uint64_t>(m)),
        exact_frequencies, "probe" + std::to_string(m) + "/in");
    CountRecord out_rec = measure_pauli_axes(
        apply_channel(s_true, rho), out_axes, n_per_axis,
        seed.substream(kOutputSalt).substream(static_cast<std::uint64_t>(m)),
        exact_frequencies, "probe" + std::to_string(m) + "/out");
    data.push_back(JointProbeData{in_povm, std::move(in_rec), out_povm,
                                  std::move(out_rec)});
    true_probes.push_back(std::move(rho));
  }
  return JointSample{JointDataset(std::move(data)), std::move(true_probes)};
}

}  // namespace qtomo
