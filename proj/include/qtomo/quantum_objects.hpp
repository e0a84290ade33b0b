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

#include <string>
#include <vector>

#include "qtomo/linops.hpp"

namespace qtomo {

/// Unit-trace Hermitian PSD operator. The checked constructor enforces the
/// physical invariants; `unchecked` is for freshly produced iterates whose
/// invariants hold by construction.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Operator op);
  static DensityMatrix unchecked(Operator op);

  static DensityMatrix maximally_mixed(SpaceLabel space);
  static DensityMatrix maximally_mixed(std::vector<SpaceLabel> spaces);

  const Operator& op() const { return op_; }
  const Mat& mat() const { return op_.mat(); }
  Eigen::Index dim() const { return op_.dim(); }
  bool empty() const { return op_.dim() == 0; }

 private:
  Operator op_;
};

/// Finite collection of Hermitian PSD effects on a common space list that
/// sum to the identity.
class Povm {
 public:
  Povm() = default;
  explicit Povm(std::vector<Operator> elements);
  static Povm unchecked(std::vector<Operator> elements);

  const std::vector<Operator>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  const Operator& at(std::size_t i) const { return elements_.at(i); }
  const std::vector<SpaceLabel>& spaces() const {
    return elements_.front().spaces();
  }
  Eigen::Index dim() const { return elements_.front().dim(); }

  Povm renamed(const std::vector<std::string>& names) const;

 private:
  std::vector<Operator> elements_;
};

/// Choi operator of a completely positive trace-preserving map, stored on
/// the ordered pair (input space, output space). Trace preservation means
/// the partial trace over the output space equals the input identity.
class ChoiOperator {
 public:
  ChoiOperator() = default;
  explicit ChoiOperator(Operator op);
  static ChoiOperator unchecked(Operator op);

  const Operator& op() const { return op_; }
  const Mat& mat() const { return op_.mat(); }
  bool empty() const { return op_.dim() == 0; }

  const SpaceLabel& input_space() const { return op_.spaces()[0]; }
  const SpaceLabel& output_space() const { return op_.spaces()[1]; }

  /// Max-entry deviation of Tr_out[S] from the input identity.
  double tp_residual() const;

 private:
  Operator op_;
};

/// Outcome tallies for one measurement setting. Counts are stored as
/// doubles so that exact-frequency (infinite-sample) records fit the same
/// type; sampled records hold integral values.
struct CountRecord {
  std::string setting;
  std::vector<double> counts;
  double total = 0.0;

  /// Nonnegative counts summing to a positive total (within float dust).
  void validate() const;
  /// counts / total.
  std::vector<double> frequencies() const;
};

/// Output state of the channel with Choi operator `s` on input `rho`:
/// the input-space trace of S applied to rho's transpose.
DensityMatrix apply_channel(const ChoiOperator& s, const DensityMatrix& rho);

/// Probability of `effect` on `rho`, clamped to [0, 1].
double born_probability(const DensityMatrix& rho, const Operator& effect);

/// Probability of measuring `effect` on the channel output for input `rho`,
/// evaluated directly from the Choi operator. Agrees with
/// born_probability(apply_channel(s, rho), effect).
double process_probability(const ChoiOperator& s, const DensityMatrix& rho,
                           const Operator& effect);

/// Whether the POVM elements span the full space of Hermitian operators,
/// i.e. whether outcome probabilities determine the state uniquely.
bool is_tomographically_complete(const Povm& povm);

// ---------------------------------------------------------------------------
// Plain-matrix Choi contractions shared by the estimator hot loops. `s` is a
// (d_in * d_out)-dimensional Choi matrix with the input space as the slow
// index.

/// Channel action: out = Tr_in[s (rho^T x 1)], a d_out square matrix.
Mat apply_choi_mat(const Mat& s, const Mat& rho, Eigen::Index d_in,
                   Eigen::Index d_out);

/// Adjoint (Heisenberg) action: pulls an output-space effect `w` back to the
/// input space, out = Tr_out[s^{T_in} (1 x w)]. Satisfies
/// Tr[rho * out] = Tr[apply_choi_mat(s, rho) * w].
Mat choi_back_mat(const Mat& s, const Mat& w, Eigen::Index d_in,
                  Eigen::Index d_out);

/// Kraus decomposition of a Choi operator: matrices A_i (d_out x d_in) with
/// sum_i A_i rho A_i^dagger equal to the channel action. Zero-eigenvalue
/// directions are dropped.
std::vector<Mat> choi_kraus(const ChoiOperator& s);

/// Channel action extended by an untouched ancilla: `rho` lives on
/// (input, ancilla) and the result on (output, ancilla).
DensityMatrix apply_channel_with_ancilla(const ChoiOperator& s,
                                         const DensityMatrix& rho);

}  // namespace qtomo
