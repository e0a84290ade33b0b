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

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qtomo {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

/// Numerical tolerances shared across the library.
namespace tol {
// Hermiticity check, relative to the largest entry magnitude.
inline constexpr double herm = 1e-8;
// Allowed negative eigenvalue dust on PSD operators.
inline constexpr double psd = 1e-8;
// Eigendecomposition reconstruction error bound.
inline constexpr double recon = 1e-10;
// Probabilities below this are floored before logs and f/p ratios.
inline constexpr double prob_floor = 1e-12;
// Unit-trace check for density matrices.
inline constexpr double trace_one = 1e-9;
// POVM completeness: max-entry deviation of the element sum from identity.
inline constexpr double povm_sum = 1e-9;
// Trace-preservation residual bound for Choi operators.
inline constexpr double tp = 1e-9;
// Eigenvalue floor used when inverting Lagrange multipliers.
inline constexpr double lambda_floor = 1e-12;
}  // namespace tol

/// A named tensor factor of a composite Hilbert space.
struct SpaceLabel {
  std::string name;
  Eigen::Index dim = 0;

  friend bool operator==(const SpaceLabel&, const SpaceLabel&) = default;
};

/// Dense operator on an ordered tensor product of labeled spaces.
///
/// Row/column indices are mixed-radix over the spaces in listed order with
/// the first space as the most significant (slowest) digit. Hermiticity and
/// positivity are not invariants of this type; they are checked by the
/// predicates below and by the physical wrappers in quantum_objects.hpp.
class Operator {
 public:
  Operator() = default;
  Operator(std::vector<SpaceLabel> spaces, Mat entries);

  static Operator identity(std::vector<SpaceLabel> spaces);
  static Operator zero(std::vector<SpaceLabel> spaces);

  const std::vector<SpaceLabel>& spaces() const { return spaces_; }
  const Mat& mat() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

  Complex trace() const { return mat_.trace(); }
  Operator adjoint() const { return Operator(spaces_, mat_.adjoint()); }
  Operator transpose() const { return Operator(spaces_, mat_.transpose()); }
  /// (A + A†)/2.
  Operator hermitized() const;

  double max_abs() const;
  bool is_hermitian(double rel_tol = tol::herm) const;

  /// Position of the named space, or -1 when absent.
  int space_pos(std::string_view name) const;
  bool has_space(std::string_view name) const { return space_pos(name) >= 0; }

  /// Same entries with spaces renamed (sizes must match).
  Operator renamed(const std::vector<std::string>& names) const;

  std::vector<Eigen::Index> dims() const;

 private:
  std::vector<SpaceLabel> spaces_;
  Mat mat_;
};

// Arithmetic on operators sharing an identical space list.
Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(Complex scale, const Operator& a);
Operator operator*(double scale, const Operator& a);
Operator operator*(const Operator& a, double scale);

/// Kronecker product; result spaces are the concatenation of the inputs'.
Operator tensor(const Operator& a, const Operator& b);

/// Trace out one tensor factor. The result lives on the remaining spaces in
/// their original order (a 1x1 scalar operator when nothing remains).
Operator partial_trace(const Operator& a, std::string_view space);
Operator partial_trace(const Operator& a, const SpaceLabel& over);

/// Transpose one tensor factor in place; an involution, and the full
/// transpose when the operator has a single space.
Operator partial_transpose(const Operator& a, std::string_view space);
Operator partial_transpose(const Operator& a, const SpaceLabel& on);

/// Lift `a` onto a larger ordered space list, acting as identity on the
/// spaces it does not touch. Every space of `a` must appear in `target`
/// (matched by name, equal dimension).
Operator embed(const Operator& a, const std::vector<SpaceLabel>& target);

struct HermEig {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // unitary, columns are eigenvectors
};

/// Eigendecomposition of a Hermitian operator. The input is hermitized
/// before solving; inputs farther than tol::herm (relative) from Hermitian
/// are rejected.
HermEig herm_eig(const Operator& a);

/// PSD square root with clipping of eigenvalue dust in [-tol, 0).
/// Genuinely negative eigenvalues signal a corrupted kernel and throw.
Operator psd_sqrt(const Operator& a);

/// Inverse of a Hermitian PSD operator with eigenvalues floored at `floor`
/// before inversion. `floor` must be positive.
Operator reg_inverse(const Operator& a, double floor);

// ---------------------------------------------------------------------------
// Plain-matrix kernels used in estimator hot loops. Index convention matches
// Operator: first factor is the slow digit.

Mat kron(const Mat& a, const Mat& b);

/// Partial trace over the factor at `pos` of a square matrix whose index is
/// mixed-radix over `factor_dims`.
Mat ptrace_at(const Mat& a, const std::vector<Eigen::Index>& factor_dims,
              std::size_t pos);

/// Partial transpose of the factor at `pos`.
Mat ptranspose_at(const Mat& a, const std::vector<Eigen::Index>& factor_dims,
                  std::size_t pos);

HermEig herm_eig_mat(const Mat& a, double rel_tol = tol::herm);
Mat psd_sqrt_mat(const Mat& a);
Mat reg_inverse_mat(const Mat& a, double floor);

inline Mat hermitized_mat(const Mat& a) { return 0.5 * (a + a.adjoint()); }

inline double max_abs_mat(const Mat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace qtomo
