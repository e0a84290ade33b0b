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

#include "qtomo/linops.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace qtomo {
namespace {

Eigen::Index product_dim(const std::vector<SpaceLabel>& spaces) {
  Eigen::Index d = 1;
  for (const auto& s : spaces) d *= s.dim;
  return d;
}

void check_same_spaces(const Operator& a, const Operator& b,
                       const char* what) {
  if (a.spaces() != b.spaces()) {
    throw std::invalid_argument(std::string(what) +
                                ": operators live on different space lists");
  }
}

// Strides for the factor at `pos`: index = pre * (d * post_block) + ...,
// i.e. i = (i_pre * d + i_mid) * post + i_post.
struct FactorStrides {
  Eigen::Index pre = 1;   // product of dims before pos
  Eigen::Index d = 1;     // dim at pos
  Eigen::Index post = 1;  // product of dims after pos
};

FactorStrides factor_strides(const std::vector<Eigen::Index>& dims,
                             std::size_t pos) {
  if (pos >= dims.size()) {
    throw std::invalid_argument("factor position out of range");
  }
  FactorStrides f;
  for (std::size_t i = 0; i < pos; ++i) f.pre *= dims[i];
  f.d = dims[pos];
  for (std::size_t i = pos + 1; i < dims.size(); ++i) f.post *= dims[i];
  return f;
}

}  // namespace

Operator::Operator(std::vector<SpaceLabel> spaces, Mat entries)
    : spaces_(std::move(spaces)), mat_(std::move(entries)) {
  if (spaces_.empty()) {
    throw std::invalid_argument("Operator: space list must be nonempty");
  }
  for (const auto& s : spaces_) {
    if (s.dim <= 0) {
      throw std::invalid_argument("Operator: space '" + s.name +
                                  "' has nonpositive dimension");
    }
    if (s.name.empty()) {
      throw std::invalid_argument("Operator: empty space name");
    }
  }
  for (std::size_t i = 0; i < spaces_.size(); ++i) {
    for (std::size_t j = i + 1; j < spaces_.size(); ++j) {
      if (spaces_[i].name == spaces_[j].name) {
        throw std::invalid_argument("Operator: duplicate space name '" +
                                    spaces_[i].name + "'");
      }
    }
  }
  const Eigen::Index d = product_dim(spaces_);
  if (mat_.rows() != d || mat_.cols() != d) {
    throw std::invalid_argument(
        "Operator: matrix is " + std::to_string(mat_.rows()) + "x" +
        std::to_string(mat_.cols()) + " but the spaces give dimension " +
        std::to_string(d));
  }
}

Operator Operator::identity(std::vector<SpaceLabel> spaces) {
  const Eigen::Index d = product_dim(spaces);
  return Operator(std::move(spaces), Mat::Identity(d, d));
}

Operator Operator::zero(std::vector<SpaceLabel> spaces) {
  const Eigen::Index d = product_dim(spaces);
  return Operator(std::move(spaces), Mat::Zero(d, d));
}

Operator Operator::hermitized() const {
  return Operator(spaces_, hermitized_mat(mat_));
}

double Operator::max_abs() const { return max_abs_mat(mat_); }

bool Operator::is_hermitian(double rel_tol) const {
  const double scale = max_abs();
  if (scale == 0.0) return true;
  return max_abs_mat(mat_ - mat_.adjoint()) <= rel_tol * scale;
}

int Operator::space_pos(std::string_view name) const {
  for (std::size_t i = 0; i < spaces_.size(); ++i) {
    if (spaces_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Operator Operator::renamed(const std::vector<std::string>& names) const {
  if (names.size() != spaces_.size()) {
    throw std::invalid_argument("renamed: expected " +
                                std::to_string(spaces_.size()) + " names");
  }
  std::vector<SpaceLabel> spaces = spaces_;
  for (std::size_t i = 0; i < names.size(); ++i) spaces[i].name = names[i];
  return Operator(std::move(spaces), mat_);
}

std::vector<Eigen::Index> Operator::dims() const {
  std::vector<Eigen::Index> out;
  out.reserve(spaces_.size());
  for (const auto& s : spaces_) out.push_back(s.dim);
  return out;
}

Operator operator+(const Operator& a, const Operator& b) {
  check_same_spaces(a, b, "operator+");
  return Operator(a.spaces(), a.mat() + b.mat());
}

Operator operator-(const Operator& a, const Operator& b) {
  check_same_spaces(a, b, "operator-");
  return Operator(a.spaces(), a.mat() - b.mat());
}

Operator operator*(const Operator& a, const Operator& b) {
  check_same_spaces(a, b, "operator*");
  return Operator(a.spaces(), a.mat() * b.mat());
}

Operator operator*(Complex scale, const Operator& a) {
  return Operator(a.spaces(), scale * a.mat());
}

Operator operator*(double scale, const Operator& a) {
  return Complex(scale, 0.0) * a;
}

Operator operator*(const Operator& a, double scale) { return scale * a; }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b;
    }
  }
  return out;
}

Operator tensor(const Operator& a, const Operator& b) {
  std::vector<SpaceLabel> spaces = a.spaces();
  for (const auto& s : b.spaces()) {
    for (const auto& t : spaces) {
      if (t.name == s.name) {
        throw std::invalid_argument("tensor: both factors carry space '" +
                                    s.name + "'");
      }
    }
    spaces.push_back(s);
  }
  return Operator(std::move(spaces), kron(a.mat(), b.mat()));
}

Mat ptrace_at(const Mat& a, const std::vector<Eigen::Index>& factor_dims,
              std::size_t pos) {
  const auto f = factor_strides(factor_dims, pos);
  const Eigen::Index out_dim = f.pre * f.post;
  if (a.rows() != out_dim * f.d || a.cols() != a.rows()) {
    throw std::invalid_argument("ptrace_at: dimension mismatch");
  }
  Mat out = Mat::Zero(out_dim, out_dim);
  for (Eigen::Index rp = 0; rp < f.pre; ++rp) {
    for (Eigen::Index cp = 0; cp < f.pre; ++cp) {
      for (Eigen::Index rq = 0; rq < f.post; ++rq) {
        for (Eigen::Index cq = 0; cq < f.post; ++cq) {
          Complex acc(0.0, 0.0);
          for (Eigen::Index t = 0; t < f.d; ++t) {
            acc += a((rp * f.d + t) * f.post + rq,
                     (cp * f.d + t) * f.post + cq);
          }
          out(rp * f.post + rq, cp * f.post + cq) = acc;
        }
      }
    }
  }
  return out;
}

namespace {

std::size_t required_space_pos(const Operator& a, std::string_view name,
                               const char* what) {
  const int pos = a.space_pos(name);
  if (pos < 0) {
    throw std::invalid_argument(std::string(what) + ": no space named '" +
                                std::string(name) + "'");
  }
  return static_cast<std::size_t>(pos);
}

}  // namespace

Operator partial_trace(const Operator& a, std::string_view space) {
  const std::size_t pos = required_space_pos(a, space, "partial_trace");
  if (a.spaces().size() == 1) {
    // Scalar result: keep it as a 1x1 operator on a unit space.
    Mat m(1, 1);
    m(0, 0) = a.trace();
    return Operator({{"scalar", 1}}, std::move(m));
  }
  std::vector<SpaceLabel> spaces;
  for (std::size_t i = 0; i < a.spaces().size(); ++i) {
    if (i != pos) spaces.push_back(a.spaces()[i]);
  }
  return Operator(std::move(spaces), ptrace_at(a.mat(), a.dims(), pos));
}

Operator partial_trace(const Operator& a, const SpaceLabel& over) {
  const std::size_t pos = required_space_pos(a, over.name, "partial_trace");
  if (a.spaces()[pos].dim != over.dim) {
    throw std::invalid_argument("partial_trace: space '" + over.name +
                                "' has dimension " +
                                std::to_string(a.spaces()[pos].dim) +
                                ", expected " + std::to_string(over.dim));
  }
  return partial_trace(a, std::string_view(over.name));
}

Mat ptranspose_at(const Mat& a, const std::vector<Eigen::Index>& factor_dims,
                  std::size_t pos) {
  const auto f = factor_strides(factor_dims, pos);
  if (a.rows() != f.pre * f.d * f.post || a.cols() != a.rows()) {
    throw std::invalid_argument("ptranspose_at: dimension mismatch");
  }
  Mat out(a.rows(), a.cols());
  for (Eigen::Index rp = 0; rp < f.pre; ++rp) {
    for (Eigen::Index cp = 0; cp < f.pre; ++cp) {
      for (Eigen::Index rt = 0; rt < f.d; ++rt) {
        for (Eigen::Index ct = 0; ct < f.d; ++ct) {
          for (Eigen::Index rq = 0; rq < f.post; ++rq) {
            for (Eigen::Index cq = 0; cq < f.post; ++cq) {
              out((rp * f.d + ct) * f.post + rq,
                  (cp * f.d + rt) * f.post + cq) =
                  a((rp * f.d + rt) * f.post + rq,
                    (cp * f.d + ct) * f.post + cq);
            }
          }
        }
      }
    }
  }
  return out;
}

Operator partial_transpose(const Operator& a, std::string_view space) {
  const std::size_t pos = required_space_pos(a, space, "partial_transpose");
  return Operator(a.spaces(), ptranspose_at(a.mat(), a.dims(), pos));
}

Operator partial_transpose(const Operator& a, const SpaceLabel& on) {
  const std::size_t pos = required_space_pos(a, on.name, "partial_transpose");
  if (a.spaces()[pos].dim != on.dim) {
    throw std::invalid_argument("partial_transpose: space '" + on.name +
                                "' dimension mismatch");
  }
  return partial_transpose(a, std::string_view(on.name));
}

Operator embed(const Operator& a, const std::vector<SpaceLabel>& target) {
  // Map each target slot to a source space (or identity when absent).
  std::vector<int> src_pos(target.size(), -1);
  std::vector<bool> used(a.spaces().size(), false);
  for (std::size_t t = 0; t < target.size(); ++t) {
    const int p = a.space_pos(target[t].name);
    if (p >= 0) {
      if (a.spaces()[static_cast<std::size_t>(p)].dim != target[t].dim) {
        throw std::invalid_argument("embed: space '" + target[t].name +
                                    "' dimension mismatch");
      }
      src_pos[t] = p;
      used[static_cast<std::size_t>(p)] = true;
    }
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) {
      throw std::invalid_argument("embed: source space '" +
                                  a.spaces()[i].name +
                                  "' is absent from the target list");
    }
  }

  const Eigen::Index out_dim = product_dim(target);
  Mat out(out_dim, out_dim);
  const std::size_t nt = target.size();
  const std::size_t ns = a.spaces().size();
  const auto src_dims = a.dims();

  std::vector<Eigen::Index> rdig(nt), cdig(nt);
  for (Eigen::Index r = 0; r < out_dim; ++r) {
    Eigen::Index rem = r;
    for (std::size_t t = nt; t-- > 0;) {
      rdig[t] = rem % target[t].dim;
      rem /= target[t].dim;
    }
    for (Eigen::Index c = 0; c < out_dim; ++c) {
      rem = c;
      for (std::size_t t = nt; t-- > 0;) {
        cdig[t] = rem % target[t].dim;
        rem /= target[t].dim;
      }
      bool diagonal_elsewhere = true;
      for (std::size_t t = 0; t < nt; ++t) {
        if (src_pos[t] < 0 && rdig[t] != cdig[t]) {
          diagonal_elsewhere = false;
          break;
        }
      }
      if (!diagonal_elsewhere) {
        out(r, c) = Complex(0.0, 0.0);
        continue;
      }
      Eigen::Index sr = 0, sc = 0;
      for (std::size_t s = 0; s < ns; ++s) {
        // Find the target slot carrying source space s.
        for (std::size_t t = 0; t < nt; ++t) {
          if (src_pos[t] == static_cast<int>(s)) {
            sr = sr * src_dims[s] + rdig[t];
            sc = sc * src_dims[s] + cdig[t];
            break;
          }
        }
      }
      out(r, c) = a.mat()(sr, sc);
    }
  }
  return Operator(target, std::move(out));
}

HermEig herm_eig_mat(const Mat& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("herm_eig: matrix is not square");
  }
  const double scale = max_abs_mat(a);
  if (scale > 0.0 && max_abs_mat(a - a.adjoint()) > rel_tol * scale) {
    throw std::invalid_argument("herm_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitized_mat(a));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("herm_eig: eigensolver failed to converge");
  }
  return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

HermEig herm_eig(const Operator& a) { return herm_eig_mat(a.mat()); }

Mat psd_sqrt_mat(const Mat& a) {
  HermEig eig = herm_eig_mat(a);
  const double lam_max = eig.values.size() ? eig.values.maxCoeff() : 0.0;
  const double dust = tol::psd * std::max(1.0, lam_max);
  Eigen::VectorXd roots(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double v = eig.values[i];
    if (v < -dust) {
      throw std::invalid_argument(
          "psd_sqrt: eigenvalue " + std::to_string(v) +
          " is negative beyond tolerance");
    }
    roots[i] = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

Operator psd_sqrt(const Operator& a) {
  return Operator(a.spaces(), psd_sqrt_mat(a.mat()));
}

Mat reg_inverse_mat(const Mat& a, double floor) {
  if (!(floor > 0.0)) {
    throw std::invalid_argument("reg_inverse: floor must be positive");
  }
  HermEig eig = herm_eig_mat(a);
  Eigen::VectorXd inv(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    inv[i] = 1.0 / std::max(eig.values[i], floor);
  }
  return eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
}

Operator reg_inverse(const Operator& a, double floor) {
  return Operator(a.spaces(), reg_inverse_mat(a.mat(), floor));
}

}  // namespace qtomo
