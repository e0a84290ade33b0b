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

#include "qtomo/quantum_objects.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/SVD>

namespace qtomo {
namespace {

void check_hermitian_psd(const Operator& op, const char* what) {
  if (!op.is_hermitian()) {
    throw std::invalid_argument(std::string(what) + ": not Hermitian");
  }
  HermEig eig = herm_eig(op);
  const double lam_max = eig.values.size() ? eig.values.maxCoeff() : 0.0;
  const double dust = tol::psd * std::max(1.0, lam_max);
  if (eig.values.size() && eig.values.minCoeff() < -dust) {
    throw std::invalid_argument(std::string(what) +
                                ": negative eigenvalue " +
                                std::to_string(eig.values.minCoeff()));
  }
}

}  // namespace

DensityMatrix::DensityMatrix(Operator op) : op_(std::move(op)) {
  check_hermitian_psd(op_, "DensityMatrix");
  const double tr_err = std::abs(op_.trace() - Complex(1.0, 0.0));
  if (tr_err > tol::trace_one) {
    throw std::invalid_argument("DensityMatrix: trace deviates from one by " +
                                std::to_string(tr_err));
  }
}

DensityMatrix DensityMatrix::unchecked(Operator op) {
  DensityMatrix rho;
  rho.op_ = std::move(op);
  return rho;
}

DensityMatrix DensityMatrix::maximally_mixed(SpaceLabel space) {
  return maximally_mixed(std::vector<SpaceLabel>{std::move(space)});
}

DensityMatrix DensityMatrix::maximally_mixed(std::vector<SpaceLabel> spaces) {
  Operator id = Operator::identity(std::move(spaces));
  const double d = static_cast<double>(id.dim());
  return DensityMatrix::unchecked((1.0 / d) * id);
}

Povm::Povm(std::vector<Operator> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) {
    throw std::invalid_argument("Povm: element list is empty");
  }
  const auto& spaces = elements_.front().spaces();
  Operator sum = Operator::zero(spaces);
  for (const auto& e : elements_) {
    if (e.spaces() != spaces) {
      throw std::invalid_argument("Povm: elements on different space lists");
    }
    check_hermitian_psd(e, "Povm element");
    sum = sum + e;
  }
  const Operator id = Operator::identity(spaces);
  if ((sum - id).max_abs() > tol::povm_sum) {
    throw std::invalid_argument(
        "Povm: elements sum to identity only within " +
        std::to_string((sum - id).max_abs()));
  }
}

Povm Povm::unchecked(std::vector<Operator> elements) {
  Povm p;
  p.elements_ = std::move(elements);
  return p;
}

Povm Povm::renamed(const std::vector<std::string>& names) const {
  std::vector<Operator> out;
  out.reserve(elements_.size());
  for (const auto& e : elements_) out.push_back(e.renamed(names));
  return Povm::unchecked(std::move(out));
}

ChoiOperator::ChoiOperator(Operator op) : op_(std::move(op)) {
  if (op_.spaces().size() != 2) {
    throw std::invalid_argument(
        "ChoiOperator: expected exactly two spaces (input, output)");
  }
  check_hermitian_psd(op_, "ChoiOperator");
  const double residual = tp_residual();
  if (residual > tol::tp) {
    throw std::invalid_argument(
        "ChoiOperator: trace-preservation residual " +
        std::to_string(residual));
  }
}

ChoiOperator ChoiOperator::unchecked(Operator op) {
  ChoiOperator s;
  s.op_ = std::move(op);
  return s;
}

double ChoiOperator::tp_residual() const {
  Operator reduced = partial_trace(op_, output_space());
  const Operator id = Operator::identity({input_space()});
  return (reduced - id).max_abs();
}

void CountRecord::validate() const {
  if (counts.empty()) {
    throw std::invalid_argument("CountRecord: no outcomes");
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("CountRecord: total must be positive");
  }
  double sum = 0.0;
  for (double c : counts) {
    if (c < 0.0 || !std::isfinite(c)) {
      throw std::invalid_argument("CountRecord: negative or non-finite count");
    }
    sum += c;
  }
  if (std::abs(sum - total) > 1e-6 * std::max(1.0, total)) {
    throw std::invalid_argument("CountRecord: counts sum to " +
                                std::to_string(sum) + " but total is " +
                                std::to_string(total));
  }
}

std::vector<double> CountRecord::frequencies() const {
  validate();
  std::vector<double> f(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) f[i] = counts[i] / total;
  return f;
}

Mat apply_choi_mat(const Mat& s, const Mat& rho, Eigen::Index d_in,
                   Eigen::Index d_out) {
  // out[k,k'] = sum_{h,h'} S[(h,k),(h',k')] rho[h,h'].
  Mat out = Mat::Zero(d_out, d_out);
  for (Eigen::Index h = 0; h < d_in; ++h) {
    for (Eigen::Index hp = 0; hp < d_in; ++hp) {
      out += rho(h, hp) * s.block(h * d_out, hp * d_out, d_out, d_out);
    }
  }
  return out;
}

Mat choi_back_mat(const Mat& s, const Mat& w, Eigen::Index d_in,
                  Eigen::Index d_out) {
  // out[h,h'] = sum_{k,k'} S[(h',k),(h,k')] w[k',k]
  //           = Tr[S.block(h', h) * w].
  Mat out(d_in, d_in);
  for (Eigen::Index h = 0; h < d_in; ++h) {
    for (Eigen::Index hp = 0; hp < d_in; ++hp) {
      out(h, hp) = (s.block(hp * d_out, h * d_out, d_out, d_out)
                        .transpose()
                        .cwiseProduct(w))
                       .sum();
    }
  }
  return hermitized_mat(out);
}

DensityMatrix apply_channel(const ChoiOperator& s, const DensityMatrix& rho) {
  const Eigen::Index dh = s.input_space().dim;
  const Eigen::Index dk = s.output_space().dim;
  if (rho.dim() != dh) {
    throw std::invalid_argument(
        "apply_channel: input state dimension " + std::to_string(rho.dim()) +
        " does not match channel input dimension " + std::to_string(dh));
  }
  return DensityMatrix::unchecked(Operator(
      {s.output_space()},
      hermitized_mat(apply_choi_mat(s.mat(), rho.mat(), dh, dk))));
}

double born_probability(const DensityMatrix& rho, const Operator& effect) {
  if (rho.dim() != effect.dim()) {
    throw std::invalid_argument("born_probability: dimension mismatch");
  }
  const double p =
      (rho.mat().transpose().cwiseProduct(effect.mat())).sum().real();
  return std::clamp(p, 0.0, 1.0);
}

double process_probability(const ChoiOperator& s, const DensityMatrix& rho,
                           const Operator& effect) {
  const Eigen::Index dh = s.input_space().dim;
  const Eigen::Index dk = s.output_space().dim;
  if (rho.dim() != dh) {
    throw std::invalid_argument("process_probability: input state dimension "
                                "does not match channel input");
  }
  if (effect.dim() != dk) {
    throw std::invalid_argument("process_probability: effect dimension does "
                                "not match channel output");
  }
  // p = Tr[S (rho^T x effect)] = sum S[(h,k),(h',k')] rho[h,h'] e[k',k].
  const Mat& sm = s.mat();
  const Mat& rm = rho.mat();
  const Mat& em = effect.mat();
  Complex acc(0.0, 0.0);
  for (Eigen::Index h = 0; h < dh; ++h) {
    for (Eigen::Index hp = 0; hp < dh; ++hp) {
      acc += rm(h, hp) *
             (sm.block(h * dk, hp * dk, dk, dk).transpose().cwiseProduct(em))
                 .sum();
    }
  }
  return std::clamp(acc.real(), 0.0, 1.0);
}

std::vector<Mat> choi_kraus(const ChoiOperator& s) {
  const Eigen::Index dh = s.input_space().dim;
  const Eigen::Index dk = s.output_space().dim;
  HermEig eig = herm_eig(s.op());
  const double lam_max = eig.values.size() ? eig.values.maxCoeff() : 0.0;
  const double cutoff = tol::psd * std::max(1.0, lam_max);
  std::vector<Mat> kraus;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] <= cutoff) continue;
    const double w = std::sqrt(eig.values[i]);
    Mat a(dk, dh);
    for (Eigen::Index h = 0; h < dh; ++h) {
      for (Eigen::Index k = 0; k < dk; ++k) {
        a(k, h) = w * eig.vectors(h * dk + k, i);
      }
    }
    kraus.push_back(std::move(a));
  }
  return kraus;
}

DensityMatrix apply_channel_with_ancilla(const ChoiOperator& s,
                                         const DensityMatrix& rho) {
  const auto& spaces = rho.op().spaces();
  if (spaces.size() != 2 || spaces[0].dim != s.input_space().dim) {
    throw std::invalid_argument(
        "apply_channel_with_ancilla: state must live on (input, ancilla)");
  }
  const Eigen::Index db = spaces[1].dim;
  const Mat id_b = Mat::Identity(db, db);
  Mat out = Mat::Zero(s.output_space().dim * db, s.output_space().dim * db);
  for (const Mat& a : choi_kraus(s)) {
    const Mat lifted = kron(a, id_b);
    out += lifted * rho.mat() * lifted.adjoint();
  }
  return DensityMatrix::unchecked(
      Operator({s.output_space(), spaces[1]}, hermitized_mat(out)));
}

bool is_tomographically_complete(const Povm& povm) {
  const Eigen::Index d = povm.dim();
  Mat stack(static_cast<Eigen::Index>(povm.size()), d * d);
  for (std::size_t i = 0; i < povm.size(); ++i) {
    const Mat& e = povm.at(i).mat();
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        stack(static_cast<Eigen::Index>(i), r * d + c) = e(r, c);
      }
    }
  }
  // The elements are Hermitian, so the complex rank of the stack equals the
  // real dimension of their real span; full rank d^2 means informationally
  // complete.
  Eigen::JacobiSVD<Mat> svd(stack);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return false;
  const double cutoff = 1e-9 * sv[0];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank == d * d;
}

}  // namespace qtomo
