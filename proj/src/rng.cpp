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

#include "qtomo/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtomo {
namespace {

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngSeed RngSeed::substream(std::uint64_t salt) const {
  // Chainable derivation: fold the salt into the stream id through the
  // mixer so nested substream() calls land on well-separated streams.
  return RngSeed{master, mix64(stream ^ mix64(salt ^ 0xa5a5a5a55a5a5a5aULL))};
}

StreamRng::StreamRng(RngSeed seed)
    : state_(mix64(seed.master ^ mix64(seed.stream))) {}

std::uint64_t StreamRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double StreamRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double StreamRng::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // Box-Muller on (0,1] x [0,1).
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(phi);
  has_cached_gaussian_ = true;
  return r * std::cos(phi);
}

std::vector<std::int64_t> StreamRng::multinomial(
    std::int64_t n, const std::vector<double>& probs) {
  if (probs.empty()) {
    throw std::invalid_argument("multinomial: no outcome probabilities");
  }
  if (n < 0) {
    throw std::invalid_argument("multinomial: negative trial count");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("multinomial: invalid probability");
    }
    sum += p;
  }
  if (sum <= 0.0) {
    throw std::invalid_argument("multinomial: probabilities sum to zero");
  }
  std::vector<double> cumulative(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i] / sum;
    cumulative[i] = acc;
  }
  cumulative.back() = 1.0;  // absorb rounding slack

  std::vector<std::int64_t> counts(probs.size(), 0);
  for (std::int64_t t = 0; t < n; ++t) {
    const double u = uniform();
    std::size_t bucket = 0;
    while (bucket + 1 < cumulative.size() && u >= cumulative[bucket]) {
      ++bucket;
    }
    ++counts[bucket];
  }
  return counts;
}

}  // namespace qtomo
