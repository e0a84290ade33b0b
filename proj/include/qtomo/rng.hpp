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

#include <cstdint>
#include <vector>

namespace qtomo {

/// Hierarchical seed: a master seed plus a stream identifier. Substreams
/// derived with distinct salts are statistically independent, and the whole
/// tree is a pure function of (master, stream), which makes every sampled
/// ensemble reproducible from a single integer.
struct RngSeed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  RngSeed substream(std::uint64_t salt) const;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// Small counter-based generator (splitmix64 core). Deterministic across
/// platforms: the output sequence depends only on the seed, never on how
/// many values other streams consumed.
class StreamRng {
 public:
  explicit StreamRng(RngSeed seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (second value cached).
  double gaussian();

  /// One multinomial draw: `n` trials over `probs` (nonnegative, summing to
  /// ~1; the last bucket absorbs rounding slack).
  std::vector<std::int64_t> multinomial(std::int64_t n,
                                        const std::vector<double>& probs);

 private:
  std::uint64_t state_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace qtomo
