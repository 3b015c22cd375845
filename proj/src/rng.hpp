// Copyright (c) the abm-calib authors
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

#ifndef ABMCALIB_RNG_HPP
#define ABMCALIB_RNG_HPP

#include <array>
#include <cstdint>
#include <string_view>

namespace abmcalib {

// Self-contained xoshiro256++ stream. All draws are produced by our own
// transforms so results are bit-identical across platforms and standard
// library versions. Streams are derived by hashing (seed, tag, index),
// never by splitting generator state, so any unit of work can rebuild its
// stream independently of execution order.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  // Deterministic child stream: hash of this stream's own seed, a purpose
  // tag and an index. Independent of how much the parent has been used.
  RngStream child(std::string_view tag, std::uint64_t index = 0) const;

  static RngStream derive(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform01();

  /// Standard normal via Box-Muller (second deviate cached).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape);

  double beta(double a, double b);

  /// Integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n);

private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace abmcalib

#endif
