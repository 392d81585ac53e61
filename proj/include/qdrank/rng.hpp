// Copyright 2026 The QDRank Authors.
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
#include <random>
#include <string_view>
#include <type_traits>

namespace qdrank {

// Named random streams. Every stream is derived from a root seed plus a
// sequence of labels (strings or integers), so the numbers a computation sees
// depend only on what it is, never on execution order or thread placement.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  template <typename... Parts>
  static Rng derive(std::uint64_t seed, const Parts&... parts) {
    return Rng(mix_key(seed, parts...));
  }

  template <typename... Parts>
  static std::uint64_t mix_key(std::uint64_t seed, const Parts&... parts) {
    std::uint64_t h = splitmix(seed ^ 0x9e3779b97f4a7c15ULL);
    ((h = splitmix(h ^ hash_part(parts))), ...);
    return h;
  }

  // Child stream keyed off this stream's next output.
  template <typename... Parts>
  Rng fork(const Parts&... parts) {
    return derive(engine_(), parts...);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t hash_part(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h ^ (static_cast<std::uint64_t>(s.size()) << 56);
  }

  template <typename T>
  static std::uint64_t hash_part(const T& v) {
    if constexpr (std::is_convertible_v<const T&, std::string_view>) {
      return hash_part(std::string_view(v));
    } else {
      static_assert(std::is_integral_v<T> || std::is_enum_v<T>, "stream label must be text or integer");
      return splitmix(static_cast<std::uint64_t>(v) + 0x632be59bd9b4e019ULL);
    }
  }

  std::mt19937_64 engine_;
};

}  // namespace qdrank
