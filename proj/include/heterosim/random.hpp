#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace heterosim {

/// splitmix64 finaliser; used for seed expansion and stream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a, stable across platforms.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Combine an arbitrary number of 64-bit keys into one stream seed.
/// Order matters; (a, b) and (b, a) give unrelated seeds.
template <typename... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t master, Keys... keys) noexcept {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  ((state ^= static_cast<std::uint64_t>(keys) * 0xd1342543de82ef95ULL,
    out ^= splitmix64(state), out = (out << 17) | (out >> 47)),
   ...);
  state ^= out;
  return splitmix64(state);
}

/// xoshiro256** generator with a Marsaglia polar normal transform.
///
/// A stream is identified entirely by its 64-bit seed. Independent
/// substreams are obtained by seeding with derive_seed(...) over distinct
/// keys; no stream shares state with another.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Standard normal draw.
  double normal() noexcept;

  /// Independent child stream keyed by `tag`; does not advance this stream.
  [[nodiscard]] RandomStream substream(std::uint64_t tag) const noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace heterosim
