#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pitchrl {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with splitmix64 seeding. All stochastic draws in the project
// go through this class so that runs are reproducible across platforms
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    for (auto& w : state_) w = splitmix64(seed);
  }

  // Documented stream-derivation scheme: a root seed plus (stream, counter)
  // indices are mixed through splitmix64. Every worker/purpose gets its own
  // (stream, counter) pair, so adding workers never perturbs other streams.
  static Rng derive(std::uint64_t root, std::uint64_t stream,
                    std::uint64_t counter = 0) {
    std::uint64_t x = root;
    std::uint64_t a = splitmix64(x);
    x = a ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    a = splitmix64(x);
    x = a ^ (0xbf58476d1ce4e5b9ULL * (counter + 1));
    Rng r;
    r.reseed(splitmix64(x));
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller. No cached spare, so the generator state
  // alone fully determines the stream (needed for checkpoint round-trips).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponential with the given mean.
  double exponential(double mean) {
    return -mean * std::log(1.0 - uniform());
  }

  std::array<std::uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace pitchrl
