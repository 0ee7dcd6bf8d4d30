#pragma once

#include <cstdint>
#include <random>

namespace avm {

/// splitmix64 finalizer; full avalanche on 64 bits.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replication r of a run started from base_seed.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed,
                                    std::uint64_t replication) noexcept {
  return splitmix64(base_seed ^ splitmix64(replication + 0x632be59bd9b4e019ULL));
}

using Engine = std::mt19937_64;

/// Deterministic per seed within one build. Gaussian draws go through
/// std::normal_distribution, whose algorithm is library-defined.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double operator()(double mean, double sd) {
    return mean + sd * unit_(engine_);
  }
  double standard() { return unit_(engine_); }

 private:
  Engine engine_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

}  // namespace avm
