#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lfir {

// splitmix64 step; used only to derive decorrelated sub-seeds from user seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent noise channels of one simulation. Each channel owns its own
// engine so that disabling one channel (e.g. a noise-free pilot run with
// sigma_v = 0) leaves the draws of the others untouched.
enum class NoiseChannel : std::uint64_t {
  excitation = 1,   // c(k)
  process = 2,      // w(k)
  measurement = 3,  // v(k)
};

inline std::uint64_t channel_seed(std::uint64_t seed, NoiseChannel channel) {
  std::uint64_t s = seed;
  std::uint64_t mixed = splitmix64(s);
  s = mixed + static_cast<std::uint64_t>(channel);
  return splitmix64(s);
}

// Standard normal draws via the Marsaglia polar method on mt19937_64.
// std::normal_distribution is not bit-reproducible across standard library
// implementations; this is.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    have_spare_ = true;
    return u * k;
  }

 private:
  double uniform() {  // [0,1) with 53-bit resolution
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lfir
