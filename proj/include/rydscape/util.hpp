#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rydscape {

inline constexpr double kTwoPi = 6.28318530717958647692528676656;

/// Config files quote frequencies as nu-values in MHz; all internal evolution
/// uses angular frequencies in rad/us (times in us, lengths in um, hbar = 1).
inline double angular(double mhz) { return kTwoPi * mhz; }

/// Thrown when a config value or operation argument violates its contract.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Positional sub-stream seed: depends only on (seed, stream, index), so a
/// resumed session draws the same randomness as an uninterrupted one.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(stream ^ splitmix64(index)));
}

}  // namespace rydscape
