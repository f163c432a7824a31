#pragma once

#include <array>
#include <cmath>
#include <string>

#include "rydscape/util.hpp"

namespace rydscape {

/// The four tunable laser controls, quoted as nu-values in MHz:
/// probe Rabi frequency, coupling Rabi frequency, probe detuning,
/// coupling detuning. These are the coordinates of the cost landscape.
struct LaserParams {
  double omega_p = 0.0;
  double omega_c = 0.0;
  double delta_p = 0.0;
  double delta_c = 0.0;

  std::array<double, 4> as_array() const {
    return {omega_p, omega_c, delta_p, delta_c};
  }
  static LaserParams from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }

  void validate() const {
    require(std::isfinite(omega_p) && std::isfinite(omega_c) &&
                std::isfinite(delta_p) && std::isfinite(delta_c),
            "LaserParams: all four values must be finite");
    require(omega_p > 0.0, "LaserParams: omega_p must be > 0");
    require(omega_c > 0.0, "LaserParams: omega_c must be > 0");
  }

  bool operator==(const LaserParams&) const = default;
};

inline const char* param_name(int i) {
  static const char* names[4] = {"omega_p", "omega_c", "delta_p", "delta_c"};
  return names[i];
}

/// Per-parameter search box for the laser controls.
struct Bounds {
  std::array<std::pair<double, double>, 4> ranges;

  /// Default experimental box: Rabi frequencies in [0.1, 100] MHz,
  /// detunings in [-100, 100] MHz.
  static Bounds standard() {
    return Bounds{{{{0.1, 100.0}, {0.1, 100.0}, {-100.0, 100.0}, {-100.0, 100.0}}}};
  }

  void validate() const {
    for (int i = 0; i < 4; ++i) {
      require(std::isfinite(ranges[i].first) && std::isfinite(ranges[i].second),
              std::string("Bounds: ") + param_name(i) + " must be finite");
      require(ranges[i].first < ranges[i].second,
              std::string("Bounds: ") + param_name(i) + " min must be < max");
    }
  }

  bool contains(const LaserParams& p) const {
    auto a = p.as_array();
    for (int i = 0; i < 4; ++i)
      if (a[i] < ranges[i].first || a[i] > ranges[i].second) return false;
    return true;
  }

  LaserParams clip(const LaserParams& p) const {
    auto a = p.as_array();
    for (int i = 0; i < 4; ++i)
      a[i] = std::min(std::max(a[i], ranges[i].first), ranges[i].second);
    return LaserParams::from_array(a);
  }

  /// Affine map of a parameter point onto the unit hypercube. All kernel
  /// arithmetic happens in these coordinates so ARD length scales are
  /// comparable across dimensions.
  std::array<double, 4> normalize(const LaserParams& p) const {
    auto a = p.as_array();
    std::array<double, 4> u{};
    for (int i = 0; i < 4; ++i)
      u[i] = (a[i] - ranges[i].first) / (ranges[i].second - ranges[i].first);
    return u;
  }

  LaserParams denormalize(const std::array<double, 4>& u) const {
    std::array<double, 4> a{};
    for (int i = 0; i < 4; ++i)
      a[i] = ranges[i].first + u[i] * (ranges[i].second - ranges[i].first);
    return LaserParams::from_array(a);
  }

  bool operator==(const Bounds&) const = default;
};

}  // namespace rydscape
