#pragma once

#include <cstddef>

#include "grating/common.hpp"

namespace grating {

// Tensor grid on the period cell (-pi, pi) x (-rho_box, rho_box).
//
// Node m = (m1, m2) sits at x1 = -pi + 2 pi m1 / n1, x2 = -rho + 2 rho m2 / n2.
// Spectral slots use FFT-natural order: slot p holds the mathematical index
// j = p for p < n/2 and j = p - n otherwise, so j ranges over [-n/2, n/2).
// Samples and coefficients are stored row-major with m2 (or p2) fastest.
struct Grid {
  int n1 = 0;
  int n2 = 0;
  double rho_box = 0.0;

  Grid() = default;
  Grid(int n1, int n2, double rho_box);

  std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
  std::size_t index(int m1, int m2) const {
    return static_cast<std::size_t>(m1) * n2 + m2;
  }

  double x1(int m1) const { return -kPi + 2.0 * kPi * m1 / n1; }
  double x2(int m2) const { return -rho_box + 2.0 * rho_box * m2 / n2; }
  Point2 node(int m1, int m2) const { return {x1(m1), x2(m2)}; }

  double step1() const { return 2.0 * kPi / n1; }
  double step2() const { return 2.0 * rho_box / n2; }
  double cell_area() const { return step1() * step2(); }

  // Slot -> mathematical frequency index.
  static long frequency(int slot, int n) { return slot < n / 2 ? slot : slot - n; }
  long j1(int p1) const { return frequency(p1, n1); }
  long j2(int p2) const { return frequency(p2, n2); }

  // Mathematical index -> slot; returns -1 when j lies outside [-n/2, n/2).
  static int slot(long j, int n) {
    if (j < -n / 2 || j >= n / 2) {
      return -1;
    }
    return static_cast<int>(j >= 0 ? j : j + n);
  }

  // x2 wavenumber j2 * pi / rho_box of slot p2.
  double vertical_wavenumber(int p2) const {
    return static_cast<double>(j2(p2)) * kPi / rho_box;
  }

  bool operator==(const Grid &) const = default;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace grating
