#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "grating/common.hpp"
#include "grating/spectral.hpp"

namespace grating::testing {

// Small hand-rolled generators for the property tests. Every generator draws
// from one seeded engine so failures reproduce.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Complex complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  Samples samples(std::size_t n, double scale = 1.0) {
    Samples s(n);
    for (auto &v : s) {
      v = complex(scale);
    }
    return s;
  }

  SpectralField field(const Grid &grid, double alpha) {
    SpectralField f(grid, alpha);
    for (auto &c : f.coeffs) {
      c = complex();
    }
    return f;
  }

  // Complex symmetric matrix with real part bounded away from singular.
  Mat2c symmetric(double scale = 1.0) {
    Mat2c q;
    q(0, 0) = complex(scale);
    q(1, 1) = complex(scale);
    q(0, 1) = q(1, 0) = complex(scale);
    return q;
  }

  // Real symmetric positive definite, eigenvalues in [lo, hi].
  Mat2c spd(double lo, double hi) {
    const double a = uniform(0.0, kPi);
    const double l1 = uniform(lo, hi);
    const double l2 = uniform(lo, hi);
    Eigen::Matrix2d u;
    u << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
    const Eigen::Matrix2d m = u.transpose() * Eigen::Vector2d(l1, l2).asDiagonal() * u;
    return m.cast<Complex>();
  }

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

inline double max_abs_diff(const SpectralField &a, const SpectralField &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
  }
  return m;
}

inline double max_abs(const SpectralField &a) {
  double m = 0.0;
  for (const auto &c : a.coeffs) {
    m = std::max(m, std::abs(c));
  }
  return m;
}

// Fresh directory under the system temp path, removed by the destructor.
class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("grating_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
};

} // namespace grating::testing
