#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace grating {

using Complex = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// k^2 == alpha_j^2 for some order j: the quasi-periodic Green's function does
// not exist.
class RayleighAnomaly : public Error {
public:
  RayleighAnomaly(long order, double gap);
  long order() const { return order_; }
  double gap() const { return gap_; }

private:
  long order_;
  double gap_;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class NonSymmetric : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class DegenerateAtZeroJ2 : public Error {
public:
  using Error::Error;
};

class SlowConvergence : public Error {
public:
  using Error::Error;
};

class SizeGuard : public Error {
public:
  using Error::Error;
};

class SingularReQ : public Error {
public:
  SingularReQ(std::vector<std::size_t> nodes);
  const std::vector<std::size_t> &nodes() const { return nodes_; }

private:
  std::vector<std::size_t> nodes_;
};

class GeometryNotGraph : public Error {
public:
  using Error::Error;
};

class EvaluationGap : public Error {
public:
  using Error::Error;
};

class NotConverged : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace grating
