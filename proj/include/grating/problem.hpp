#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "grating/common.hpp"
#include "grating/grid.hpp"

namespace grating {

// Plane wave exp(i k x.d) travelling downwards (d2 < 0) onto the grating.
class IncidentWave {
public:
  IncidentWave(double k, double d1, double d2);

  // d = (sin theta, -cos theta); theta in radians, measured from the downward normal.
  static IncidentWave from_angle(double k, double theta);

  double k() const { return k_; }
  double d1() const { return d1_; }
  double d2() const { return d2_; }
  // Quasi-periodicity parameter alpha = k d1.
  double alpha() const { return k_ * d1_; }
  // beta_0 = k |d2|, the vertical wavenumber of the incident order.
  double beta0() const { return k_ * std::abs(d2_); }

private:
  double k_;
  double d1_;
  double d2_;
};

// Throws RayleighAnomaly for the first order j with k^2 == (j + alpha)^2.
void check_non_resonance(double k, double alpha);

struct IncidentSample {
  Complex value;
  Vec2c gradient;
};

std::vector<IncidentSample> incident_field(const IncidentWave &wave, std::span<const Point2> points);

using MatrixSampler = std::function<Mat2c(Point2)>;

// Region {zeta_-(x1) < x2 < zeta_+(x1)} bounded by two 2pi-periodic graphs.
struct GraphGeometry {
  std::function<double(double)> lower;
  std::function<double(double)> upper;
};

// Q = eps_r^{-1} - I sampled pointwise. The sampler is 2pi-periodic in x1 and
// vanishes for |x2| > support_half_height.
struct ContrastField {
  MatrixSampler sampler;
  double support_half_height = 0.0;
  bool isotropic = false;  // Q = q I with real q at every scanned point
  std::optional<GraphGeometry> geometry;

  Mat2c operator()(Point2 x) const { return sampler(x); }
};

// Vacuum (Q == 0).
ContrastField zero_contrast();

// Q on the open strip lower < x2 < upper. Every shape is an open set, so a
// node exactly on its boundary samples zero.
ContrastField slab_contrast(const Mat2c &q, double lower, double upper);
// Q1 on lower < x2 < interface, Q2 on interface <= x2 < upper.
ContrastField two_layer_contrast(const Mat2c &q_lower, const Mat2c &q_upper, double lower,
                                 double interface, double upper);
// Axis-aligned rectangle (full widths), repeated 2pi-periodically in x1.
ContrastField rectangle_contrast(const Mat2c &q, Point2 center, double width, double height);
ContrastField circle_contrast(const Mat2c &q, Point2 center, double radius);

// Q = eps_inv - I. The support height and isotropy flag are found by scanning
// the sampler on scan_grid. Throws NonSymmetric if Q12 != Q21.
ContrastField contrast_from_permittivity(const MatrixSampler &eps_inv, const Grid &scan_grid);

// Piecewise-constant contrast read from a raster file:
//   int64 n1, int64 n2, float64 rho_box, then n1*n2 cells (m1 major, m2 minor),
//   each cell four complex entries Q11, Q12, Q21, Q22 as (re, im) float64 pairs.
// Cell (m1, m2) covers [x1(m1), x1(m1+1)) x [x2(m2), x2(m2+1)). Little-endian.
ContrastField raster_contrast(const std::filesystem::path &path);
void write_raster(const std::filesystem::path &path, const Grid &grid,
                  std::span<const Mat2c> cells);

Mat2c scalar_matrix(Complex q);

struct BuildOptions {
  std::optional<double> rho_ref;  // default h + 0.1 (rho_box - h)
  bool dealias = false;           // also sample Q on the 3/2 grid
};

struct Problem {
  IncidentWave wave;
  ContrastField contrast;
  Grid grid;
  std::vector<Mat2c> q_grid;     // grid-node order
  double rho_ref = 0.0;
  bool dealias = false;
  Grid fine_grid;                // 3/2 grid when dealias is set
  std::vector<Mat2c> q_fine;

  double support_half_height() const { return contrast.support_half_height; }
  bool node_in_support(std::size_t idx) const;
};

Problem build_problem(const IncidentWave &wave, const ContrastField &contrast, const Grid &grid,
                      const BuildOptions &options = {});

// Default computational box half-height 2h (with a floor for vacuum).
double default_rho_box(double support_half_height);

} // namespace grating
