#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grating/kernel.hpp"
#include "grating/problem.hpp"
#include "grating/spectral.hpp"

namespace grating {

// Largest oracle grid per direction.
inline constexpr int kOracleGridLimit = 64;

// exp(1 - 1 / (1 - t^2)) on |t| < 1, zero elsewhere.
double smooth_bump(double t);

// Weighted point cloud approximating a source density.
struct QuadratureSource {
  std::vector<Point2> points;
  std::vector<Complex> values;
  std::vector<double> weights;
};

// Trapezoidal weights on the grid nodes where the samples are non-zero.
QuadratureSource grid_source(const Grid &grid, std::span<const Complex> samples);

struct QuadratureOptions {
  double min_separation = 0.1;
  double tail_tolerance = 1e-10;
};

// sum_i w_i G(x - y_i) g(y_i) with the Rayleigh-series Green's function; the
// series order per target keeps the tail bound below the tolerance.
std::vector<Complex> dense_quadrature_potential(const QuadratureSource &source,
                                                std::span<const Point2> targets, double k,
                                                double alpha, const QuadratureOptions &opts = {});

// max |Delta_h w + k^2 w + s| over nodes with |x2| <= x2_limit whose 5-point
// stencil stays inside the grid. x1 neighbours wrap with the quasi-periodic phase.
double helmholtz_residual(const SpectralField &field, const SpectralField &source, double k,
                          double x2_limit);

struct SlabSpec {
  Complex q;
  double a = -0.5;
  double b = 0.5;
  double k = 1.0;
  double alpha = 0.0;
  double rho_ref = 1.0;  // Rayleigh normalization height
};

struct SlabResult {
  Complex r;      // above: exp(i alpha x1 + i beta0 (x2 - rho_ref)) amplitude
  Complex t;      // below: total field exp(i alpha x1 - i beta0 (x2 + rho_ref)) amplitude
  double R = 0.0;
  double T = 0.0;
  bool linear_branch = false;  // interior wavenumber vanished
};

// Transfer-matrix solution of ((1+q) v')' + (k^2 - (1+q) alpha^2) v = 0.
SlabResult slab_reference(const SlabSpec &spec);

struct CompactnessProfile {
  std::vector<double> difference;  // singular values of L_k - L_ref, descending
  std::vector<double> operator_k;  // singular values of L_k
};

// Dense L_a(Q grad .) - L_b(Q grad .) and L_a(Q grad .) in the H^1-weighted
// coefficient norm. Throws SizeGuard above the oracle grid limit.
CompactnessProfile compactness_profile(const Problem &problem, const KernelTable &table_a,
                                       const KernelTable &table_b);

// Smooth positive test contrast 2 bump(2 x2) (1 + 0.3 cos x1) I on an n x n grid
// with rho_box = 1; compares the k table against k^2 = -1.
CompactnessProfile compactness_indicator(int n, const IncidentWave &wave);

ContrastField smooth_test_contrast();

std::string slab_json(const SlabSpec &spec, const SlabResult &result);
std::string compactness_json(const CompactnessProfile &profile);

// Oracle gate suite shared by the command line and the tests.
struct GateResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

enum class GateLevel { Quick, Full };

GateResult multiplier_gate();
GateResult helmholtz_gate(GateLevel level);
GateResult slab_gate(GateLevel level);
GateResult compactness_gate();
std::vector<GateResult> run_gates(GateLevel level);

} // namespace grating
