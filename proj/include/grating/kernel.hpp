#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "grating/common.hpp"
#include "grating/grid.hpp"

namespace grating {

// |k^2 - alpha_j^2| below this (relative to max(1, |k^2|)) is a Rayleigh anomaly.
inline constexpr double kAnomalyTolerance = 1e-10;
// |lambda_j| below this (relative to max(1, |k^2|)) selects the degenerate branch.
inline constexpr double kDegenerateTolerance = 1e-8;

// sqrt(k^2 - alpha_j^2) on the branch Im >= 0, positive real on the propagating
// set. k2 may be complex (k = i gives the exponentially decaying reference
// kernel). Throws RayleighAnomaly when the radicand vanishes.
Complex vertical_wavenumber(Complex k2, double alpha_j, long order = 0);

// beta_{j1} for a real wavenumber k.
Complex beta(long j1, double k, double alpha);

struct KernelCoefficient {
  Complex value;
  bool degenerate = false;
};

// Fourier coefficient of the x2-periodised quasi-periodic Green's kernel with
// respect to phi_j on (-pi, pi) x (-rho, rho).
KernelCoefficient kernel_coefficient(long j1, long j2, Complex k2, double alpha, double rho);
Complex kernel_coefficient(long j1, long j2, double k, double alpha, double rho);

// The closed-form generic branch, without the degenerate switch. Exposed for
// the branch-continuity checks.
Complex kernel_coefficient_generic(long j1, long j2, Complex k2, double alpha, double rho);

// Limit value at lambda_j = 0 (j2 != 0).
Complex kernel_coefficient_degenerate(long j2, double rho);

struct KernelTable {
  Grid grid;
  Complex k2;
  double alpha = 0.0;
  std::vector<Complex> coeffs;  // grid-slot order
  std::vector<std::pair<long, long>> degenerate_modes;

  double rho_box() const { return grid.rho_box; }
  Complex at(long j1, long j2) const;
  // sqrt(4 pi rho) * K_hat(j): the multiplier of the periodic convolution.
  Complex multiplier(std::size_t slot) const { return convolution_scale * coeffs[slot]; }

  double convolution_scale = 0.0;
};

KernelTable kernel_table(const Grid &grid, Complex k2, double alpha);
KernelTable kernel_table(const Grid &grid, double k, double alpha);

// max |K(j)| (1 + alpha_{j1}^2 + (j2 pi / rho)^2) over the shell |j|_inf == radius
// (in slot units, clipped to the grid band).
double weighted_shell_maximum(const KernelTable &table, int radius);

struct SeriesValue {
  Complex value;
  double tail_bound = 0.0;  // magnitude of the first omitted term
  int terms = 0;
};

// Partial sum (i / 4 pi) sum_{|j| <= J} beta_j^{-1} exp(i alpha_j x1 + i beta_j |x2|).
SeriesValue greens_series(Point2 x, double k, double alpha, int truncation);

// Same series for the gradient with respect to x.
struct SeriesGradient {
  Complex d1;
  Complex d2;
  double tail_bound = 0.0;
};
SeriesGradient greens_series_gradient(Point2 x, double k, double alpha, int truncation);

// Magnitude of the first omitted term of greens_series at height |x2|.
double greens_tail_bound(double x2, double k, double alpha, int truncation);

// Smallest truncation order whose tail bound is below tol at height |x2|.
int greens_truncation_for(double x2, double k, double alpha, double tol);

// Binary snapshot: int64 n1, int64 n2, float64 k^2 (re, im), alpha, rho_box,
// then n1*n2 complex pairs in slot order. Little-endian.
void write_kernel_table(const KernelTable &table, const std::filesystem::path &path);
KernelTable read_kernel_table(const std::filesystem::path &path);

} // namespace grating
