#pragma once

#include <span>
#include <vector>

#include "grating/common.hpp"
#include "grating/grid.hpp"

namespace grating {

using Samples = std::vector<Complex>;

// Coefficients of a field with respect to the orthonormal quasi-periodic basis
//   phi_j(x) = (4 pi rho)^{-1/2} exp(i (j1 + alpha) x1 + i j2 pi x2 / rho).
struct SpectralField {
  Grid grid;
  double alpha = 0.0;
  std::vector<Complex> coeffs;

  SpectralField() = default;
  SpectralField(const Grid &grid, double alpha);

  Complex &at(long j1, long j2);
  Complex at(long j1, long j2) const;

  // Squared L2 norm over the period cell (Parseval).
  double norm_squared() const;
};

struct VectorSpectralField {
  SpectralField g1;
  SpectralField g2;
};

// Samples at the grid nodes -> phi_j coefficients; removes the exp(i alpha x1)
// phase before the FFT so that the result is exact on the discrete level.
SpectralField to_spectral(const Grid &grid, double alpha, std::span<const Complex> values);
Samples to_physical(const SpectralField &field);

// Coefficient-wise copy onto another grid with the same rho_box (zero padding
// or truncation of the frequency band).
SpectralField resample(const SpectralField &field, int n1, int n2);

// Samples of a single basis function phi_j at the grid nodes.
Samples basis_samples(const Grid &grid, double alpha, long j1, long j2);

// Evaluates the trigonometric series at an arbitrary point.
Complex evaluate(const SpectralField &field, Point2 x);

// Value of phi_j at x for the box half-height rho.
Complex basis_value(double alpha, double rho, long j1, long j2, Point2 x);

void require_same_shape(const SpectralField &a, const SpectralField &b);

} // namespace grating
