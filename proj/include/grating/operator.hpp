#pragma once

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "grating/kernel.hpp"
#include "grating/problem.hpp"
#include "grating/spectral.hpp"

namespace grating {

// Largest N1 * N2 accepted by the dense assemblies.
inline constexpr std::size_t kDenseSizeLimit = 4096;

// Periodic convolution with the kernel table: out(j) = sqrt(4 pi rho) K(j) g(j).
SpectralField volume_potential(const SpectralField &g, const KernelTable &table);

// Exact differentiation of the phi_j expansion.
VectorSpectralField grad_spectral(const SpectralField &u);
SpectralField div_spectral(const VectorSpectralField &g);

// div V_k g for a vector density g.
SpectralField div_potential(const VectorSpectralField &g, const KernelTable &table);

// Q grad u at the grid nodes (or at the 3/2 grid nodes when the problem asks
// for dealiasing, followed by truncation back to the base band).
VectorSpectralField contrast_flux(const SpectralField &u, const Problem &problem);

// Same product returned as physical samples on the base grid.
std::array<Samples, 2> contrast_flux_samples(const SpectralField &u, const Problem &problem);

// L_k(Q grad u) = div V_k (Q grad u).
SpectralField apply_contrast_potential(const SpectralField &u, const Problem &problem,
                                       const KernelTable &table);

// u - L_k(Q grad u).
SpectralField apply_forward(const SpectralField &u, const Problem &problem, const KernelTable &table);

using CoefficientMap = std::function<SpectralField(const SpectralField &)>;

// Column m is map(e_m) for the m-th coefficient slot. Throws SizeGuard above
// kDenseSizeLimit unknowns.
Eigen::MatrixXcd assemble_columns(const Grid &grid, double alpha, const CoefficientMap &map);

Eigen::MatrixXcd assemble_dense(const Problem &problem, const KernelTable &table);

Eigen::VectorXcd to_vector(const SpectralField &field);
SpectralField from_vector(const Grid &grid, double alpha, const Eigen::VectorXcd &v);

} // namespace grating
