#include "grating/operator.hpp"

#include <cmath>
#include <sstream>

namespace grating {

namespace {

void require_table_matches(const SpectralField &g, const KernelTable &table) {
  if (!(g.grid == table.grid) || g.coeffs.size() != table.coeffs.size()) {
    throw ShapeMismatch("field and kernel table live on different grids");
  }
  if (g.alpha != table.alpha) {
    throw ShapeMismatch("field and kernel table use different quasi-periodicity parameters");
  }
}

// Pointwise 2x2 product on one grid.
std::array<Samples, 2> multiply(const std::vector<Mat2c> &q, const Samples &g1, const Samples &g2) {
  std::array<Samples, 2> out{Samples(g1.size()), Samples(g1.size())};
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const Mat2c &m = q[i];
    out[0][i] = m(0, 0) * g1[i] + m(0, 1) * g2[i];
    out[1][i] = m(1, 0) * g1[i] + m(1, 1) * g2[i];
  }
  return out;
}

} // namespace

SpectralField volume_potential(const SpectralField &g, const KernelTable &table) {
  require_table_matches(g, table);
  SpectralField out(g.grid, g.alpha);
  for (std::size_t s = 0; s < g.coeffs.size(); ++s) {
    out.coeffs[s] = table.multiplier(s) * g.coeffs[s];
  }
  return out;
}

VectorSpectralField grad_spectral(const SpectralField &u) {
  const Grid &grid = u.grid;
  VectorSpectralField out{SpectralField(grid, u.alpha), SpectralField(grid, u.alpha)};
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    const double a = static_cast<double>(grid.j1(p1)) + u.alpha;
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      const std::size_t s = grid.index(p1, p2);
      out.g1.coeffs[s] = kI * a * u.coeffs[s];
      out.g2.coeffs[s] = kI * grid.vertical_wavenumber(p2) * u.coeffs[s];
    }
  }
  return out;
}

SpectralField div_spectral(const VectorSpectralField &g) {
  require_same_shape(g.g1, g.g2);
  const Grid &grid = g.g1.grid;
  SpectralField out(grid, g.g1.alpha);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    const double a = static_cast<double>(grid.j1(p1)) + g.g1.alpha;
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      const std::size_t s = grid.index(p1, p2);
      out.coeffs[s] = kI * a * g.g1.coeffs[s] + kI * grid.vertical_wavenumber(p2) * g.g2.coeffs[s];
    }
  }
  return out;
}

SpectralField div_potential(const VectorSpectralField &g, const KernelTable &table) {
  require_same_shape(g.g1, g.g2);
  require_table_matches(g.g1, table);
  const Grid &grid = g.g1.grid;
  SpectralField out(grid, g.g1.alpha);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    const double a = static_cast<double>(grid.j1(p1)) + g.g1.alpha;
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      const std::size_t s = grid.index(p1, p2);
      const Complex d = kI * a * g.g1.coeffs[s] + kI * grid.vertical_wavenumber(p2) * g.g2.coeffs[s];
      out.coeffs[s] = table.multiplier(s) * d;
    }
  }
  return out;
}

VectorSpectralField contrast_flux(const SpectralField &u, const Problem &problem) {
  if (!(u.grid == problem.grid)) {
    throw ShapeMismatch("field grid differs from the problem grid");
  }
  const VectorSpectralField grad = grad_spectral(u);
  if (!problem.dealias) {
    auto w = multiply(problem.q_grid, to_physical(grad.g1), to_physical(grad.g2));
    return {to_spectral(u.grid, u.alpha, w[0]), to_spectral(u.grid, u.alpha, w[1])};
  }
  const Grid &fine = problem.fine_grid;
  const Samples g1 = to_physical(resample(grad.g1, fine.n1, fine.n2));
  const Samples g2 = to_physical(resample(grad.g2, fine.n1, fine.n2));
  auto w = multiply(problem.q_fine, g1, g2);
  const Grid &base = u.grid;
  return {resample(to_spectral(fine, u.alpha, w[0]), base.n1, base.n2),
          resample(to_spectral(fine, u.alpha, w[1]), base.n1, base.n2)};
}

std::array<Samples, 2> contrast_flux_samples(const SpectralField &u, const Problem &problem) {
  const VectorSpectralField grad = grad_spectral(u);
  return multiply(problem.q_grid, to_physical(grad.g1), to_physical(grad.g2));
}

SpectralField apply_contrast_potential(const SpectralField &u, const Problem &problem,
                                       const KernelTable &table) {
  return div_potential(contrast_flux(u, problem), table);
}

SpectralField apply_forward(const SpectralField &u, const Problem &problem, const KernelTable &table) {
  SpectralField out = apply_contrast_potential(u, problem, table);
  for (std::size_t s = 0; s < out.coeffs.size(); ++s) {
    out.coeffs[s] = u.coeffs[s] - out.coeffs[s];
  }
  return out;
}

Eigen::VectorXcd to_vector(const SpectralField &field) {
  return Eigen::Map<const Eigen::VectorXcd>(field.coeffs.data(),
                                            static_cast<Eigen::Index>(field.coeffs.size()));
}

SpectralField from_vector(const Grid &grid, double alpha, const Eigen::VectorXcd &v) {
  if (static_cast<std::size_t>(v.size()) != grid.size()) {
    throw ShapeMismatch("coefficient vector length does not match the grid");
  }
  SpectralField out(grid, alpha);
  Eigen::Map<Eigen::VectorXcd>(out.coeffs.data(), v.size()) = v;
  return out;
}

Eigen::MatrixXcd assemble_columns(const Grid &grid, double alpha, const CoefficientMap &map) {
  const std::size_t n = grid.size();
  if (n > kDenseSizeLimit) {
    std::ostringstream os;
    os << "dense assembly limited to " << kDenseSizeLimit << " unknowns, requested " << n;
    throw SizeGuard(os.str());
  }
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd m(dim, dim);
  SpectralField e(grid, alpha);
  for (std::size_t c = 0; c < n; ++c) {
    e.coeffs[c] = 1.0;
    m.col(static_cast<Eigen::Index>(c)) = to_vector(map(e));
    e.coeffs[c] = 0.0;
  }
  return m;
}

Eigen::MatrixXcd assemble_dense(const Problem &problem, const KernelTable &table) {
  return assemble_columns(problem.grid, problem.wave.alpha(),
                          [&](const SpectralField &u) { return apply_forward(u, problem, table); });
}

} // namespace grating
