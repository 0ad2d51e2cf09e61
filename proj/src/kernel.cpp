#include "grating/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace grating {

Complex vertical_wavenumber(Complex k2, double alpha_j, long order) {
  const Complex radicand = k2 - alpha_j * alpha_j;
  const double scale = std::max(1.0, std::abs(k2));
  if (std::abs(radicand) < kAnomalyTolerance * scale) {
    throw RayleighAnomaly(order, std::abs(radicand));
  }
  Complex root = std::sqrt(radicand);
  if (root.imag() < 0.0) {
    root = -root;
  }
  if (root.imag() == 0.0 && root.real() < 0.0) {
    root = -root;
  }
  return root;
}

Complex beta(long j1, double k, double alpha) {
  return vertical_wavenumber(Complex(k * k, 0.0), static_cast<double>(j1) + alpha, j1);
}

Complex kernel_coefficient_generic(long j1, long j2, Complex k2, double alpha, double rho) {
  const double alpha_j = static_cast<double>(j1) + alpha;
  const double c = static_cast<double>(j2) * kPi / rho;
  const Complex lambda = k2 - alpha_j * alpha_j - c * c;
  const Complex b = vertical_wavenumber(k2, alpha_j, j1);
  const double sign = (j2 % 2 == 0) ? 1.0 : -1.0;
  return (sign * std::exp(kI * b * rho) - 1.0) / (std::sqrt(4.0 * kPi * rho) * lambda);
}

Complex kernel_coefficient_degenerate(long j2, double rho) {
  // The coefficient is even in j2, so the limit carries |j2|.
  const double mag = static_cast<double>(std::abs(j2));
  return kI / (4.0 * mag) * std::pow(rho / kPi, 1.5);
}

KernelCoefficient kernel_coefficient(long j1, long j2, Complex k2, double alpha, double rho) {
  const double alpha_j = static_cast<double>(j1) + alpha;
  const double c = static_cast<double>(j2) * kPi / rho;
  const Complex lambda = k2 - alpha_j * alpha_j - c * c;
  const double scale = std::max(1.0, std::abs(k2));
  if (std::abs(lambda) <= kDegenerateTolerance * scale) {
    if (j2 == 0) {
      throw DegenerateAtZeroJ2("lambda_j vanishes with j2 = 0; the non-resonance check "
                               "should have rejected this wavenumber");
    }
    // Validate the order itself even though beta does not enter the value.
    vertical_wavenumber(k2, alpha_j, j1);
    return {kernel_coefficient_degenerate(j2, rho), true};
  }
  return {kernel_coefficient_generic(j1, j2, k2, alpha, rho), false};
}

Complex kernel_coefficient(long j1, long j2, double k, double alpha, double rho) {
  return kernel_coefficient(j1, j2, Complex(k * k, 0.0), alpha, rho).value;
}

Complex KernelTable::at(long j1, long j2) const {
  const int p1 = Grid::slot(j1, grid.n1);
  const int p2 = Grid::slot(j2, grid.n2);
  if (p1 < 0 || p2 < 0) {
    throw ShapeMismatch("kernel index outside the table");
  }
  return coeffs[grid.index(p1, p2)];
}

KernelTable kernel_table(const Grid &grid, Complex k2, double alpha) {
  KernelTable table;
  table.grid = grid;
  table.k2 = k2;
  table.alpha = alpha;
  table.coeffs.resize(grid.size());
  table.convolution_scale = std::sqrt(4.0 * kPi * grid.rho_box);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    vertical_wavenumber(k2, static_cast<double>(grid.j1(p1)) + alpha, grid.j1(p1));
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      const auto c = kernel_coefficient(grid.j1(p1), grid.j2(p2), k2, alpha, grid.rho_box);
      table.coeffs[grid.index(p1, p2)] = c.value;
      if (c.degenerate) {
        table.degenerate_modes.emplace_back(grid.j1(p1), grid.j2(p2));
      }
    }
  }
  std::sort(table.degenerate_modes.begin(), table.degenerate_modes.end());
  return table;
}

KernelTable kernel_table(const Grid &grid, double k, double alpha) {
  return kernel_table(grid, Complex(k * k, 0.0), alpha);
}

double weighted_shell_maximum(const KernelTable &table, int radius) {
  const Grid &g = table.grid;
  double best = 0.0;
  for (int p1 = 0; p1 < g.n1; ++p1) {
    for (int p2 = 0; p2 < g.n2; ++p2) {
      const long j1 = g.j1(p1);
      const long j2 = g.j2(p2);
      if (std::max(std::abs(j1), std::abs(j2)) != radius) {
        continue;
      }
      const double a = static_cast<double>(j1) + table.alpha;
      const double c = static_cast<double>(j2) * kPi / g.rho_box;
      best = std::max(best, std::abs(table.coeffs[g.index(p1, p2)]) * (1.0 + a * a + c * c));
    }
  }
  return best;
}

double greens_tail_bound(double x2, double k, double alpha, int truncation) {
  double bound = 0.0;
  for (long j : {static_cast<long>(truncation) + 1, -static_cast<long>(truncation) - 1}) {
    const Complex b = beta(j, k, alpha);
    bound = std::max(bound, std::exp(-b.imag() * std::abs(x2)) / (4.0 * kPi * std::abs(b)));
  }
  return bound;
}

int greens_truncation_for(double x2, double k, double alpha, double tol) {
  if (std::abs(x2) < 1e-3) {
    throw SlowConvergence("Green's series converges too slowly for |x2| < 1e-3");
  }
  int J = static_cast<int>(std::ceil(k + std::abs(alpha))) + 1;
  while (greens_tail_bound(x2, k, alpha, J) >= tol) {
    J += 1 + J / 8;
    if (J > 1000000) {
      throw SlowConvergence("Green's series truncation exceeds 1e6 terms");
    }
  }
  return J;
}

SeriesValue greens_series(Point2 x, double k, double alpha, int truncation) {
  if (std::abs(x.x2) < 1e-3) {
    throw SlowConvergence("Green's series converges too slowly for |x2| < 1e-3");
  }
  SeriesValue out;
  const double ax2 = std::abs(x.x2);
  for (long j = -truncation; j <= truncation; ++j) {
    const double a = static_cast<double>(j) + alpha;
    const Complex b = beta(j, k, alpha);
    out.value += std::exp(kI * (a * x.x1 + b * ax2)) / b;
  }
  out.value *= kI / (4.0 * kPi);
  out.tail_bound = greens_tail_bound(x.x2, k, alpha, truncation);
  out.terms = 2 * truncation + 1;
  return out;
}

SeriesGradient greens_series_gradient(Point2 x, double k, double alpha, int truncation) {
  if (std::abs(x.x2) < 1e-3) {
    throw SlowConvergence("Green's series converges too slowly for |x2| < 1e-3");
  }
  SeriesGradient out;
  const double ax2 = std::abs(x.x2);
  const double sgn = x.x2 > 0.0 ? 1.0 : -1.0;
  for (long j = -truncation; j <= truncation; ++j) {
    const double a = static_cast<double>(j) + alpha;
    const Complex b = beta(j, k, alpha);
    const Complex e = std::exp(kI * (a * x.x1 + b * ax2));
    out.d1 += kI * a * e / b;
    out.d2 += kI * sgn * e;
  }
  out.d1 *= kI / (4.0 * kPi);
  out.d2 *= kI / (4.0 * kPi);
  out.tail_bound = greens_tail_bound(x.x2, k, alpha, truncation);
  return out;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary snapshots assume a little-endian host");

template <class T> void put(std::ofstream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T> T take(std::ifstream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) {
    throw ShapeMismatch("truncated kernel table file");
  }
  return v;
}

} // namespace

void write_kernel_table(const KernelTable &table, const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  put<std::int64_t>(os, table.grid.n1);
  put<std::int64_t>(os, table.grid.n2);
  put<double>(os, table.k2.real());
  put<double>(os, table.k2.imag());
  put<double>(os, table.alpha);
  put<double>(os, table.grid.rho_box);
  for (const auto &c : table.coeffs) {
    put<double>(os, c.real());
    put<double>(os, c.imag());
  }
}

KernelTable read_kernel_table(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("cannot open " + path.string());
  }
  KernelTable table;
  const auto n1 = take<std::int64_t>(is);
  const auto n2 = take<std::int64_t>(is);
  const double k2re = take<double>(is);
  const double k2im = take<double>(is);
  table.alpha = take<double>(is);
  const double rho = take<double>(is);
  table.grid = Grid(static_cast<int>(n1), static_cast<int>(n2), rho);
  table.k2 = Complex(k2re, k2im);
  table.convolution_scale = std::sqrt(4.0 * kPi * rho);
  table.coeffs.resize(table.grid.size());
  for (auto &c : table.coeffs) {
    const double re = take<double>(is);
    const double im = take<double>(is);
    c = Complex(re, im);
  }
  return table;
}

} // namespace grating
