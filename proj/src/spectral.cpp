#include "grating/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace grating {

namespace {

// FFTW planning is not thread-safe; plans are created once per shape under a
// lock and executed through the new-array interface afterwards.
class PlanCache {
public:
  static PlanCache &instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n1, int n2, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(n1, n2, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) {
      return it->second;
    }
    std::vector<Complex> scratch(static_cast<std::size_t>(n1) * n2);
    auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
    fftw_plan plan =
        fftw_plan_dft_2d(n1, n2, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache &) = delete;
  PlanCache &operator=(const PlanCache &) = delete;

private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto &[key, plan] : plans_) {
      fftw_destroy_plan(plan);
    }
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void fft_inplace(std::vector<Complex> &data, int n1, int n2, int sign) {
  fftw_plan plan = PlanCache::instance().get(n1, n2, sign);
  auto *buf = reinterpret_cast<fftw_complex *>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

double parity(long j) { return (j % 2 == 0) ? 1.0 : -1.0; }

} // namespace

SpectralField::SpectralField(const Grid &grid_, double alpha_)
    : grid(grid_), alpha(alpha_), coeffs(grid_.size(), Complex{}) {}

Complex &SpectralField::at(long j1, long j2) {
  const int p1 = Grid::slot(j1, grid.n1);
  const int p2 = Grid::slot(j2, grid.n2);
  if (p1 < 0 || p2 < 0) {
    throw ShapeMismatch("frequency index outside the grid band");
  }
  return coeffs[grid.index(p1, p2)];
}

Complex SpectralField::at(long j1, long j2) const {
  const int p1 = Grid::slot(j1, grid.n1);
  const int p2 = Grid::slot(j2, grid.n2);
  if (p1 < 0 || p2 < 0) {
    return Complex{};
  }
  return coeffs[grid.index(p1, p2)];
}

double SpectralField::norm_squared() const {
  double s = 0.0;
  for (const auto &c : coeffs) {
    s += std::norm(c);
  }
  return s;
}

SpectralField to_spectral(const Grid &grid, double alpha, std::span<const Complex> values) {
  if (values.size() != grid.size()) {
    throw ShapeMismatch("sample array does not match the grid");
  }
  SpectralField out(grid, alpha);
  auto &data = out.coeffs;
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    const Complex phase = std::exp(Complex(0.0, -alpha * grid.x1(m1)));
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      data[grid.index(m1, m2)] = values[grid.index(m1, m2)] * phase;
    }
  }
  fft_inplace(data, grid.n1, grid.n2, FFTW_FORWARD);
  const double scale = std::sqrt(4.0 * kPi * grid.rho_box) / static_cast<double>(grid.size());
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      data[grid.index(p1, p2)] *= scale * parity(grid.j1(p1) + grid.j2(p2));
    }
  }
  return out;
}

Samples to_physical(const SpectralField &field) {
  const Grid &grid = field.grid;
  if (field.coeffs.size() != grid.size()) {
    throw ShapeMismatch("coefficient array does not match the grid");
  }
  Samples data(grid.size());
  const double scale = 1.0 / std::sqrt(4.0 * kPi * grid.rho_box);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      const std::size_t idx = grid.index(p1, p2);
      data[idx] = field.coeffs[idx] * (scale * parity(grid.j1(p1) + grid.j2(p2)));
    }
  }
  fft_inplace(data, grid.n1, grid.n2, FFTW_BACKWARD);
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    const Complex phase = std::exp(Complex(0.0, field.alpha * grid.x1(m1)));
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      data[grid.index(m1, m2)] *= phase;
    }
  }
  return data;
}

SpectralField resample(const SpectralField &field, int n1, int n2) {
  SpectralField out(Grid(n1, n2, field.grid.rho_box), field.alpha);
  const Grid &src = field.grid;
  for (int p1 = 0; p1 < src.n1; ++p1) {
    const int q1 = Grid::slot(src.j1(p1), n1);
    if (q1 < 0) {
      continue;
    }
    for (int p2 = 0; p2 < src.n2; ++p2) {
      const int q2 = Grid::slot(src.j2(p2), n2);
      if (q2 < 0) {
        continue;
      }
      out.coeffs[out.grid.index(q1, q2)] = field.coeffs[src.index(p1, p2)];
    }
  }
  return out;
}

Complex basis_value(double alpha, double rho, long j1, long j2, Point2 x) {
  const double arg = (static_cast<double>(j1) + alpha) * x.x1 +
                     static_cast<double>(j2) * kPi * x.x2 / rho;
  return std::exp(Complex(0.0, arg)) / std::sqrt(4.0 * kPi * rho);
}

Samples basis_samples(const Grid &grid, double alpha, long j1, long j2) {
  Samples out(grid.size());
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      out[grid.index(m1, m2)] = basis_value(alpha, grid.rho_box, j1, j2, grid.node(m1, m2));
    }
  }
  return out;
}

Complex evaluate(const SpectralField &field, Point2 x) {
  const Grid &grid = field.grid;
  std::vector<Complex> e1(grid.n1);
  std::vector<Complex> e2(grid.n2);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    e1[p1] = std::exp(Complex(0.0, (static_cast<double>(grid.j1(p1)) + field.alpha) * x.x1));
  }
  for (int p2 = 0; p2 < grid.n2; ++p2) {
    e2[p2] = std::exp(Complex(0.0, grid.vertical_wavenumber(p2) * x.x2));
  }
  Complex sum{};
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    Complex row{};
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      row += field.coeffs[grid.index(p1, p2)] * e2[p2];
    }
    sum += row * e1[p1];
  }
  return sum / std::sqrt(4.0 * kPi * grid.rho_box);
}

void require_same_shape(const SpectralField &a, const SpectralField &b) {
  if (!(a.grid == b.grid) || a.coeffs.size() != b.coeffs.size()) {
    throw ShapeMismatch("spectral fields live on different grids");
  }
}

} // namespace grating
