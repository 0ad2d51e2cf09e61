#include "grating/problem.hpp"

#include "grating/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace grating {

namespace {

double wrap_period(double x1) {
  double t = std::fmod(x1 + kPi, 2.0 * kPi);
  if (t < 0.0) {
    t += 2.0 * kPi;
  }
  return t - kPi;
}

// Indicator of the open interval (lo, hi). A node that lands exactly on an
// interface carrying a jump of grad u breaks discrete energy conservation,
// so end points are left outside.
double interval_weight(double x, double lo, double hi) {
  return x > lo && x < hi ? 1.0 : 0.0;
}

// Indicator of [lo, hi): the shared interface of two stacked layers belongs
// to the upper one.
double layer_weight(double x, double lo, double hi) {
  return x >= lo && x < hi ? 1.0 : 0.0;
}

bool is_real_scalar(const Mat2c &q) {
  const double scale = std::max(1.0, q.norm());
  return std::abs(q(0, 1)) <= 1e-14 * scale && std::abs(q(1, 0)) <= 1e-14 * scale &&
         std::abs(q(0, 0) - q(1, 1)) <= 1e-14 * scale && std::abs(q(0, 0).imag()) <= 1e-14 * scale;
}

void require_symmetric(const Mat2c &q) {
  if (std::abs(q(0, 1) - q(1, 0)) > 1e-12 * q.norm()) {
    throw NonSymmetric("contrast matrix is not symmetric (Q12 != Q21)");
  }
}

GraphGeometry flat_geometry(double lower, double upper) {
  return GraphGeometry{[lower](double) { return lower; }, [upper](double) { return upper; }};
}

} // namespace

IncidentWave::IncidentWave(double k, double d1, double d2) : k_(k), d1_(d1), d2_(d2) {
  if (!(k > 0.0)) {
    throw GeometryError("wavenumber k must be positive");
  }
  if (std::abs(std::hypot(d1, d2) - 1.0) > 1e-12) {
    throw GeometryError("incident direction must be a unit vector");
  }
  if (!(d2 < 0.0)) {
    throw GeometryError("incident direction must point downwards (d2 < 0)");
  }
}

IncidentWave IncidentWave::from_angle(double k, double theta) {
  return IncidentWave(k, std::sin(theta), -std::cos(theta));
}

void check_non_resonance(double k, double alpha) {
  const long bound = static_cast<long>(std::ceil(k + std::abs(alpha) + 1.0));
  const double scale = std::max(1.0, k * k);
  for (long j = -bound; j <= bound; ++j) {
    const double a = static_cast<double>(j) + alpha;
    const double gap = std::abs(k * k - a * a);
    if (gap < kAnomalyTolerance * scale) {
      throw RayleighAnomaly(j, gap);
    }
  }
}

std::vector<IncidentSample> incident_field(const IncidentWave &wave, std::span<const Point2> points) {
  std::vector<IncidentSample> out;
  out.reserve(points.size());
  const double k = wave.k();
  for (const auto &p : points) {
    const Complex u = std::exp(kI * (k * (p.x1 * wave.d1() + p.x2 * wave.d2())));
    Vec2c g;
    g << kI * k * wave.d1() * u, kI * k * wave.d2() * u;
    out.push_back({u, g});
  }
  return out;
}

Mat2c scalar_matrix(Complex q) {
  Mat2c m;
  m << q, Complex{}, Complex{}, q;
  return m;
}

ContrastField zero_contrast() {
  ContrastField c;
  c.sampler = [](Point2) -> Mat2c { return Mat2c::Zero(); };
  c.support_half_height = 0.0;
  c.isotropic = true;
  return c;
}

ContrastField slab_contrast(const Mat2c &q, double lower, double upper) {
  if (!(upper > lower)) {
    throw GeometryError("slab requires upper > lower");
  }
  require_symmetric(q);
  ContrastField c;
  c.sampler = [q, lower, upper](Point2 x) -> Mat2c {
    return q * interval_weight(x.x2, lower, upper);
  };
  c.support_half_height = std::max(std::abs(lower), std::abs(upper));
  c.isotropic = is_real_scalar(q);
  c.geometry = flat_geometry(lower, upper);
  return c;
}

ContrastField two_layer_contrast(const Mat2c &q_lower, const Mat2c &q_upper, double lower,
                                 double interface, double upper) {
  if (!(lower < interface && interface < upper)) {
    throw GeometryError("two-layer contrast requires lower < interface < upper");
  }
  require_symmetric(q_lower);
  require_symmetric(q_upper);
  ContrastField c;
  c.sampler = [=](Point2 x) -> Mat2c {
    if (x.x2 <= lower) {
      return Mat2c::Zero();
    }
    return q_lower * layer_weight(x.x2, lower, interface) +
           q_upper * layer_weight(x.x2, interface, upper);
  };
  c.support_half_height = std::max(std::abs(lower), std::abs(upper));
  c.isotropic = is_real_scalar(q_lower) && is_real_scalar(q_upper);
  c.geometry = flat_geometry(lower, upper);
  return c;
}

ContrastField rectangle_contrast(const Mat2c &q, Point2 center, double width, double height) {
  if (!(width > 0.0 && height > 0.0)) {
    throw GeometryError("rectangle requires positive width and height");
  }
  require_symmetric(q);
  const bool full_width = width >= 2.0 * kPi;
  ContrastField c;
  c.sampler = [=](Point2 x) -> Mat2c {
    const double wx =
        full_width ? 1.0 : interval_weight(wrap_period(x.x1 - center.x1), -width / 2, width / 2);
    const double wy = interval_weight(x.x2 - center.x2, -height / 2, height / 2);
    return q * (wx * wy);
  };
  c.support_half_height = std::max(std::abs(center.x2 - height / 2), std::abs(center.x2 + height / 2));
  c.isotropic = is_real_scalar(q);
  if (full_width) {
    c.geometry = flat_geometry(center.x2 - height / 2, center.x2 + height / 2);
  }
  return c;
}

ContrastField circle_contrast(const Mat2c &q, Point2 center, double radius) {
  if (!(radius > 0.0) || radius >= kPi) {
    throw GeometryError("circle radius must lie in (0, pi)");
  }
  require_symmetric(q);
  ContrastField c;
  c.sampler = [=](Point2 x) -> Mat2c {
    const double dx = wrap_period(x.x1 - center.x1);
    const double dy = x.x2 - center.x2;
    const double r2 = dx * dx + dy * dy;
    return r2 < radius * radius ? q : Mat2c::Zero();
  };
  c.support_half_height = std::max(std::abs(center.x2 - radius), std::abs(center.x2 + radius));
  c.isotropic = is_real_scalar(q);
  return c;
}

ContrastField contrast_from_permittivity(const MatrixSampler &eps_inv, const Grid &scan_grid) {
  double max_abs_x2 = -1.0;
  bool isotropic = true;
  for (int m1 = 0; m1 < scan_grid.n1; ++m1) {
    for (int m2 = 0; m2 < scan_grid.n2; ++m2) {
      const Point2 x = scan_grid.node(m1, m2);
      const Mat2c q = eps_inv(x) - Mat2c::Identity();
      require_symmetric(q);
      if (q.norm() == 0.0) {
        continue;
      }
      max_abs_x2 = std::max(max_abs_x2, std::abs(x.x2));
      isotropic = isotropic && is_real_scalar(q);
    }
  }
  ContrastField c;
  // The support is bounded by the first all-zero node row beyond the last
  // non-zero one.
  const double h =
      max_abs_x2 < 0.0 ? 0.0 : std::min(max_abs_x2 + scan_grid.step2(), scan_grid.rho_box);
  c.support_half_height = h;
  c.isotropic = isotropic;
  c.sampler = [eps_inv, h](Point2 x) -> Mat2c {
    if (std::abs(x.x2) > h) {
      return Mat2c::Zero();
    }
    return eps_inv(x) - Mat2c::Identity();
  };
  return c;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "raster files assume a little-endian host");

template <class T> T take(std::ifstream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) {
    throw ShapeMismatch("truncated raster file");
  }
  return v;
}

template <class T> void put(std::ofstream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

} // namespace

void write_raster(const std::filesystem::path &path, const Grid &grid, std::span<const Mat2c> cells) {
  if (cells.size() != grid.size()) {
    throw ShapeMismatch("raster cell count does not match the grid");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  put<std::int64_t>(os, grid.n1);
  put<std::int64_t>(os, grid.n2);
  put<double>(os, grid.rho_box);
  for (const auto &q : cells) {
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        put<double>(os, q(r, s).real());
        put<double>(os, q(r, s).imag());
      }
    }
  }
}

ContrastField raster_contrast(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("cannot open raster file " + path.string());
  }
  const auto n1 = take<std::int64_t>(is);
  const auto n2 = take<std::int64_t>(is);
  const double rho = take<double>(is);
  const Grid grid(static_cast<int>(n1), static_cast<int>(n2), rho);
  auto cells = std::make_shared<std::vector<Mat2c>>(grid.size());
  double h = 0.0;
  bool isotropic = true;
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      Mat2c q;
      for (int r = 0; r < 2; ++r) {
        for (int s = 0; s < 2; ++s) {
          const double re = take<double>(is);
          const double im = take<double>(is);
          q(r, s) = Complex(re, im);
        }
      }
      require_symmetric(q);
      (*cells)[grid.index(m1, m2)] = q;
      if (q.norm() != 0.0) {
        const double lo = grid.x2(m2);
        const double hi = lo + grid.step2();
        h = std::max({h, std::abs(lo), std::abs(hi)});
        isotropic = isotropic && is_real_scalar(q);
      }
    }
  }
  ContrastField c;
  c.support_half_height = h;
  c.isotropic = isotropic;
  c.sampler = [cells, grid](Point2 x) -> Mat2c {
    const double t2 = (x.x2 + grid.rho_box) / (2.0 * grid.rho_box) * grid.n2;
    const long m2 = static_cast<long>(std::floor(t2 + 1e-9));
    if (m2 < 0 || m2 >= grid.n2) {
      return Mat2c::Zero();
    }
    const double t1 = (wrap_period(x.x1) + kPi) / (2.0 * kPi) * grid.n1;
    long m1 = static_cast<long>(std::floor(t1 + 1e-9));
    m1 = ((m1 % grid.n1) + grid.n1) % grid.n1;
    return (*cells)[grid.index(static_cast<int>(m1), static_cast<int>(m2))];
  };
  return c;
}

double default_rho_box(double support_half_height) {
  return support_half_height > 0.0 ? 2.0 * support_half_height : 1.0;
}

bool Problem::node_in_support(std::size_t idx) const { return q_grid[idx].norm() != 0.0; }

Problem build_problem(const IncidentWave &wave, const ContrastField &contrast, const Grid &grid,
                      const BuildOptions &options) {
  const double h = contrast.support_half_height;
  if (grid.rho_box < 2.0 * h) {
    std::ostringstream os;
    os << "computational box half-height " << grid.rho_box
       << " is smaller than twice the support half-height " << h;
    throw GeometryError(os.str());
  }
  check_non_resonance(wave.k(), wave.alpha());

  const double rho_ref = options.rho_ref.value_or(h + 0.1 * (grid.rho_box - h));
  if (!(rho_ref > h) || rho_ref > grid.rho_box) {
    throw GeometryError("Rayleigh reference height must satisfy h < rho_ref <= rho_box");
  }

  auto sample = [&](const Grid &g) {
    std::vector<Mat2c> q(g.size());
    for (int m1 = 0; m1 < g.n1; ++m1) {
      for (int m2 = 0; m2 < g.n2; ++m2) {
        const Point2 x = g.node(m1, m2);
        Mat2c value = contrast.sampler(x);
        if (std::abs(x.x2) > h && value.norm() != 0.0) {
          throw GeometryError("contrast sampler is non-zero outside its declared support");
        }
        q[g.index(m1, m2)] = value;
      }
    }
    return q;
  };

  Problem p{wave, contrast, grid, sample(grid), rho_ref, options.dealias, Grid{}, {}};
  if (options.dealias) {
    if (grid.n1 % 4 != 0 || grid.n2 % 4 != 0) {
      throw GeometryError("3/2-rule dealiasing needs mode counts divisible by 4");
    }
    p.fine_grid = Grid(3 * grid.n1 / 2, 3 * grid.n2 / 2, grid.rho_box);
    p.q_fine = sample(p.fine_grid);
  }
  return p;
}

} // namespace grating
