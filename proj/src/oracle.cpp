#include "grating/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include "grating/operator.hpp"
#include "grating/postprocess.hpp"
#include "grating/solver.hpp"

namespace grating {

double smooth_bump(double t) {
  if (std::abs(t) >= 1.0) {
    return 0.0;
  }
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

QuadratureSource grid_source(const Grid &grid, std::span<const Complex> samples) {
  if (samples.size() != grid.size()) {
    throw ShapeMismatch("sample array does not match the grid");
  }
  QuadratureSource s;
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      const Complex v = samples[grid.index(m1, m2)];
      if (v == Complex{}) {
        continue;
      }
      s.points.push_back(grid.node(m1, m2));
      s.values.push_back(v);
      s.weights.push_back(grid.cell_area());
    }
  }
  return s;
}

std::vector<Complex> dense_quadrature_potential(const QuadratureSource &source,
                                                std::span<const Point2> targets, double k,
                                                double alpha, const QuadratureOptions &opts) {
  if (source.points.size() != source.values.size() || source.points.size() != source.weights.size()) {
    throw ShapeMismatch("quadrature source arrays differ in length");
  }
  std::vector<Complex> out;
  out.reserve(targets.size());
  for (const auto &x : targets) {
    double sep = std::numeric_limits<double>::infinity();
    for (const auto &y : source.points) {
      sep = std::min(sep, std::abs(x.x2 - y.x2));
    }
    if (source.points.empty()) {
      out.emplace_back();
      continue;
    }
    if (sep < opts.min_separation) {
      std::ostringstream os;
      os << "target at x2 = " << x.x2 << " is closer than " << opts.min_separation
         << " to the source";
      throw EvaluationGap(os.str());
    }
    const int J = greens_truncation_for(sep, k, alpha, opts.tail_tolerance);
    std::vector<Complex> betas;
    for (long j = -J; j <= J; ++j) {
      betas.push_back(beta(j, k, alpha));
    }
    Complex sum{};
    for (std::size_t i = 0; i < source.points.size(); ++i) {
      const Point2 &y = source.points[i];
      const double d1 = x.x1 - y.x1;
      const double d2 = std::abs(x.x2 - y.x2);
      Complex g{};
      for (long j = -J; j <= J; ++j) {
        const double a = static_cast<double>(j) + alpha;
        const Complex b = betas[static_cast<std::size_t>(j + J)];
        g += std::exp(kI * (a * d1 + b * d2)) / b;
      }
      sum += g * source.values[i] * source.weights[i];
    }
    out.push_back(sum * kI / (4.0 * kPi));
  }
  return out;
}

double helmholtz_residual(const SpectralField &field, const SpectralField &source, double k,
                          double x2_limit) {
  require_same_shape(field, source);
  const Grid &grid = field.grid;
  const Samples w = to_physical(field);
  const Samples s = to_physical(source);
  const double h1 = grid.step1();
  const double h2 = grid.step2();
  const Complex wrap = std::exp(Complex(0.0, 2.0 * kPi * field.alpha));
  double worst = 0.0;
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    const int left = (m1 + grid.n1 - 1) % grid.n1;
    const int right = (m1 + 1) % grid.n1;
    const Complex left_phase = m1 == 0 ? 1.0 / wrap : Complex(1.0);
    const Complex right_phase = m1 == grid.n1 - 1 ? wrap : Complex(1.0);
    for (int m2 = 1; m2 + 1 < grid.n2; ++m2) {
      if (std::abs(grid.x2(m2)) > x2_limit) {
        continue;
      }
      const Complex c = w[grid.index(m1, m2)];
      const Complex lap =
          (left_phase * w[grid.index(left, m2)] - 2.0 * c + right_phase * w[grid.index(right, m2)]) /
              (h1 * h1) +
          (w[grid.index(m1, m2 - 1)] - 2.0 * c + w[grid.index(m1, m2 + 1)]) / (h2 * h2);
      worst = std::max(worst, std::abs(lap + k * k * c + s[grid.index(m1, m2)]));
    }
  }
  return worst;
}

SlabResult slab_reference(const SlabSpec &spec) {
  if (!(spec.b > spec.a)) {
    throw GeometryError("slab requires b > a");
  }
  const Complex mu = 1.0 + spec.q;
  if (std::abs(mu) == 0.0) {
    throw GeometryError("slab contrast q = -1 makes the permittivity infinite");
  }
  const Complex beta0 = vertical_wavenumber(Complex(spec.k * spec.k, 0.0), spec.alpha, 0);
  const double L = spec.b - spec.a;
  const Complex kappa2 = spec.k * spec.k / mu - spec.alpha * spec.alpha;

  SlabResult res;
  Eigen::Matrix2cd T;
  if (std::abs(kappa2) <= 1e-14 * std::max(1.0, spec.k * spec.k)) {
    res.linear_branch = true;
    T << 1.0, L / mu, 0.0, 1.0;
  } else {
    const Complex kappa = std::sqrt(kappa2);
    const Complex c = std::cos(kappa * L);
    const Complex s = std::sin(kappa * L);
    T << c, s / (mu * kappa), -mu * kappa * s, c;
  }
  // Transmitted side: v = t exp(-i beta0 (x2 + rho_ref)), flux p = -i beta0 v.
  const Complex va = std::exp(-kI * beta0 * (spec.a + spec.rho_ref));
  const Eigen::Vector2cd s = T * Eigen::Vector2cd(va, -kI * beta0 * va);
  const Complex inc = std::exp(-kI * beta0 * spec.b);
  const Complex up = std::exp(kI * beta0 * (spec.b - spec.rho_ref));
  res.t = 2.0 * kI * beta0 * inc / (kI * beta0 * s(0) - s(1));
  res.r = (res.t * s(0) - inc) / up;
  res.R = std::norm(res.r);
  res.T = std::norm(res.t);
  return res;
}

ContrastField smooth_test_contrast() {
  ContrastField c;
  c.sampler = [](Point2 x) -> Mat2c {
    const double v = 2.0 * smooth_bump(2.0 * x.x2) * (1.0 + 0.3 * std::cos(x.x1));
    return scalar_matrix(Complex(v, 0.0));
  };
  c.support_half_height = 0.5;
  c.isotropic = true;
  return c;
}

namespace {

std::vector<double> weighted_singular_values(const Eigen::MatrixXcd &m, const Grid &grid,
                                             double alpha) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    const double a = static_cast<double>(grid.j1(p1)) + alpha;
    for (int p2 = 0; p2 < grid.n2; ++p2) {
      const double c = grid.vertical_wavenumber(p2);
      w(static_cast<Eigen::Index>(grid.index(p1, p2))) = std::sqrt(1.0 + a * a + c * c);
    }
  }
  const Eigen::MatrixXcd scaled = w.asDiagonal() * m * w.cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(scaled);
  const Eigen::VectorXd s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

} // namespace

CompactnessProfile compactness_profile(const Problem &problem, const KernelTable &table_a,
                                       const KernelTable &table_b) {
  const Grid &grid = problem.grid;
  if (grid.n1 > kOracleGridLimit || grid.n2 > kOracleGridLimit) {
    throw SizeGuard("oracle grids are limited to 64 points per direction");
  }
  const double alpha = problem.wave.alpha();
  const Eigen::MatrixXcd ma = assemble_columns(grid, alpha, [&](const SpectralField &u) {
    return apply_contrast_potential(u, problem, table_a);
  });
  const Eigen::MatrixXcd mb = assemble_columns(grid, alpha, [&](const SpectralField &u) {
    return apply_contrast_potential(u, problem, table_b);
  });
  CompactnessProfile p;
  p.difference = weighted_singular_values(ma - mb, grid, alpha);
  p.operator_k = weighted_singular_values(ma, grid, alpha);
  return p;
}

CompactnessProfile compactness_indicator(int n, const IncidentWave &wave) {
  if (n > kOracleGridLimit) {
    throw SizeGuard("oracle grids are limited to 64 points per direction");
  }
  const Grid grid(n, n, 1.0);
  const Problem problem = build_problem(wave, smooth_test_contrast(), grid);
  const KernelTable tk = kernel_table(grid, wave.k(), wave.alpha());
  const KernelTable ti = kernel_table(grid, Complex(-1.0, 0.0), wave.alpha());
  return compactness_profile(problem, tk, ti);
}

std::string slab_json(const SlabSpec &spec, const SlabResult &result) {
  nlohmann::ordered_json j;
  j["q"] = {spec.q.real(), spec.q.imag()};
  j["a"] = spec.a;
  j["b"] = spec.b;
  j["k"] = spec.k;
  j["alpha"] = spec.alpha;
  j["rho_ref"] = spec.rho_ref;
  j["r"] = {result.r.real(), result.r.imag()};
  j["t"] = {result.t.real(), result.t.imag()};
  j["R"] = result.R;
  j["T"] = result.T;
  j["linear_branch"] = result.linear_branch;
  return j.dump(2) + "\n";
}

std::string compactness_json(const CompactnessProfile &profile) {
  nlohmann::ordered_json j;
  j["difference"] = profile.difference;
  j["operator_k"] = profile.operator_k;
  return j.dump(2) + "\n";
}

namespace {

double ratio16(const std::vector<double> &s) { return s.size() > 15 ? s[15] / s[0] : 0.0; }

} // namespace

GateResult multiplier_gate() {
  GateResult g{"multiplier constant", false, 0.0, 1e-6, ""};
  const double k = 1.0;
  const double alpha = 0.3;
  const double w = 0.25;
  auto profile = [&](Point2 y) {
    const double t = y.x2 / w;
    const double s = std::abs(t) < 1.0 ? std::pow(1.0 - t * t, 8) : 0.0;
    return std::exp(Complex(0.0, alpha * y.x1)) *
           (1.0 + 0.5 * std::cos(y.x1) + 0.3 * std::sin(2.0 * y.x1)) * s;
  };

  // 16 equispaced points in x1, 16 Gauss-Legendre points across the strip.
  using Gauss = boost::math::quadrature::gauss<double, 16>;
  QuadratureSource src;
  for (int m1 = 0; m1 < 16; ++m1) {
    const double y1 = -kPi + 2.0 * kPi * m1 / 16;
    for (std::size_t i = 0; i < Gauss::abscissa().size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const Point2 y{y1, sgn * w * Gauss::abscissa()[i]};
        src.points.push_back(y);
        src.values.push_back(profile(y));
        src.weights.push_back(2.0 * kPi / 16 * w * Gauss::weights()[i]);
      }
    }
  }
  std::vector<Point2> targets;
  for (int i = 0; i < 20; ++i) {
    targets.push_back({-kPi + 2.0 * kPi * (i + 0.5) / 20, 1.6 + 0.4 * i / 19.0});
  }
  const auto ref = dense_quadrature_potential(src, targets, k, alpha, {1.3, 1e-10});

  const Grid grid(16, 512, 2.5);
  Samples g_samples(grid.size());
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      g_samples[grid.index(m1, m2)] = profile(grid.node(m1, m2));
    }
  }
  const SpectralField v =
      volume_potential(to_spectral(grid, alpha, g_samples), kernel_table(grid, k, alpha));
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    err = std::max(err, std::abs(evaluate(v, targets[i]) - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  g.value = err / scale;
  g.passed = g.value < g.tolerance;
  g.detail = "max relative deviation between spectral and quadrature potentials";
  return g;
}

GateResult helmholtz_gate(GateLevel level) {
  // Step halvings below 128 are still pre-asymptotic for this bump.
  GateResult g{"Helmholtz residual order", false, 0.0, 1.9, ""};
  const double k = 1.0;
  const double alpha = 0.3;
  const double h = 0.4;
  const double rho = 1.0;
  const std::vector<int> sizes =
      level == GateLevel::Full ? std::vector<int>{128, 256, 512, 1024} : std::vector<int>{128, 256, 512};
  std::vector<double> res;
  for (int n : sizes) {
    const Grid grid(n, n, rho);
    Samples f(grid.size());
    for (int m1 = 0; m1 < n; ++m1) {
      for (int m2 = 0; m2 < n; ++m2) {
        const Point2 x = grid.node(m1, m2);
        f[grid.index(m1, m2)] = std::exp(Complex(0.0, alpha * x.x1)) *
                                (1.0 + 0.5 * std::cos(x.x1)) * smooth_bump(x.x2 / h);
      }
    }
    const SpectralField fs = to_spectral(grid, alpha, f);
    const SpectralField w = volume_potential(fs, kernel_table(grid, k, alpha));
    res.push_back(helmholtz_residual(w, fs, k, rho - h - 2.0 * grid.step2()));
  }
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    order = std::min(order, std::log2(res[i] / res[i + 1]));
  }
  g.value = order;
  g.passed = order >= g.tolerance;
  std::ostringstream os;
  os << "residuals";
  for (std::size_t i = 0; i < res.size(); ++i) {
    os << " N=" << sizes[i] << ":" << res[i];
  }
  g.detail = os.str();
  return g;
}

GateResult slab_gate(GateLevel level) {
  GateResult g{"slab efficiencies", false, 0.0, 1e-3, ""};
  const double k = 0.9;
  // Interface nodes fall on the grid, so efficiencies converge at first order.
  const int n2 = level == GateLevel::Full ? 1024 : 512;
  const Grid grid(8, n2, 1.0);
  const IncidentWave wave = IncidentWave::from_angle(k, 0.0);
  const Problem problem =
      build_problem(wave, slab_contrast(scalar_matrix(3.0), -0.5, 0.5), grid);
  const KernelTable table = kernel_table(grid, k, wave.alpha());
  const Solution sol = solve(problem, table);
  if (!sol.converged()) {
    g.detail = "GMRES did not converge";
    return g;
  }
  const auto above = rayleigh_coefficients(sol, problem, table, Side::Above);
  const auto below = rayleigh_coefficients(sol, problem, table, Side::Below);
  const EfficiencyTable eff = efficiencies(above, below, wave);
  const SlabResult ref = slab_reference({3.0, -0.5, 0.5, k, 0.0, problem.rho_ref});
  double r0 = 0.0;
  double t0 = 0.0;
  for (const auto &row : eff.rows) {
    if (row.j == 0) {
      r0 = row.e_refl;
      t0 = row.e_trans;
    }
  }
  g.value = std::max(std::abs(r0 - ref.R), std::abs(t0 - ref.T));
  g.passed = g.value < g.tolerance;
  std::ostringstream os;
  os << "R=" << r0 << " (reference " << ref.R << "), T=" << t0 << " (reference " << ref.T
     << "), k=" << k << ", N2=" << n2;
  g.detail = os.str();
  return g;
}

GateResult compactness_gate() {
  GateResult g{"compactness indicator", false, 0.0, 0.0, ""};
  const auto p = compactness_indicator(16, IncidentWave::from_angle(1.0, std::asin(0.3)));
  const double diff = ratio16(p.difference);
  const double full = ratio16(p.operator_k);
  g.value = diff;
  g.tolerance = full;
  g.passed = diff < full;
  std::ostringstream os;
  os << "sigma16/sigma1: difference " << diff << ", L_k " << full;
  g.detail = os.str();
  return g;
}

std::vector<GateResult> run_gates(GateLevel level) {
  return {multiplier_gate(), helmholtz_gate(level), slab_gate(level), compactness_gate()};
}

} // namespace grating
