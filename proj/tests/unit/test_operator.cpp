#include <doctest.h>

#include <cmath>

#include "grating/operator.hpp"
#include "grating/oracle.hpp"
#include "support.hpp"

using namespace grating;
using grating::testing::Gen;
using grating::testing::max_abs;
using grating::testing::max_abs_diff;

namespace {

// phi_j at x written out directly.
Complex phi(double alpha, double rho, long j1, long j2, Point2 x) {
  return std::exp(Complex(0.0, (j1 + alpha) * x.x1 + j2 * kPi * x.x2 / rho)) / std::sqrt(4.0 * kPi * rho);
}

// Independent dense model of u -> u - div V_k(Q grad u) built from explicit
// sums over nodes and modes, without any FFT.
Eigen::MatrixXcd explicit_forward(const Grid &g, double alpha, const std::vector<Mat2c> &q, double k) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<long> j1s;
  std::vector<long> j2s;
  for (int p1 = 0; p1 < g.n1; ++p1) {
    for (int p2 = 0; p2 < g.n2; ++p2) {
      j1s.push_back(g.j1(p1));
      j2s.push_back(g.j2(p2));
    }
  }
  // E(node, mode) = phi_mode(node)
  Eigen::MatrixXcd E(n, n);
  for (int m1 = 0; m1 < g.n1; ++m1) {
    for (int m2 = 0; m2 < g.n2; ++m2) {
      for (Eigen::Index c = 0; c < n; ++c) {
        E(static_cast<Eigen::Index>(g.index(m1, m2)), c) = phi(alpha, g.rho_box, j1s[c], j2s[c], g.node(m1, m2));
      }
    }
  }
  // Nodes -> coefficients: trapezoidal inner product with conj(phi).
  const Eigen::MatrixXcd P = E.adjoint() * g.cell_area();
  Eigen::MatrixXcd D1 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd D2 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    D1(c, c) = kI * (j1s[c] + alpha);
    D2(c, c) = kI * (j2s[c] * kPi / g.rho_box);
    K(c, c) = std::sqrt(4.0 * kPi * g.rho_box) * kernel_coefficient(j1s[c], j2s[c], k, alpha, g.rho_box);
  }
  Eigen::MatrixXcd Q11 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd Q12 = Q11;
  Eigen::MatrixXcd Q21 = Q11;
  Eigen::MatrixXcd Q22 = Q11;
  for (Eigen::Index i = 0; i < n; ++i) {
    Q11(i, i) = q[static_cast<std::size_t>(i)](0, 0);
    Q12(i, i) = q[static_cast<std::size_t>(i)](0, 1);
    Q21(i, i) = q[static_cast<std::size_t>(i)](1, 0);
    Q22(i, i) = q[static_cast<std::size_t>(i)](1, 1);
  }
  const Eigen::MatrixXcd g1 = E * D1;
  const Eigen::MatrixXcd g2 = E * D2;
  const Eigen::MatrixXcd w1 = P * (Q11 * g1 + Q12 * g2);
  const Eigen::MatrixXcd w2 = P * (Q21 * g1 + Q22 * g2);
  return Eigen::MatrixXcd::Identity(n, n) - K * (D1 * w1 + D2 * w2);
}

ContrastField random_contrast(Gen &gen, double h) {
  std::vector<Mat2c> table;
  for (int i = 0; i < 64; ++i) {
    table.push_back(gen.symmetric(2.0));
  }
  ContrastField c;
  c.support_half_height = h;
  c.sampler = [table, h](Point2 x) -> Mat2c {
    if (std::abs(x.x2) > h) {
      return Mat2c::Zero();
    }
    const auto i = static_cast<std::size_t>(std::abs(std::sin(7.0 * x.x1 + 13.0 * x.x2)) * 63.0);
    return table[i];
  };
  return c;
}

} // namespace

TEST_SUITE("operator") {
  TEST_CASE("volume potential multiplies each basis function by sqrt(4 pi rho) K") {
    const Grid g(8, 8, 1.3);
    const KernelTable t = kernel_table(g, 1.1, 0.2);
    for (auto [j1, j2] : {std::pair{0L, 0L}, {2L, -3L}, {-4L, 1L}, {3L, 3L}}) {
      SpectralField f(g, 0.2);
      f.at(j1, j2) = 1.0;
      const SpectralField v = volume_potential(f, t);
      const Complex expected = std::sqrt(4.0 * kPi * 1.3) * kernel_coefficient(j1, j2, 1.1, 0.2, 1.3);
      CHECK(std::abs(v.at(j1, j2) - expected) < 1e-15);
      CHECK(std::abs(v.norm_squared() - std::norm(expected)) < 1e-15);
    }
    CHECK(max_abs(volume_potential(SpectralField(g, 0.2), t)) == 0.0);
  }

  TEST_CASE("volume potential needs a matching table") {
    const Grid g(8, 8, 1.0);
    CHECK_THROWS(volume_potential(SpectralField(g, 0.2), kernel_table(Grid(8, 16, 1.0), 1.1, 0.2)));
    CHECK_THROWS(volume_potential(SpectralField(g, 0.2), kernel_table(g, 1.1, 0.3)));
  }

  TEST_CASE("gradient multipliers") {
    const Grid g(8, 8, 1.0);
    SpectralField u(g, 0.0);
    u.at(1, 0) = 1.0;
    const auto gr = grad_spectral(u);
    CHECK(gr.g1.at(1, 0) == kI);
    CHECK(max_abs(gr.g2) == 0.0);

    SpectralField c(g, 0.0);
    c.at(0, 0) = 2.0;
    const auto gc = grad_spectral(c);
    CHECK(max_abs(gc.g1) == 0.0);
    CHECK(max_abs(gc.g2) == 0.0);
  }

  TEST_CASE("div grad is the spectral Laplacian") {
    Gen gen(21);
    const Grid g(8, 16, 0.8);
    const SpectralField u = gen.field(g, 0.35);
    const SpectralField lap = div_spectral(grad_spectral(u));
    for (int p1 = 0; p1 < g.n1; ++p1) {
      for (int p2 = 0; p2 < g.n2; ++p2) {
        const double a = g.j1(p1) + 0.35;
        const double c = g.vertical_wavenumber(p2);
        const auto i = g.index(p1, p2);
        CHECK(std::abs(lap.coeffs[i] + (a * a + c * c) * u.coeffs[i]) < 1e-12);
      }
    }
  }

  TEST_CASE("div potential of a basis gradient") {
    const Grid g(8, 8, 1.0);
    const KernelTable t = kernel_table(g, 0.9, 0.2);
    SpectralField u(g, 0.2);
    u.at(2, -1) = 1.0;
    const SpectralField out = div_potential(grad_spectral(u), t);
    const double a = 2.2;
    const double c = -kPi;
    const Complex expected = -(a * a + c * c) * std::sqrt(4.0 * kPi) * kernel_coefficient(2, -1, 0.9, 0.2, 1.0);
    CHECK(std::abs(out.at(2, -1) - expected) < 1e-13);
    CHECK(max_abs(div_potential({SpectralField(g, 0.2), SpectralField(g, 0.2)}, t)) == 0.0);
  }

  TEST_CASE("dense assembly matches an explicit-sum model at N = 8") {
    Gen gen(22);
    const Grid g(8, 8, 1.0);
    const double k = 1.2;
    const double alpha = 0.3;
    const Problem p = build_problem(IncidentWave::from_angle(k, std::asin(alpha / k)), random_contrast(gen, 0.5), g);
    const KernelTable t = kernel_table(g, k, alpha);
    const Eigen::MatrixXcd dense = assemble_dense(p, t);
    const Eigen::MatrixXcd model = explicit_forward(g, alpha, p.q_grid, k);
    CHECK((dense - model).cwiseAbs().maxCoeff() < 1e-10);

    for (int trial = 0; trial < 10; ++trial) {
      const SpectralField u = gen.field(g, alpha);
      const SpectralField au = apply_forward(u, p, t);
      const Eigen::VectorXcd mv = dense * to_vector(u);
      CHECK((mv - to_vector(au)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("zero contrast gives the identity") {
    Gen gen(23);
    const Grid g(8, 8, 1.0);
    const Problem p = build_problem(IncidentWave(0.7, 0.0, -1.0), zero_contrast(), g);
    const KernelTable t = kernel_table(g, 0.7, 0.0);
    const SpectralField u = gen.field(g, 0.0);
    CHECK(max_abs_diff(apply_forward(u, p, t), u) == 0.0);
    CHECK(assemble_dense(p, t).isIdentity(0.0));
  }

  TEST_CASE("apply_forward is linear and deterministic") {
    Gen gen(24);
    const Grid g(16, 16, 1.0);
    const Problem p = build_problem(IncidentWave::from_angle(1.1, 0.2), random_contrast(gen, 0.5), g);
    const KernelTable t = kernel_table(g, 1.1, p.wave.alpha());
    const SpectralField u = gen.field(g, p.wave.alpha());
    const SpectralField v = gen.field(g, p.wave.alpha());
    SpectralField w = u;
    for (std::size_t i = 0; i < w.coeffs.size(); ++i) {
      w.coeffs[i] += v.coeffs[i];
    }
    const SpectralField au = apply_forward(u, p, t);
    const SpectralField av = apply_forward(v, p, t);
    const SpectralField aw = apply_forward(w, p, t);
    double err = 0.0;
    for (std::size_t i = 0; i < w.coeffs.size(); ++i) {
      err = std::max(err, std::abs(aw.coeffs[i] - au.coeffs[i] - av.coeffs[i]));
    }
    CHECK(err < 1e-12 * max_abs(aw));
    CHECK(apply_forward(u, p, t).coeffs == au.coeffs);
  }

  TEST_CASE("dense assembly guards its size") {
    const Grid g(128, 64, 1.0);
    CHECK_THROWS_AS(assemble_columns(g, 0.0, [](const SpectralField &u) { return u; }), SizeGuard);
  }

  TEST_CASE("vector round trip") {
    Gen gen(25);
    const Grid g(4, 8, 1.0);
    const SpectralField u = gen.field(g, 0.1);
    CHECK(from_vector(g, 0.1, to_vector(u)).coeffs == u.coeffs);
  }

  TEST_CASE("tiny off-support values change the output only at rounding level") {
    Gen gen(26);
    const Grid g(16, 32, 1.0);
    const double k = 0.8;
    const auto base = smooth_test_contrast();
    ContrastField noisy = base;
    noisy.support_half_height = 1.0;
    noisy.sampler = [base](Point2 x) -> Mat2c {
      const Mat2c q = base(x);
      return q.norm() == 0.0 ? scalar_matrix(1e-300) : q;
    };
    const IncidentWave w = IncidentWave::from_angle(k, 0.1);
    const Problem pa = build_problem(w, base, Grid(16, 32, 2.0));
    const Problem pb = build_problem(w, noisy, Grid(16, 32, 2.0));
    const KernelTable t = kernel_table(pa.grid, k, w.alpha());
    const SpectralField u = gen.field(pa.grid, w.alpha());
    const SpectralField a = apply_forward(u, pa, t);
    const SpectralField b = apply_forward(u, pb, t);
    CHECK(max_abs_diff(a, b) <= 1e-14 * max_abs(a));
  }

  TEST_CASE("dealiased and plain flux converge together for a smooth contrast") {
    const IncidentWave w = IncidentWave::from_angle(0.9, 0.2);
    double prev = 0.0;
    for (int n : {32, 64}) {
      const Grid g(n, n, 1.0);
      const Problem plain = build_problem(w, smooth_test_contrast(), g);
      const Problem fine = build_problem(w, smooth_test_contrast(), g, {std::nullopt, true});
      SpectralField u(g, w.alpha());
      u.at(1, 2) = 1.0;
      u.at(-2, 0) = Complex(0.3, -0.2);
      const auto a = contrast_flux(u, plain);
      const auto b = contrast_flux(u, fine);
      const double diff = std::max(max_abs_diff(a.g1, b.g1), max_abs_diff(a.g2, b.g2));
      if (n == 64) {
        CHECK(diff < 0.1 * prev);
      }
      prev = diff;
    }
  }
}
