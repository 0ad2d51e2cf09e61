#include <doctest.h>

#include <cmath>

#include "grating/grid.hpp"
#include "grating/spectral.hpp"
#include "support.hpp"

using namespace grating;
using grating::testing::Gen;

TEST_SUITE("grid") {
  TEST_CASE("slot and frequency maps are mutually inverse") {
    for (int n : {2, 4, 8, 16}) {
      for (int p = 0; p < n; ++p) {
        const long j = Grid::frequency(p, n);
        CHECK(j >= -n / 2);
        CHECK(j < n / 2);
        CHECK(Grid::slot(j, n) == p);
      }
      CHECK(Grid::slot(n / 2, n) == -1);
      CHECK(Grid::slot(-n / 2 - 1, n) == -1);
    }
  }

  TEST_CASE("FFT-natural order for n = 8") {
    const long expected[] = {0, 1, 2, 3, -4, -3, -2, -1};
    for (int p = 0; p < 8; ++p) {
      CHECK(Grid::frequency(p, 8) == expected[p]);
    }
  }

  TEST_CASE("node coordinates") {
    const Grid g(8, 16, 2.0);
    CHECK(g.x1(0) == doctest::Approx(-kPi));
    CHECK(g.x1(4) == doctest::Approx(0.0));
    CHECK(g.x2(0) == doctest::Approx(-2.0));
    CHECK(g.x2(8) == doctest::Approx(0.0));
    CHECK(g.step2() == doctest::Approx(0.25));
    CHECK(g.vertical_wavenumber(Grid::slot(-3, 16)) == doctest::Approx(-3.0 * kPi / 2.0));
    CHECK(g.index(1, 2) == 18u);
  }

  TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS_AS(Grid(7, 8, 1.0), GeometryError);
    CHECK_THROWS_AS(Grid(8, 0, 1.0), GeometryError);
    CHECK_THROWS_AS(Grid(8, 8, 0.0), GeometryError);
  }
}

TEST_SUITE("spectral") {
  TEST_CASE("constant field has a single coefficient sqrt(4 pi rho)") {
    const Grid g(8, 8, 1.5);
    const Samples ones(g.size(), Complex(1.0, 0.0));
    const SpectralField f = to_spectral(g, 0.0, ones);
    CHECK(std::abs(f.at(0, 0) - std::sqrt(4.0 * kPi * 1.5)) < 1e-12);
    double rest = 0.0;
    for (std::size_t i = 1; i < f.coeffs.size(); ++i) {
      rest = std::max(rest, std::abs(f.coeffs[i]));
    }
    CHECK(rest < 1e-13);
  }

  TEST_CASE("basis function phi_(2,1) transforms to a unit coefficient") {
    const Grid g(8, 8, 1.0);
    for (double alpha : {0.0, 0.3}) {
      const SpectralField f = to_spectral(g, alpha, basis_samples(g, alpha, 2, 1));
      for (int p1 = 0; p1 < g.n1; ++p1) {
        for (int p2 = 0; p2 < g.n2; ++p2) {
          const Complex expected = (g.j1(p1) == 2 && g.j2(p2) == 1) ? 1.0 : 0.0;
          CHECK(std::abs(f.coeffs[g.index(p1, p2)] - expected) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("round trip and Parseval on random samples") {
    Gen gen(11);
    const Grid g(16, 32, 0.7);
    const Samples v = gen.samples(g.size());
    const SpectralField f = to_spectral(g, 0.41, v);
    const Samples back = to_physical(f);
    double err = 0.0;
    double norm = 0.0;
    double l2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      err = std::max(err, std::abs(back[i] - v[i]));
      norm = std::max(norm, std::abs(v[i]));
      l2 += std::norm(v[i]) * g.cell_area();
    }
    CHECK(err < 1e-12 * norm);
    CHECK(f.norm_squared() == doctest::Approx(l2).epsilon(1e-12));
  }

  TEST_CASE("samples carry the quasi-periodic phase") {
    Gen gen(12);
    const Grid g(8, 8, 1.0);
    const double alpha = 0.25;
    const SpectralField f = gen.field(g, alpha);
    const Point2 a{-kPi + 0.1, 0.3};
    const Point2 b{kPi + 0.1, 0.3};
    const Complex ratio = evaluate(f, b) / evaluate(f, a);
    CHECK(std::abs(ratio - std::exp(Complex(0.0, 2.0 * kPi * alpha))) < 1e-12);
  }

  TEST_CASE("evaluate reproduces node samples") {
    Gen gen(13);
    const Grid g(8, 16, 1.0);
    const Samples v = gen.samples(g.size());
    const SpectralField f = to_spectral(g, 0.1, v);
    for (int m1 : {0, 3, 7}) {
      for (int m2 : {0, 5, 15}) {
        CHECK(std::abs(evaluate(f, g.node(m1, m2)) - v[g.index(m1, m2)]) < 1e-12);
      }
    }
  }

  TEST_CASE("resample pads with zeros and truncates back") {
    Gen gen(14);
    const Grid g(8, 8, 1.0);
    const SpectralField f = gen.field(g, 0.2);
    const SpectralField big = resample(f, 16, 32);
    CHECK(big.grid.n1 == 16);
    CHECK(big.norm_squared() == doctest::Approx(f.norm_squared()).epsilon(1e-14));
    const SpectralField back = resample(big, 8, 8);
    CHECK(grating::testing::max_abs_diff(back, f) == 0.0);
  }

  TEST_CASE("shape mismatches are reported") {
    const Grid g(8, 8, 1.0);
    CHECK_THROWS_AS(to_spectral(g, 0.0, Samples(10)), ShapeMismatch);
    SpectralField f(g, 0.0);
    CHECK_THROWS_AS(f.at(4, 0), ShapeMismatch);
    CHECK_THROWS_AS(require_same_shape(f, SpectralField(Grid(8, 16, 1.0), 0.0)), ShapeMismatch);
  }
}
