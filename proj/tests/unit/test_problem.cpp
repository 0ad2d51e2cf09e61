#include <doctest.h>

#include <cmath>

#include "grating/problem.hpp"
#include "support.hpp"

using namespace grating;

TEST_SUITE("problem") {
  TEST_CASE("incident wave validation") {
    CHECK_THROWS_AS(IncidentWave(0.0, 0.0, -1.0), GeometryError);
    CHECK_THROWS_AS(IncidentWave(1.0, 0.6, 0.8), GeometryError);
    CHECK_THROWS_AS(IncidentWave(1.0, 0.6, -0.7), GeometryError);
    const IncidentWave w = IncidentWave::from_angle(2.0, kPi / 6);
    CHECK(w.alpha() == doctest::Approx(1.0));
    CHECK(w.beta0() == doctest::Approx(std::sqrt(3.0)));
  }

  TEST_CASE("incident field values and gradient") {
    const IncidentWave w = IncidentWave::from_angle(1.3, 0.4);
    const Point2 origin{0.0, 0.0};
    const auto s = incident_field(w, std::span(&origin, 1));
    CHECK(s[0].value == Complex(1.0, 0.0));
    CHECK(std::abs(s[0].gradient(0) - kI * 1.3 * w.d1()) < 1e-15);
    CHECK(std::abs(s[0].gradient(1) - kI * 1.3 * w.d2()) < 1e-15);

    const IncidentWave normal(2.0, 0.0, -1.0);
    const Point2 p{0.7, 0.0};
    CHECK(std::abs(incident_field(normal, std::span(&p, 1))[0].value - 1.0) < 1e-15);

    const Point2 pair[] = {{kPi, 0.3}, {-kPi, 0.3}};
    const auto q = incident_field(w, pair);
    CHECK(std::abs(q[0].value / q[1].value - std::exp(Complex(0.0, 2.0 * kPi * w.alpha()))) < 1e-12);
  }

  TEST_CASE("incident gradient matches central differences at second order") {
    const IncidentWave w = IncidentWave::from_angle(1.7, -0.3);
    const Point2 x{0.2, -0.4};
    double prev = 0.0;
    for (double h : {1e-2, 5e-3}) {
      const Point2 pts[] = {{x.x1 + h, x.x2}, {x.x1 - h, x.x2}, {x.x1, x.x2 + h}, {x.x1, x.x2 - h}, x};
      const auto s = incident_field(w, pts);
      const double err = std::max(std::abs((s[0].value - s[1].value) / (2 * h) - s[4].gradient(0)),
                                  std::abs((s[2].value - s[3].value) / (2 * h) - s[4].gradient(1)));
      if (prev > 0.0) {
        CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
      }
      prev = err;
    }
  }

  TEST_CASE("non-resonance") {
    CHECK_THROWS_AS(check_non_resonance(1.0, 0.0), RayleighAnomaly);
    try {
      check_non_resonance(1.0, 0.0);
    } catch (const RayleighAnomaly &e) {
      CHECK(std::abs(e.order()) == 1);
    }
    CHECK_NOTHROW(check_non_resonance(0.9, 0.0));
    CHECK_THROWS_AS(check_non_resonance(1.5, 0.5), RayleighAnomaly);
  }

  TEST_CASE("build_problem samples zero contrast to zeros") {
    const Problem p = build_problem(IncidentWave(0.8, 0.0, -1.0), zero_contrast(), Grid(8, 8, 1.0));
    for (const auto &q : p.q_grid) {
      CHECK(q.norm() == 0.0);
    }
    CHECK(p.rho_ref == doctest::Approx(0.1));
  }

  TEST_CASE("box must be at least twice the support height") {
    const auto slab = slab_contrast(scalar_matrix(2.0), -1.0, 1.0);
    CHECK_THROWS_AS(build_problem(IncidentWave(0.8, 0.0, -1.0), slab, Grid(8, 8, 1.5)), GeometryError);
    CHECK_NOTHROW(build_problem(IncidentWave(0.8, 0.0, -1.0), slab, Grid(8, 8, 2.0)));
  }

  TEST_CASE("anomalous incidence is refused") {
    const auto slab = slab_contrast(scalar_matrix(3.0), -0.5, 0.5);
    CHECK_THROWS_AS(build_problem(IncidentWave(1.0, 0.0, -1.0), slab, Grid(8, 8, 1.0)), RayleighAnomaly);
  }

  TEST_CASE("reference height default and range") {
    const auto slab = slab_contrast(scalar_matrix(3.0), -0.5, 0.5);
    const IncidentWave w(0.9, 0.0, -1.0);
    const Problem p = build_problem(w, slab, Grid(8, 16, 1.0));
    CHECK(p.rho_ref == doctest::Approx(0.55));
    CHECK_THROWS_AS(build_problem(w, slab, Grid(8, 16, 1.0), {0.4, false}), GeometryError);
    CHECK_THROWS_AS(build_problem(w, slab, Grid(8, 16, 1.0), {1.2, false}), GeometryError);
  }

  TEST_CASE("pointwise sampling: Q_grid equals the sampler at every node") {
    const auto circle = circle_contrast(scalar_matrix(Complex(2.0, 0.5)), {0.3, 0.0}, 0.6);
    const Grid g(16, 16, 1.2);
    const Problem p = build_problem(IncidentWave::from_angle(0.8, 0.2), circle, g);
    for (int m1 = 0; m1 < g.n1; ++m1) {
      for (int m2 = 0; m2 < g.n2; ++m2) {
        CHECK(p.q_grid[g.index(m1, m2)] == circle(g.node(m1, m2)));
      }
    }
    const Problem again = build_problem(IncidentWave::from_angle(0.8, 0.2), circle, g);
    CHECK(again.q_grid == p.q_grid);
  }

  TEST_CASE("shapes are open sets") {
    const auto slab = slab_contrast(scalar_matrix(3.0), -0.5, 0.5);
    CHECK(slab({0.0, 0.5}).norm() == 0.0);
    CHECK(slab({0.0, 0.4999}) == scalar_matrix(3.0));
    CHECK(slab.support_half_height == 0.5);
    CHECK(slab.isotropic);

    const auto rect = rectangle_contrast(scalar_matrix(2.0), {0.0, 0.0}, 1.0, 0.5);
    CHECK(rect({0.49, 0.24}) == scalar_matrix(2.0));
    CHECK(rect({0.5, 0.0}).norm() == 0.0);
    CHECK(rect({0.0, 0.25}).norm() == 0.0);
    CHECK(rect({2.0 * kPi + 0.2, 0.1}) == scalar_matrix(2.0));
    CHECK(rect.support_half_height == doctest::Approx(0.25));
    CHECK_FALSE(rect.geometry.has_value());

    const auto circ = circle_contrast(scalar_matrix(1.0), {0.0, 0.0}, 0.5);
    CHECK(circ({0.5, 0.0}).norm() == 0.0);
    CHECK(circ({0.3, 0.3}) == scalar_matrix(1.0));
    CHECK_THROWS_AS(circle_contrast(scalar_matrix(1.0), {0.0, 0.0}, 4.0), GeometryError);

    const auto two = two_layer_contrast(scalar_matrix(1.0), scalar_matrix(2.0), -0.4, 0.1, 0.5);
    CHECK(two({0.0, -0.4}).norm() == 0.0);
    CHECK(two({0.0, 0.0}) == scalar_matrix(1.0));
    CHECK(two({0.0, 0.1}) == scalar_matrix(2.0));
    CHECK(two({0.0, 0.5}).norm() == 0.0);
    CHECK_THROWS_AS(two_layer_contrast(scalar_matrix(1.0), scalar_matrix(2.0), 0.2, 0.1, 0.5), GeometryError);
  }

  TEST_CASE("non-symmetric matrices are rejected") {
    Mat2c q = scalar_matrix(1.0);
    q(0, 1) = 0.5;
    CHECK_THROWS_AS(slab_contrast(q, -0.5, 0.5), NonSymmetric);
  }

  TEST_CASE("contrast from permittivity") {
    const Grid scan(8, 64, 1.0);
    const auto vacuum = contrast_from_permittivity([](Point2) -> Mat2c { return Mat2c::Identity(); }, scan);
    CHECK(vacuum.support_half_height == 0.0);
    CHECK(vacuum({0.1, 0.2}).norm() == 0.0);

    const auto slab = contrast_from_permittivity(
        [](Point2 x) -> Mat2c { return std::abs(x.x2) < 0.5 ? scalar_matrix(4.0) : Mat2c::Identity(); }, scan);
    CHECK(slab.support_half_height == doctest::Approx(0.5));
    CHECK(slab({0.0, 0.2}) == scalar_matrix(3.0));
    CHECK(slab.isotropic);

    const auto aniso = contrast_from_permittivity(
        [](Point2 x) -> Mat2c {
          if (std::abs(x.x2) >= 0.25) {
            return Mat2c::Identity();
          }
          Mat2c m = Mat2c::Zero();
          m(0, 0) = Complex(2.0, 0.1);
          m(1, 1) = Complex(3.0, 0.1);
          return m;
        },
        scan);
    const Mat2c q = aniso({0.0, 0.0});
    CHECK(q(0, 0) == Complex(1.0, 0.1));
    CHECK(q(1, 1) == Complex(2.0, 0.1));
    CHECK(q(0, 1) == Complex(0.0, 0.0));
    CHECK_FALSE(aniso.isotropic);

    CHECK_THROWS_AS(contrast_from_permittivity(
                        [](Point2) -> Mat2c {
                          Mat2c m = Mat2c::Identity();
                          m(0, 1) = 0.3;
                          return m;
                        },
                        scan),
                    NonSymmetric);
  }

  TEST_CASE("raster round trip") {
    grating::testing::TempDir dir("raster");
    const Grid g(4, 8, 1.0);
    std::vector<Mat2c> cells(g.size(), Mat2c::Zero());
    cells[g.index(1, 3)] = scalar_matrix(Complex(2.0, 0.25));
    cells[g.index(2, 4)] = scalar_matrix(-1.5);
    write_raster(dir.path() / "r.bin", g, cells);
    const auto c = raster_contrast(dir.path() / "r.bin");
    CHECK(c.support_half_height == doctest::Approx(0.25));
    CHECK(c(g.node(1, 3)) == cells[g.index(1, 3)]);
    CHECK(c({g.x1(2) + 0.1, g.x2(4) + 0.1}) == cells[g.index(2, 4)]);
    CHECK(c(g.node(0, 0)).norm() == 0.0);
    CHECK_THROWS_AS(write_raster(dir.path() / "bad.bin", g, std::vector<Mat2c>(3)), ShapeMismatch);
  }

  TEST_CASE("dealiasing grid") {
    const auto slab = slab_contrast(scalar_matrix(3.0), -0.5, 0.5);
    const Problem p = build_problem(IncidentWave(0.9, 0.0, -1.0), slab, Grid(8, 16, 1.0), {std::nullopt, true});
    CHECK(p.fine_grid == Grid(12, 24, 1.0));
    CHECK(p.q_fine.size() == 12u * 24u);
    CHECK_THROWS_AS(build_problem(IncidentWave(0.9, 0.0, -1.0), slab, Grid(6, 16, 1.0), {std::nullopt, true}),
                    GeometryError);
  }

  TEST_CASE("default box height") {
    CHECK(default_rho_box(0.5) == 1.0);
    CHECK(default_rho_box(0.0) == 1.0);
  }
}
