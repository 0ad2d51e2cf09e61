#include <doctest.h>

#include <cmath>

#include "grating/oracle.hpp"
#include "grating/solver.hpp"
#include "support.hpp"

using namespace grating;
using grating::testing::Gen;
using grating::testing::max_abs;
using grating::testing::max_abs_diff;

namespace {

Problem slab_problem(int n1, int n2, double k, double q) {
  return build_problem(IncidentWave(k, 0.0, -1.0), slab_contrast(scalar_matrix(q), -0.5, 0.5),
                       Grid(n1, n2, 1.0));
}

} // namespace

TEST_SUITE("solver") {
  TEST_CASE("options validation") {
    CHECK_NOTHROW(SolveOptions{}.validate());
    CHECK_THROWS(SolveOptions{0.0, 10, 5, true}.validate());
    CHECK_THROWS(SolveOptions{1e-8, 10, 0, true}.validate());
    CHECK(std::string(to_string(SolveStatus::NotConverged)) == "not-converged");
  }

  TEST_CASE("zero contrast: zero rhs and zero solution in zero iterations") {
    const Grid g(8, 8, 1.0);
    const Problem p = build_problem(IncidentWave(0.7, 0.0, -1.0), zero_contrast(), g);
    const KernelTable t = kernel_table(g, 0.7, 0.0);
    CHECK(max_abs(assemble_rhs(p, t)) == 0.0);
    const Solution s = solve(p, t);
    CHECK(s.converged());
    CHECK(s.iterations == 0);
    CHECK(max_abs(s.u) == 0.0);
    const ResidualValue r = residual(p, t, s.u);
    CHECK(r.zero_rhs);
    CHECK(r.value == 0.0);
  }

  TEST_CASE("identity operator solves in one iteration") {
    Gen gen(31);
    const Grid g(8, 8, 1.0);
    const SpectralField rhs = gen.field(g, 0.2);
    const Solution s = gmres([](const SpectralField &u) { return u; }, rhs, {});
    CHECK(s.converged());
    CHECK(s.iterations == 1);
    CHECK(max_abs_diff(s.u, rhs) < 1e-14);
  }

  TEST_CASE("singular operator reports breakdown") {
    const Grid g(4, 4, 1.0);
    SpectralField rhs(g, 0.0);
    rhs.coeffs[0] = 1.0;
    rhs.coeffs[1] = 1.0;
    const LinearMap drop_first = [](const SpectralField &u) {
      SpectralField out = u;
      out.coeffs[0] = 0.0;
      return out;
    };
    const Solution s = gmres(drop_first, rhs, {});
    CHECK(s.status == SolveStatus::Breakdown);
    CHECK_THROWS_AS(require_converged(s), NotConverged);
  }

  TEST_CASE("iteration cap gives not-converged with the best iterate") {
    const Problem p = slab_problem(4, 64, 0.9, 3.0);
    const KernelTable t = kernel_table(p.grid, 0.9, 0.0);
    const Solution s = solve(p, t, {1e-14, 2, 50, true});
    CHECK(s.status == SolveStatus::NotConverged);
    CHECK(s.iterations == 2);
    CHECK(residual(p, t, s.u).value < 1.0);
  }

  TEST_CASE("slab solve: history, residual recomputation and injectivity") {
    const Problem p = slab_problem(8, 128, 0.9, 3.0);
    const KernelTable t = kernel_table(p.grid, 0.9, 0.0);
    const Solution s = solve(p, t);
    REQUIRE(s.converged());
    CHECK(s.iterations < 200);
    CHECK(s.residual_history.front() == 1.0);
    for (std::size_t i = 1; i < s.residual_history.size(); ++i) {
      CHECK(s.residual_history[i] <= s.residual_history[i - 1] * (1.0 + 1e-12));
    }
    const double krylov = s.residual_history.back();
    const double true_res = residual(p, t, s.u).value;
    CHECK(true_res <= 1.1 * 1e-8);
    CHECK(true_res <= 10.0 * krylov);
    CHECK(krylov <= 10.0 * true_res);
    CHECK(residual(p, t, SpectralField(p.grid, 0.0)).value == doctest::Approx(1.0));

    SpectralField bumped = s.u;
    bumped.at(0, 3) += 1e-3;
    CHECK(residual(p, t, bumped).value > true_res);
  }

  TEST_CASE("normal-incidence slab rhs lives in the j1 = 0 column") {
    const Problem p = slab_problem(8, 64, 0.9, 3.0);
    const KernelTable t = kernel_table(p.grid, 0.9, 0.0);
    const SpectralField rhs = assemble_rhs(p, t);
    double off = 0.0;
    double on = 0.0;
    for (int p1 = 0; p1 < p.grid.n1; ++p1) {
      for (int p2 = 0; p2 < p.grid.n2; ++p2) {
        const double v = std::abs(rhs.coeffs[p.grid.index(p1, p2)]);
        (p.grid.j1(p1) == 0 ? on : off) = std::max(p.grid.j1(p1) == 0 ? on : off, v);
      }
    }
    CHECK(on > 0.0);
    CHECK(off < 1e-12);
  }

  TEST_CASE("spectral self-convergence for a smooth contrast") {
    const IncidentWave w = IncidentWave::from_angle(0.9, 0.2);
    auto run = [&](int n) {
      const Problem p = build_problem(w, smooth_test_contrast(), Grid(n, n, 1.0));
      const Solution s = solve(p, kernel_table(p.grid, 0.9, w.alpha()), {1e-12, 500, 50, false});
      REQUIRE(s.converged());
      return s.u;
    };
    const SpectralField a = run(32);
    const SpectralField b = run(64);
    const SpectralField c = run(128);
    const double d1 = max_abs_diff(resample(b, 32, 32), a);
    const double d2 = max_abs_diff(resample(c, 64, 64), b);
    // The bump is Gevrey rather than analytic, so each doubling gains a growing factor.
    CHECK(d2 < 0.1 * d1);
    CHECK(d2 < 1e-4 * max_abs(c));
  }

}
