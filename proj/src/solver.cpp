#include "grating/solver.hpp"

#include <cmath>

namespace grating {

void SolveOptions::validate() const {
  if (!(rel_tol > 0.0)) {
    throw Error("rel_tol must be positive");
  }
  if (restart < 1) {
    throw Error("restart length must be at least 1");
  }
  if (max_iterations < 0) {
    throw Error("max_iterations must be non-negative");
  }
}

const char *to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Converged:
    return "converged";
  case SolveStatus::NotConverged:
    return "not-converged";
  case SolveStatus::Breakdown:
    return "breakdown";
  }
  return "unknown";
}

SpectralField assemble_rhs(const Problem &problem, const KernelTable &table) {
  const Grid &grid = problem.grid;
  const IncidentWave &wave = problem.wave;
  Samples f1(grid.size());
  Samples f2(grid.size());
  const double k = wave.k();
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      const std::size_t idx = grid.index(m1, m2);
      const Mat2c &q = problem.q_grid[idx];
      if (q.norm() == 0.0) {
        continue;
      }
      const Point2 x = grid.node(m1, m2);
      const Complex ui = std::exp(kI * k * (x.x1 * wave.d1() + x.x2 * wave.d2()));
      Vec2c grad;
      grad << kI * k * wave.d1() * ui, kI * k * wave.d2() * ui;
      const Vec2c f = q * grad;
      f1[idx] = f(0);
      f2[idx] = f(1);
    }
  }
  const double alpha = wave.alpha();
  return div_potential({to_spectral(grid, alpha, f1), to_spectral(grid, alpha, f2)}, table);
}

namespace {

void apply_givens(Complex &dx, Complex &dy, const Complex &c, const Complex &s) {
  const Complex t = c * dx + s * dy;
  dy = -std::conj(s) * dx + std::conj(c) * dy;
  dx = t;
}

// Rotation zeroing b in (a, b): c real, |c|^2 + |s|^2 = 1.
void make_givens(const Complex &a, const Complex &b, Complex &c, Complex &s) {
  const double na = std::abs(a);
  const double nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  const double r = std::hypot(na, nb);
  c = na / r;
  s = (a / na) * std::conj(b) / r;
}

} // namespace

Solution gmres(const LinearMap &apply, const SpectralField &rhs, const SolveOptions &opts) {
  opts.validate();
  const Grid &grid = rhs.grid;
  const double alpha = rhs.alpha;
  const Eigen::VectorXcd b = to_vector(rhs);
  const double bnorm = b.norm();
  const auto n = b.size();

  Solution sol;
  sol.u = SpectralField(grid, alpha);
  if (opts.record_residuals) {
    sol.residual_history.push_back(bnorm == 0.0 ? 0.0 : 1.0);
  }
  if (bnorm == 0.0) {
    sol.status = SolveStatus::Converged;
    return sol;
  }

  const int m = opts.restart;
  const double target = opts.rel_tol * bnorm;
  const double breakdown_level = 1e-14 * bnorm;
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  std::vector<Complex> cs(m);
  std::vector<Complex> sn(m);
  Eigen::VectorXcd g(m + 1);

  int total = 0;
  bool broke_down = false;
  bool done = false;
  while (!done) {
    const Eigen::VectorXcd r = b - to_vector(apply(from_vector(grid, alpha, x)));
    const double beta = r.norm();
    if (beta <= target) {
      sol.status = SolveStatus::Converged;
      break;
    }
    if (total >= opts.max_iterations) {
      sol.status = SolveStatus::NotConverged;
      break;
    }
    V.col(0) = r / beta;
    H.setZero();
    g.setZero();
    g(0) = beta;
    int used = 0;
    for (int j = 0; j < m && total < opts.max_iterations; ++j) {
      Eigen::VectorXcd w = to_vector(apply(from_vector(grid, alpha, V.col(j))));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        apply_givens(H(i, j), H(i + 1, j), cs[i], sn[i]);
      }
      make_givens(H(j, j), H(j + 1, j), cs[j], sn[j]);
      apply_givens(H(j, j), H(j + 1, j), cs[j], sn[j]);
      apply_givens(g(j), g(j + 1), cs[j], sn[j]);
      ++total;
      used = j + 1;
      const double est = std::abs(g(j + 1));
      if (opts.record_residuals) {
        sol.residual_history.push_back(est / bnorm);
      }
      if (est <= target) {
        break;
      }
      if (hn < breakdown_level) {
        broke_down = true;
        break;
      }
      V.col(j + 1) = w / hn;
    }
    if (used > 0) {
      const Eigen::VectorXcd y = H.topLeftCorner(used, used)
                                     .triangularView<Eigen::Upper>()
                                     .solve(g.head(used));
      x += V.leftCols(used) * y;
    }
    if (broke_down) {
      const Eigen::VectorXcd rr = b - to_vector(apply(from_vector(grid, alpha, x)));
      sol.status = rr.norm() <= target ? SolveStatus::Converged : SolveStatus::Breakdown;
      done = true;
    }
  }
  sol.u = from_vector(grid, alpha, x);
  sol.iterations = total;
  return sol;
}

Solution solve(const Problem &problem, const KernelTable &table, const SolveOptions &opts) {
  const SpectralField rhs = assemble_rhs(problem, table);
  return gmres([&](const SpectralField &u) { return apply_forward(u, problem, table); }, rhs, opts);
}

void require_converged(const Solution &solution) {
  if (!solution.converged()) {
    throw NotConverged(std::string("solution status is ") + to_string(solution.status));
  }
}

ResidualValue residual(const Problem &problem, const KernelTable &table, const SpectralField &u) {
  const Eigen::VectorXcd rhs = to_vector(assemble_rhs(problem, table));
  const Eigen::VectorXcd au = to_vector(apply_forward(u, problem, table));
  const double diff = (au - rhs).norm();
  const double rn = rhs.norm();
  if (rn == 0.0) {
    return {diff, true};
  }
  return {diff / rn, false};
}

} // namespace grating
