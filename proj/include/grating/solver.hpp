#pragma once

#include <vector>

#include "grating/kernel.hpp"
#include "grating/operator.hpp"
#include "grating/problem.hpp"
#include "grating/spectral.hpp"

namespace grating {

struct SolveOptions {
  double rel_tol = 1e-8;
  int max_iterations = 500;
  int restart = 50;
  bool record_residuals = true;

  void validate() const;
};

enum class SolveStatus { Converged, NotConverged, Breakdown };

const char *to_string(SolveStatus status);

struct Solution {
  SpectralField u;                     // scattered field on the box
  std::vector<double> residual_history;  // Krylov estimates of |r| / |rhs|, starting at 1
  SolveStatus status = SolveStatus::NotConverged;
  int iterations = 0;

  bool converged() const { return status == SolveStatus::Converged; }
};

// div V_k (Q grad u^i).
SpectralField assemble_rhs(const Problem &problem, const KernelTable &table);

using LinearMap = std::function<SpectralField(const SpectralField &)>;

// Restarted GMRES from a zero initial guess. Failure is reported through
// Solution::status; the best iterate is always returned.
Solution gmres(const LinearMap &apply, const SpectralField &rhs, const SolveOptions &opts);

Solution solve(const Problem &problem, const KernelTable &table, const SolveOptions &opts = {});

// Throws NotConverged unless the solve converged.
void require_converged(const Solution &solution);

struct ResidualValue {
  double value = 0.0;
  bool zero_rhs = false;  // value is the absolute norm |A u| when the rhs vanishes
};

// |A u - rhs| / |rhs| recomputed from scratch.
ResidualValue residual(const Problem &problem, const KernelTable &table, const SpectralField &u);

} // namespace grating
