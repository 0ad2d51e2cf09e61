#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "grating/kernel.hpp"
#include "grating/problem.hpp"
#include "grating/solver.hpp"
#include "grating/spectral.hpp"

namespace grating {

enum class Side { Above, Below };

// Orders with |Im beta_j| rho_ref beyond this are stored as zeros.
inline constexpr double kEvanescentDrop = 40.0;

struct RayleighOrder {
  long j = 0;
  double alpha_j = 0.0;
  Complex beta_j;
  Complex coefficient;
  bool propagating = false;
  bool truncated = false;
};

// Rayleigh coefficients in the normalization
//   above: u^s = sum_j c_j exp(i alpha_j x1 + i beta_j (x2 - rho_ref)),
//   below: u^s = sum_j c_j exp(i alpha_j x1 - i beta_j (x2 + rho_ref)).
struct RayleighData {
  Side side = Side::Above;
  double rho_ref = 0.0;
  std::vector<RayleighOrder> orders;  // increasing j

  const RayleighOrder *find(long j) const;
  std::vector<long> propagating() const;
};

// Total density w = Q grad(u^s + u^i) at the grid nodes.
std::array<Samples, 2> total_density(const Solution &solution, const Problem &problem);

// Moment route: exact Green's-function expansion integrated against w by the
// trapezoidal rule. Orders cover the x1 band of the grid.
RayleighData rayleigh_coefficients(const Solution &solution, const Problem &problem,
                                   const KernelTable &table, Side side);

// Scattered field on the doubled box (-2 rho_box, 2 rho_box), obtained by
// applying div V_k to the solved density there. Valid for |x2| <= 2 rho_box - h.
SpectralField extended_field(const Solution &solution, const Problem &problem);

// Line route: Fourier coefficients in x1 of the extended field on x2 = +-rho_ref.
RayleighData rayleigh_from_line(const SpectralField &extended, const Problem &problem, Side side);

// Evaluates u^s anywhere: trigonometric series for |x2| <= rho_ref, Rayleigh
// series beyond.
class FieldEvaluator {
public:
  FieldEvaluator(const Solution &solution, const Problem &problem, const KernelTable &table);

  Complex operator()(Point2 x) const;
  std::vector<Complex> operator()(std::span<const Point2> points) const;

  Complex box_value(Point2 x) const;
  Complex rayleigh_value(Point2 x) const;

  const RayleighData &above() const { return above_; }
  const RayleighData &below() const { return below_; }
  const SpectralField &extended() const { return extended_; }

private:
  double h_;
  double rho_ref_;
  SpectralField extended_;
  RayleighData above_;
  RayleighData below_;
};

std::vector<Complex> scattered_field_at(const Solution &solution, const Problem &problem,
                                        const KernelTable &table, std::span<const Point2> points);

struct EfficiencyRow {
  long j = 0;
  double alpha_j = 0.0;
  Complex beta_j;
  double e_refl = 0.0;
  double e_trans = 0.0;
};

struct EfficiencyTable {
  std::vector<EfficiencyRow> rows;
  double total_reflected = 0.0;
  double total_transmitted = 0.0;
  double absorbed = 0.0;  // 1 - sum of all efficiencies
};

EfficiencyTable efficiencies(const RayleighData &above, const RayleighData &below,
                             const IncidentWave &wave);

struct EnergyBalance {
  bool lossless = true;  // Im Q == 0 on every node
  double defect = 0.0;   // |1 - sum| when lossless, absorbed fraction otherwise
  bool passive = true;   // absorbed fraction >= -1e-8
};

EnergyBalance energy_balance(const EfficiencyTable &table, const Problem &problem);

struct ResultMetadata {
  double k = 0.0;
  double alpha = 0.0;
  int n1 = 0;
  int n2 = 0;
  double residual = 0.0;
  double energy_defect = 0.0;
  std::string status;
  int iterations = 0;
};

void write_efficiencies_csv(std::ostream &os, const EfficiencyTable &table);
std::string efficiencies_json(const EfficiencyTable &table, const ResultMetadata &meta);
void write_residual_history_csv(std::ostream &os, const std::vector<double> &history);

} // namespace grating
