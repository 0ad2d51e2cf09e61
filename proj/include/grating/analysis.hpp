#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grating/problem.hpp"
#include "grating/spectral.hpp"

namespace grating {

enum class Sign { Positive, Negative, Mixed };
const char *to_string(Sign sign);

// Re(Q) = U^T diag(lambda1, lambda2) U with U the rotation by -angle.
struct SymmetricEigen {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double angle = 0.0;

  Eigen::Matrix2d rotation() const;  // U
  Eigen::Matrix2d reconstruct() const;
};

// Closed-form eigendecomposition of [[a, b], [b, c]].
SymmetricEigen symmetric_eigen(double a, double b, double c);

struct NodeSpectrum {
  std::size_t node = 0;  // problem grid index
  SymmetricEigen eigen;
  double lambda_min = 0.0;  // min(|lambda1|, |lambda2|)
  double lambda_max = 0.0;
  Sign sign = Sign::Mixed;
};

// Pointwise spectra of Re(Q) over D = {nodes with Q != 0}.
struct ContrastSpectra {
  std::vector<NodeSpectrum> nodes;
  Sign sign = Sign::Mixed;
  double inf_lambda_min = 0.0;
  double sup_lambda_max = 0.0;
  double max_eigenvalue = 0.0;  // largest signed eigenvalue over D
  double min_eigenvalue = 0.0;

  bool empty() const { return nodes.empty(); }
};

// Throws SingularReQ listing every node with |det Re(Q)| <= 1e-12.
ContrastSpectra decompose_reQ(const Problem &problem);

// U^T |Sigma|^{1/2} U.
Eigen::Matrix2d abs_sqrt(const SymmetricEigen &eigen);

// sqrt(|| sqrt|Re Q| grad u ||^2 + ||u||^2) over D by node quadrature.
double weighted_norm(const SpectralField &u, const Problem &problem, const ContrastSpectra &spectra);

// int_D sign(Re Q) Q grad u . conj(grad v) + u conj(v). Throws Error at
// indefinite nodes where the sign is undefined.
Complex sesquilinear_aQ(const SpectralField &u, const SpectralField &v, const Problem &problem,
                        const ContrastSpectra &spectra);

// sup_D |Im(Q) Re(Q)^{-1}|_2.
double im_bound_constant(const Problem &problem, const ContrastSpectra &spectra);

// Extension across graph boundaries.

// Smooth cutoff: 1 on |x2| <= rho, 0 on |x2| >= 2 rho, degree-7 smoothstep between.
double cutoff(double x2, double rho);
// sup |chi'| = 2.1875 / rho.
double cutoff_slope(double rho);

// Throws GeometryNotGraph unless zeta_- < -2 rho / 3, zeta_+ > 2 rho / 3 and
// |zeta_+-| < rho at every sample of a grid with `samples` points.
void validate_graph(const GraphGeometry &geometry, double rho, int samples);

// Max absolute forward-difference slope of both graphs on a grid refined 10x
// over n1 points.
double lipschitz_constant(const GraphGeometry &geometry, int n1);

// 1.25 max |zeta_+-| over the sample grid.
double default_extension_rho(const GraphGeometry &geometry, int n1);

// grid must cover (-2 rho, 2 rho). Nodes inside D are copied, reflected strips
// take linearly interpolated mirror values times the cutoff, the rest is zero.
Samples extend_field(const Grid &grid, std::span<const Complex> u, const GraphGeometry &geometry,
                     double rho);

// max(sqrt 3, 2 sqrt 2 M).
double reflected_part_bound(double lipschitz);

struct ExtensionBound {
  double rho = 0.0;
  double lipschitz = 0.0;
  double reflected = 0.0;      // max(sqrt 3, 2 sqrt 2 M)
  double cutoff_slope = 0.0;   // sup |chi'|
  double exterior = 0.0;       // sqrt(2 + slope^2) * reflected
  double norm = 0.0;           // sqrt(1 + exterior^2)
  std::optional<double> numerical;
  bool disagreement = false;   // analytic and numerical differ by more than 2x
  std::string recipe;
};

ExtensionBound extension_norm(const GraphGeometry &geometry, double rho, int n1 = 64);

struct EstimateOptions {
  int n1 = 32;
  int n2 = 64;
  int starts = 50;
  int iterations = 30;
  std::uint64_t seed = 20240611;
};

// Largest discrete H^1 Rayleigh quotient |E u| / |u| found by power iteration
// from several random starts (alpha = 0, periodic differences in x1).
double extension_norm_estimate(const GraphGeometry &geometry, double rho,
                               const EstimateOptions &opts = {});

enum class Verdict { Satisfied, Violated, NotApplicable };
const char *to_string(Verdict verdict);

struct ConditionVerdict {
  std::string tag;
  Verdict verdict = Verdict::NotApplicable;
  std::optional<double> lhs;    // extension norm
  std::optional<double> rhs;    // threshold
  std::optional<double> margin; // rhs - lhs
  std::string note;
};

struct SmoothnessFlags {
  bool coefficient_c21 = false;  // user asserts sqrt|q| in C^{2,1}
  bool boundary_c21 = false;     // user asserts a C^{2,1} boundary
};

struct GardingReport {
  Sign sign = Sign::Mixed;
  bool empty_support = false;
  double inf_lambda_min = 0.0;
  double sup_lambda_max = 0.0;
  double im_constant = 0.0;
  std::optional<ExtensionBound> extension;
  ConditionVerdict coercive_positive;
  ConditionVerdict coercive_negative;
  ConditionVerdict isotropic_negative;
  bool fredholm_applicable = false;
  std::string interpretation;
};

GardingReport garding_check(const Problem &problem, const ContrastSpectra &spectra,
                            const std::optional<ExtensionBound> &extension,
                            const SmoothnessFlags &flags = {});

// Decomposition, constants and verdicts in one call; geometry-free contrasts
// get no extension bound.
GardingReport diagnose(const Problem &problem, const SmoothnessFlags &flags = {},
                       bool numerical_estimate = true);

std::string garding_report_json(const GardingReport &report);

} // namespace grating
