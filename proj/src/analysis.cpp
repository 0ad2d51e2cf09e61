#include "grating/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "grating/operator.hpp"

namespace grating {

const char *to_string(Sign sign) {
  switch (sign) {
  case Sign::Positive:
    return "positive";
  case Sign::Negative:
    return "negative";
  case Sign::Mixed:
    return "indefinite";
  }
  return "unknown";
}

const char *to_string(Verdict verdict) {
  switch (verdict) {
  case Verdict::Satisfied:
    return "satisfied";
  case Verdict::Violated:
    return "violated";
  case Verdict::NotApplicable:
    return "not-applicable";
  }
  return "unknown";
}

Eigen::Matrix2d SymmetricEigen::rotation() const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d u;
  u << c, s, -s, c;
  return u;
}

Eigen::Matrix2d SymmetricEigen::reconstruct() const {
  const Eigen::Matrix2d u = rotation();
  return u.transpose() * Eigen::Vector2d(lambda1, lambda2).asDiagonal() * u;
}

SymmetricEigen symmetric_eigen(double a, double b, double c) {
  const double m = 0.5 * (a + c);
  const double r = std::hypot(0.5 * (a - c), b);
  return {m + r, m - r, 0.5 * std::atan2(2.0 * b, a - c)};
}

Eigen::Matrix2d abs_sqrt(const SymmetricEigen &eigen) {
  const Eigen::Matrix2d u = eigen.rotation();
  const Eigen::Vector2d d(std::sqrt(std::abs(eigen.lambda1)), std::sqrt(std::abs(eigen.lambda2)));
  return u.transpose() * d.asDiagonal() * u;
}

ContrastSpectra decompose_reQ(const Problem &problem) {
  ContrastSpectra out;
  std::vector<std::size_t> singular;
  bool any_pos = false;
  bool any_neg = false;
  bool any_mixed = false;
  out.inf_lambda_min = std::numeric_limits<double>::infinity();
  out.sup_lambda_max = 0.0;
  out.max_eigenvalue = -std::numeric_limits<double>::infinity();
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < problem.q_grid.size(); ++idx) {
    const Mat2c &q = problem.q_grid[idx];
    if (q.norm() == 0.0) {
      continue;
    }
    const Eigen::Matrix2d re = q.real();
    if (std::abs(re.determinant()) <= 1e-12) {
      singular.push_back(idx);
      continue;
    }
    NodeSpectrum ns;
    ns.node = idx;
    ns.eigen = symmetric_eigen(re(0, 0), 0.5 * (re(0, 1) + re(1, 0)), re(1, 1));
    const double a1 = std::abs(ns.eigen.lambda1);
    const double a2 = std::abs(ns.eigen.lambda2);
    ns.lambda_min = std::min(a1, a2);
    ns.lambda_max = std::max(a1, a2);
    if (ns.eigen.lambda2 > 0.0) {
      ns.sign = Sign::Positive;
      any_pos = true;
    } else if (ns.eigen.lambda1 < 0.0) {
      ns.sign = Sign::Negative;
      any_neg = true;
    } else {
      ns.sign = Sign::Mixed;
      any_mixed = true;
    }
    out.inf_lambda_min = std::min(out.inf_lambda_min, ns.lambda_min);
    out.sup_lambda_max = std::max(out.sup_lambda_max, ns.lambda_max);
    out.max_eigenvalue = std::max(out.max_eigenvalue, ns.eigen.lambda1);
    out.min_eigenvalue = std::min(out.min_eigenvalue, ns.eigen.lambda2);
    out.nodes.push_back(ns);
  }
  if (!singular.empty()) {
    throw SingularReQ(std::move(singular));
  }
  if (out.nodes.empty()) {
    out.inf_lambda_min = 0.0;
    out.max_eigenvalue = 0.0;
    out.min_eigenvalue = 0.0;
    out.sign = Sign::Mixed;
  } else if (any_mixed || (any_pos && any_neg)) {
    out.sign = Sign::Mixed;
  } else {
    out.sign = any_pos ? Sign::Positive : Sign::Negative;
  }
  return out;
}

namespace {

struct NodalGradient {
  Samples u;
  Samples d1;
  Samples d2;
};

NodalGradient nodal(const SpectralField &u) {
  const VectorSpectralField g = grad_spectral(u);
  return {to_physical(u), to_physical(g.g1), to_physical(g.g2)};
}

void require_problem_grid(const SpectralField &u, const Problem &problem) {
  if (!(u.grid == problem.grid)) {
    throw ShapeMismatch("field grid differs from the problem grid");
  }
}

} // namespace

double weighted_norm(const SpectralField &u, const Problem &problem, const ContrastSpectra &spectra) {
  require_problem_grid(u, problem);
  const NodalGradient f = nodal(u);
  double sum = 0.0;
  for (const auto &ns : spectra.nodes) {
    const Eigen::Matrix2d s = abs_sqrt(ns.eigen);
    const Vec2c g(f.d1[ns.node], f.d2[ns.node]);
    const Vec2c sg = s.cast<Complex>() * g;
    sum += sg.squaredNorm() + std::norm(f.u[ns.node]);
  }
  return std::sqrt(sum * problem.grid.cell_area());
}

Complex sesquilinear_aQ(const SpectralField &u, const SpectralField &v, const Problem &problem,
                        const ContrastSpectra &spectra) {
  require_problem_grid(u, problem);
  require_problem_grid(v, problem);
  const NodalGradient fu = nodal(u);
  const NodalGradient fv = nodal(v);
  Complex sum{};
  for (const auto &ns : spectra.nodes) {
    if (ns.sign == Sign::Mixed) {
      throw Error("sign(Re Q) is undefined at an indefinite node");
    }
    const double sgn = ns.sign == Sign::Positive ? 1.0 : -1.0;
    const Vec2c gu(fu.d1[ns.node], fu.d2[ns.node]);
    const Vec2c gv(fv.d1[ns.node], fv.d2[ns.node]);
    const Vec2c qg = problem.q_grid[ns.node] * gu;
    sum += sgn * (qg(0) * std::conj(gv(0)) + qg(1) * std::conj(gv(1))) +
           fu.u[ns.node] * std::conj(fv.u[ns.node]);
  }
  return sum * problem.grid.cell_area();
}

double im_bound_constant(const Problem &problem, const ContrastSpectra &spectra) {
  double c = 0.0;
  for (const auto &ns : spectra.nodes) {
    const Mat2c &q = problem.q_grid[ns.node];
    const Eigen::Matrix2d re = q.real();
    if (std::abs(re.determinant()) <= 1e-12) {
      throw SingularReQ({ns.node});
    }
    const Eigen::Matrix2d m = q.imag() * re.inverse();
    // Largest singular value of a 2x2 matrix in closed form.
    const double f = m.squaredNorm();
    const double d = std::abs(m.determinant());
    const double s2 = 0.5 * (f + std::sqrt(std::max(0.0, f * f - 4.0 * d * d)));
    c = std::max(c, std::sqrt(s2));
  }
  return c;
}

double cutoff(double x2, double rho) {
  const double a = std::abs(x2);
  if (a <= rho) {
    return 1.0;
  }
  if (a >= 2.0 * rho) {
    return 0.0;
  }
  const double t = (a - rho) / rho;
  const double t4 = t * t * t * t;
  return 1.0 - t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}

double cutoff_slope(double rho) { return 2.1875 / rho; }

void validate_graph(const GraphGeometry &geometry, double rho, int samples) {
  for (int i = 0; i < samples; ++i) {
    const double x1 = -kPi + 2.0 * kPi * i / samples;
    const double lo = geometry.lower(x1);
    const double hi = geometry.upper(x1);
    if (!(lo < -2.0 * rho / 3.0 && hi > 2.0 * rho / 3.0 && std::abs(lo) < rho &&
          std::abs(hi) < rho)) {
      std::ostringstream os;
      os << "graph boundaries at x1 = " << x1 << " (" << lo << ", " << hi
         << ") violate -rho < zeta_- < -2 rho / 3 < 2 rho / 3 < zeta_+ < rho for rho = " << rho;
      throw GeometryNotGraph(os.str());
    }
  }
}

double lipschitz_constant(const GraphGeometry &geometry, int n1) {
  const int n = 10 * n1;
  const double step = 2.0 * kPi / n;
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -kPi + step * i;
    m = std::max(m, std::abs(geometry.lower(x + step) - geometry.lower(x)) / step);
    m = std::max(m, std::abs(geometry.upper(x + step) - geometry.upper(x)) / step);
  }
  return m;
}

double default_extension_rho(const GraphGeometry &geometry, int n1) {
  double z = 0.0;
  for (int i = 0; i < 10 * n1; ++i) {
    const double x1 = -kPi + 2.0 * kPi * i / (10 * n1);
    z = std::max({z, std::abs(geometry.lower(x1)), std::abs(geometry.upper(x1))});
  }
  return 1.25 * z;
}

namespace {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double weight;
};

// E as (target node, source node, weight) triplets on a grid over (-2 rho, 2 rho);
// also reports which nodes lie in D.
std::vector<Triplet> extension_triplets(const Grid &grid, const GraphGeometry &geometry, double rho,
                                        std::vector<bool> &in_domain) {
  if (std::abs(grid.rho_box - 2.0 * rho) > 1e-12 * rho) {
    throw ShapeMismatch("extension grid must cover (-2 rho, 2 rho)");
  }
  validate_graph(geometry, rho, grid.n1);
  in_domain.assign(grid.size(), false);
  std::vector<Triplet> out;
  const double h2 = grid.step2();
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    const double x1 = grid.x1(m1);
    const double lo = geometry.lower(x1);
    const double hi = geometry.upper(x1);
    int first = -1;
    int last = -1;
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      const double x2 = grid.x2(m2);
      if (x2 >= lo && x2 <= hi) {
        if (first < 0) {
          first = m2;
        }
        last = m2;
        in_domain[grid.index(m1, m2)] = true;
      }
    }
    if (first < 0) {
      throw GeometryError("the domain contains no grid node in some column");
    }
    auto mirror = [&](std::size_t row, double y, double weight) {
      if (y <= grid.x2(first)) {
        out.push_back({row, grid.index(m1, first), weight});
        return;
      }
      if (y >= grid.x2(last)) {
        out.push_back({row, grid.index(m1, last), weight});
        return;
      }
      const int m0 = std::clamp(static_cast<int>(std::floor((y - grid.x2(0)) / h2)), first, last - 1);
      const double t = (y - grid.x2(m0)) / h2;
      out.push_back({row, grid.index(m1, m0), weight * (1.0 - t)});
      out.push_back({row, grid.index(m1, m0 + 1), weight * t});
    };
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      const std::size_t row = grid.index(m1, m2);
      const double x2 = grid.x2(m2);
      if (in_domain[row]) {
        out.push_back({row, row, 1.0});
      } else if (x2 > hi && x2 < 2.0 * hi - lo) {
        const double chi = cutoff(x2, rho);
        if (chi != 0.0) {
          mirror(row, 2.0 * hi - x2, chi);
        }
      } else if (x2 < lo && x2 > 2.0 * lo - hi) {
        const double chi = cutoff(x2, rho);
        if (chi != 0.0) {
          mirror(row, 2.0 * lo - x2, chi);
        }
      }
    }
  }
  return out;
}

} // namespace

Samples extend_field(const Grid &grid, std::span<const Complex> u, const GraphGeometry &geometry,
                     double rho) {
  if (u.size() != grid.size()) {
    throw ShapeMismatch("sample array does not match the extension grid");
  }
  std::vector<bool> in_domain;
  const auto triplets = extension_triplets(grid, geometry, rho, in_domain);
  Samples out(grid.size());
  for (const auto &t : triplets) {
    if (t.row == t.col) {
      out[t.row] = u[t.col];
    } else {
      out[t.row] += t.weight * u[t.col];
    }
  }
  return out;
}

double reflected_part_bound(double lipschitz) {
  return std::max(std::sqrt(3.0), 2.0 * std::sqrt(2.0) * lipschitz);
}

ExtensionBound extension_norm(const GraphGeometry &geometry, double rho, int n1) {
  validate_graph(geometry, rho, 10 * n1);
  ExtensionBound b;
  b.rho = rho;
  b.lipschitz = lipschitz_constant(geometry, n1);
  b.reflected = reflected_part_bound(b.lipschitz);
  b.cutoff_slope = cutoff_slope(rho);
  b.exterior = std::sqrt(2.0 + b.cutoff_slope * b.cutoff_slope) * b.reflected;
  b.norm = std::sqrt(1.0 + b.exterior * b.exterior);
  b.recipe = "|E| = sqrt(1 + (2 + s^2) R^2), R = max(sqrt 3, 2 sqrt 2 M), s = sup|chi'| = 2.1875/rho, "
             "M = max finite-difference slope of the boundary graphs on a 10x refined grid";
  return b;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Discrete H^1 Gram matrix on the nodes flagged in `mask`, numbered by `local`.
SpMat h1_gram(const Grid &grid, const std::vector<bool> &mask, const std::vector<long> &local,
              std::size_t dim) {
  std::vector<Eigen::Triplet<double>> t;
  const double area = grid.cell_area();
  const double w1 = area / (grid.step1() * grid.step1());
  const double w2 = area / (grid.step2() * grid.step2());
  auto pair = [&](std::size_t a, std::size_t b, double w) {
    const long la = local[a];
    const long lb = local[b];
    t.emplace_back(la, la, w);
    t.emplace_back(lb, lb, w);
    t.emplace_back(la, lb, -w);
    t.emplace_back(lb, la, -w);
  };
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      const std::size_t a = grid.index(m1, m2);
      if (!mask[a]) {
        continue;
      }
      t.emplace_back(local[a], local[a], area);
      const std::size_t right = grid.index((m1 + 1) % grid.n1, m2);
      if (mask[right]) {
        pair(a, right, w1);
      }
      if (m2 + 1 < grid.n2) {
        const std::size_t up = grid.index(m1, m2 + 1);
        if (mask[up]) {
          pair(a, up, w2);
        }
      }
    }
  }
  SpMat g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

} // namespace

double extension_norm_estimate(const GraphGeometry &geometry, double rho, const EstimateOptions &opts) {
  const Grid grid(opts.n1, opts.n2, 2.0 * rho);
  std::vector<bool> in_domain;
  const auto triplets = extension_triplets(grid, geometry, rho, in_domain);

  std::vector<long> local(grid.size(), -1);
  std::size_t nd = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (in_domain[i]) {
      local[i] = static_cast<long>(nd++);
    }
  }
  std::vector<long> identity(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    identity[i] = static_cast<long>(i);
  }
  const SpMat a = h1_gram(grid, in_domain, local, nd);
  const SpMat b = h1_gram(grid, std::vector<bool>(grid.size(), true), identity, grid.size());

  std::vector<Eigen::Triplet<double>> et;
  for (const auto &t : triplets) {
    et.emplace_back(static_cast<long>(t.row), local[t.col], t.weight);
  }
  SpMat e(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(nd));
  e.setFromTriplets(et.begin(), et.end());
  const SpMat ebe = SpMat(e.transpose() * b * e);

  Eigen::SimplicialLDLT<SpMat> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error("H1 Gram matrix on the domain is not positive definite");
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int s = 0; s < opts.starts; ++s) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(nd));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) = normal(rng);
    }
    double quotient = 0.0;
    for (int it = 0; it < opts.iterations; ++it) {
      x = solver.solve(ebe * x);
      x /= x.norm();
      quotient = x.dot(ebe * x) / x.dot(a * x);
    }
    best = std::max(best, quotient);
  }
  return std::sqrt(best);
}

namespace {

bool scalar_real_contrast(const Problem &problem, const ContrastSpectra &spectra, double &inf_abs_q,
                          bool &negative) {
  inf_abs_q = std::numeric_limits<double>::infinity();
  negative = true;
  for (const auto &ns : spectra.nodes) {
    const Mat2c &q = problem.q_grid[ns.node];
    const double scale = q.norm();
    if (q.imag().norm() > 1e-14 * scale || std::abs(q(0, 1)) > 1e-14 * scale ||
        std::abs(q(0, 0) - q(1, 1)) > 1e-14 * scale) {
      return false;
    }
    const double v = q(0, 0).real();
    inf_abs_q = std::min(inf_abs_q, std::abs(v));
    negative = negative && v < 0.0;
  }
  return !spectra.nodes.empty();
}

void compare(ConditionVerdict &c, double lhs, double rhs) {
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.verdict = lhs < rhs ? Verdict::Satisfied : Verdict::Violated;
}

} // namespace

GardingReport garding_check(const Problem &problem, const ContrastSpectra &spectra,
                            const std::optional<ExtensionBound> &extension,
                            const SmoothnessFlags &flags) {
  GardingReport r;
  r.sign = spectra.sign;
  r.empty_support = spectra.empty();
  r.inf_lambda_min = spectra.inf_lambda_min;
  r.sup_lambda_max = spectra.sup_lambda_max;
  r.extension = extension;
  r.coercive_positive.tag = "l-coerc_2(a)";
  r.coercive_negative.tag = "l-coerc_2(b)";
  r.isotropic_negative.tag = "FreeGarding(b)";

  if (r.empty_support) {
    r.interpretation = "contrast vanishes on the grid: the integral operator is the identity";
    r.coercive_positive.note = r.coercive_negative.note = r.isotropic_negative.note =
        "no contrast nodes";
    return r;
  }
  r.im_constant = im_bound_constant(problem, spectra);

  switch (spectra.sign) {
  case Sign::Positive:
    r.coercive_positive.verdict = Verdict::Satisfied;
    r.coercive_positive.rhs = spectra.inf_lambda_min;
    r.coercive_positive.note = "Re(Q) positive definite on D with inf lambda_min > 0";
    r.coercive_negative.note = "Re(Q) is positive";
    r.isotropic_negative.note = "Re(Q) is positive";
    break;
  case Sign::Negative: {
    r.coercive_positive.verdict = Verdict::Violated;
    r.coercive_positive.note = "Re(Q) negative definite on D";
    const bool below_minus_one = spectra.max_eigenvalue < -1.0;
    if (!below_minus_one) {
      r.coercive_negative.note = "requires every eigenvalue of Re(Q) below -1";
    } else if (!extension) {
      r.coercive_negative.note = "D is not given by graphs: no extension bound (local patches not implemented)";
    } else {
      compare(r.coercive_negative, extension->norm, std::sqrt(spectra.inf_lambda_min));
      r.coercive_negative.note = "|E| < inf_D lambda_min^(1/2)";
    }
    double inf_q = 0.0;
    bool negative = false;
    if (!scalar_real_contrast(problem, spectra, inf_q, negative) || !negative) {
      r.isotropic_negative.note = "requires a real scalar contrast q < 0";
    } else if (!extension) {
      r.isotropic_negative.note = "D is not given by graphs: no extension bound";
    } else {
      compare(r.isotropic_negative, extension->norm, std::sqrt(inf_q));
      std::string note = "|E| < inf_D |q|^(1/2); C^{2,1} smoothness of sqrt|q|: ";
      note += flags.coefficient_c21 ? "asserted by user" : "assumed, not verified";
      note += "; C^{2,1} boundary: ";
      note += flags.boundary_c21 ? "asserted by user" : "assumed, not verified";
      r.isotropic_negative.note = note;
    }
    break;
  }
  case Sign::Mixed:
    r.coercive_positive.note = r.coercive_negative.note = r.isotropic_negative.note =
        "indefinite: no certificate";
    break;
  }

  const bool certified = r.coercive_positive.verdict == Verdict::Satisfied ||
                         r.coercive_negative.verdict == Verdict::Satisfied ||
                         r.isotropic_negative.verdict == Verdict::Satisfied;
  r.fredholm_applicable = certified && std::isfinite(r.im_constant);
  if (spectra.sign == Sign::Mixed) {
    r.interpretation = "indefinite: no certificate";
  } else if (r.fredholm_applicable) {
    r.interpretation =
        "Garding inequality holds: the integral equation is Fredholm of index zero, so it is "
        "uniquely solvable for every right-hand side if the homogeneous equation has only the "
        "trivial solution (not verified here)";
  } else {
    r.interpretation = "no Garding certificate for this contrast";
  }
  return r;
}

GardingReport diagnose(const Problem &problem, const SmoothnessFlags &flags, bool numerical_estimate) {
  const ContrastSpectra spectra = decompose_reQ(problem);
  std::optional<ExtensionBound> ext;
  if (problem.contrast.geometry) {
    const GraphGeometry &g = *problem.contrast.geometry;
    try {
      const double rho = default_extension_rho(g, problem.grid.n1);
      ext = extension_norm(g, rho, problem.grid.n1);
      if (numerical_estimate) {
        ext->numerical = extension_norm_estimate(g, rho);
        ext->disagreement = ext->norm > 2.0 * *ext->numerical || *ext->numerical > 2.0 * ext->norm;
      }
    } catch (const GeometryNotGraph &) {
      ext.reset();
    }
  }
  return garding_check(problem, spectra, ext, flags);
}

namespace {

nlohmann::ordered_json verdict_json(const ConditionVerdict &c) {
  nlohmann::ordered_json j;
  j["tag"] = c.tag;
  j["verdict"] = to_string(c.verdict);
  j["extension_norm"] = c.lhs ? nlohmann::ordered_json(*c.lhs) : nlohmann::ordered_json();
  j["threshold"] = c.rhs ? nlohmann::ordered_json(*c.rhs) : nlohmann::ordered_json();
  j["margin"] = c.margin ? nlohmann::ordered_json(*c.margin) : nlohmann::ordered_json();
  j["note"] = c.note;
  return j;
}

} // namespace

std::string garding_report_json(const GardingReport &r) {
  nlohmann::ordered_json doc;
  doc["sign"] = to_string(r.sign);
  doc["empty_support"] = r.empty_support;
  doc["inf_lambda_min"] = r.inf_lambda_min;
  doc["sup_lambda_max"] = r.sup_lambda_max;
  doc["im_re_constant"] = r.im_constant;
  if (r.extension) {
    const ExtensionBound &e = *r.extension;
    doc["extension"] = {{"rho", e.rho},
                        {"lipschitz", e.lipschitz},
                        {"reflected_part_bound", e.reflected},
                        {"cutoff_slope", e.cutoff_slope},
                        {"exterior_bound", e.exterior},
                        {"norm_bound", e.norm},
                        {"numerical_estimate",
                         e.numerical ? nlohmann::ordered_json(*e.numerical) : nlohmann::ordered_json()},
                        {"bound_estimate_disagree", e.disagreement},
                        {"recipe", e.recipe}};
  } else {
    doc["extension"] = nullptr;
  }
  doc["conditions"] = {verdict_json(r.coercive_positive), verdict_json(r.coercive_negative),
                       verdict_json(r.isotropic_negative)};
  doc["fredholm_applicable"] = r.fredholm_applicable;
  doc["interpretation"] = r.interpretation;
  return doc.dump(2) + "\n";
}

} // namespace grating
