#include "grating/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "grating/operator.hpp"

namespace grating {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool dropped(const Complex &beta_j, double rho_ref) {
  return std::abs(beta_j.imag()) * rho_ref > kEvanescentDrop;
}

std::vector<Complex> order_betas(const Grid &grid, const IncidentWave &wave) {
  std::vector<Complex> out(grid.n1);
  const Complex k2(wave.k() * wave.k(), 0.0);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    const long j = grid.j1(p1);
    out[p1] = vertical_wavenumber(k2, static_cast<double>(j) + wave.alpha(), j);
  }
  return out;
}

void sort_orders(RayleighData &data) {
  std::sort(data.orders.begin(), data.orders.end(),
            [](const RayleighOrder &a, const RayleighOrder &b) { return a.j < b.j; });
}

} // namespace

const RayleighOrder *RayleighData::find(long j) const {
  for (const auto &o : orders) {
    if (o.j == j) {
      return &o;
    }
  }
  return nullptr;
}

std::vector<long> RayleighData::propagating() const {
  std::vector<long> out;
  for (const auto &o : orders) {
    if (o.propagating) {
      out.push_back(o.j);
    }
  }
  return out;
}

std::array<Samples, 2> total_density(const Solution &solution, const Problem &problem) {
  auto w = contrast_flux_samples(solution.u, problem);
  const Grid &grid = problem.grid;
  const IncidentWave &wave = problem.wave;
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
      w[0][idx] += f(0);
      w[1][idx] += f(1);
    }
  }
  return w;
}

RayleighData rayleigh_coefficients(const Solution &solution, const Problem &problem,
                                   const KernelTable &table, Side side) {
  require_converged(solution);
  if (!(table.grid == problem.grid)) {
    throw ShapeMismatch("kernel table does not match the problem grid");
  }
  const Grid &grid = problem.grid;
  const auto w = total_density(solution, problem);
  const std::vector<Complex> betas = order_betas(grid, problem.wave);
  const double rho_ref = problem.rho_ref;
  const double sgn = side == Side::Above ? 1.0 : -1.0;

  RayleighData data;
  data.side = side;
  data.rho_ref = rho_ref;
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    RayleighOrder o;
    o.j = grid.j1(p1);
    o.alpha_j = static_cast<double>(o.j) + problem.wave.alpha();
    o.beta_j = betas[p1];
    o.propagating = o.beta_j.imag() == 0.0;
    if (dropped(o.beta_j, rho_ref)) {
      o.truncated = true;
      data.orders.push_back(o);
      continue;
    }
    // The propagation factor exp(i beta (rho_ref -+ y2)) is combined with the
    // moment kernel so that evanescent orders never overflow.
    Complex sum{};
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      const double y2 = grid.x2(m2);
      Complex row{};
      for (int m1 = 0; m1 < grid.n1; ++m1) {
        const std::size_t idx = grid.index(m1, m2);
        const Complex d = kI * o.alpha_j * w[0][idx] + sgn * kI * o.beta_j * w[1][idx];
        if (d == Complex{}) {
          continue;
        }
        row += d * std::exp(Complex(0.0, -o.alpha_j * grid.x1(m1)));
      }
      if (row == Complex{}) {
        continue;
      }
      sum += row * std::exp(kI * o.beta_j * (rho_ref - sgn * y2));
    }
    o.coefficient = kI / (4.0 * kPi * o.beta_j) * sum * grid.cell_area();
    data.orders.push_back(o);
  }
  sort_orders(data);
  return data;
}

SpectralField extended_field(const Solution &solution, const Problem &problem) {
  require_converged(solution);
  const Grid &grid = problem.grid;
  const Grid wide(grid.n1, 2 * grid.n2, 2.0 * grid.rho_box);
  const auto w = total_density(solution, problem);
  Samples w1(wide.size());
  Samples w2(wide.size());
  const int shift = grid.n2 / 2;
  for (int m1 = 0; m1 < grid.n1; ++m1) {
    for (int m2 = 0; m2 < grid.n2; ++m2) {
      w1[wide.index(m1, m2 + shift)] = w[0][grid.index(m1, m2)];
      w2[wide.index(m1, m2 + shift)] = w[1][grid.index(m1, m2)];
    }
  }
  const double alpha = problem.wave.alpha();
  const double k = problem.wave.k();
  const KernelTable table = kernel_table(wide, Complex(k * k, 0.0), alpha);
  return div_potential({to_spectral(wide, alpha, w1), to_spectral(wide, alpha, w2)}, table);
}

RayleighData rayleigh_from_line(const SpectralField &extended, const Problem &problem, Side side) {
  const Grid &grid = extended.grid;
  const double rho_ref = problem.rho_ref;
  const double x2 = side == Side::Above ? rho_ref : -rho_ref;
  if (std::abs(x2) > grid.rho_box - problem.support_half_height()) {
    throw EvaluationGap("reference line lies outside the valid part of the extended box");
  }
  const std::vector<Complex> betas = order_betas(grid, problem.wave);
  RayleighData data;
  data.side = side;
  data.rho_ref = rho_ref;
  std::vector<Complex> e2(grid.n2);
  for (int p2 = 0; p2 < grid.n2; ++p2) {
    e2[p2] = std::exp(Complex(0.0, grid.vertical_wavenumber(p2) * x2));
  }
  const double norm = 1.0 / std::sqrt(4.0 * kPi * grid.rho_box);
  for (int p1 = 0; p1 < grid.n1; ++p1) {
    RayleighOrder o;
    o.j = grid.j1(p1);
    o.alpha_j = static_cast<double>(o.j) + problem.wave.alpha();
    o.beta_j = betas[p1];
    o.propagating = o.beta_j.imag() == 0.0;
    if (dropped(o.beta_j, rho_ref)) {
      o.truncated = true;
    } else {
      Complex sum{};
      for (int p2 = 0; p2 < grid.n2; ++p2) {
        sum += extended.coeffs[grid.index(p1, p2)] * e2[p2];
      }
      o.coefficient = sum * norm;
    }
    data.orders.push_back(o);
  }
  sort_orders(data);
  return data;
}

FieldEvaluator::FieldEvaluator(const Solution &solution, const Problem &problem,
                               const KernelTable &table)
    : h_(problem.support_half_height()),
      rho_ref_(problem.rho_ref),
      extended_(extended_field(solution, problem)),
      above_(rayleigh_coefficients(solution, problem, table, Side::Above)),
      below_(rayleigh_coefficients(solution, problem, table, Side::Below)) {}

Complex FieldEvaluator::box_value(Point2 x) const { return evaluate(extended_, x); }

Complex FieldEvaluator::rayleigh_value(Point2 x) const {
  const bool up = x.x2 > 0.0;
  const RayleighData &data = up ? above_ : below_;
  const double shift = up ? x.x2 - rho_ref_ : -(x.x2 + rho_ref_);
  Complex sum{};
  for (const auto &o : data.orders) {
    if (o.truncated) {
      continue;
    }
    sum += o.coefficient * std::exp(kI * (o.alpha_j * x.x1 + o.beta_j * shift));
  }
  return sum;
}

Complex FieldEvaluator::operator()(Point2 x) const {
  const double a = std::abs(x.x2);
  if (a <= rho_ref_) {
    return box_value(x);
  }
  if (a < h_) {
    throw EvaluationGap("evaluation point lies between the reference line and the support");
  }
  return rayleigh_value(x);
}

std::vector<Complex> FieldEvaluator::operator()(std::span<const Point2> points) const {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto &p : points) {
    out.push_back((*this)(p));
  }
  return out;
}

std::vector<Complex> scattered_field_at(const Solution &solution, const Problem &problem,
                                        const KernelTable &table, std::span<const Point2> points) {
  return FieldEvaluator(solution, problem, table)(points);
}

EfficiencyTable efficiencies(const RayleighData &above, const RayleighData &below,
                             const IncidentWave &wave) {
  if (above.side != Side::Above || below.side != Side::Below) {
    throw Error("efficiencies need the above and below Rayleigh data in that order");
  }
  const double beta0 = wave.beta0();
  // Incident wave in the below-side normalization exp(i alpha x1 - i beta0 (x2 + rho_ref)).
  const Complex incident = std::exp(Complex(0.0, beta0 * below.rho_ref));
  EfficiencyTable table;
  for (const auto &up : above.orders) {
    if (!up.propagating) {
      continue;
    }
    const RayleighOrder *down = below.find(up.j);
    if (down == nullptr) {
      throw ShapeMismatch("above and below Rayleigh data cover different orders");
    }
    EfficiencyRow row;
    row.j = up.j;
    row.alpha_j = up.alpha_j;
    row.beta_j = up.beta_j;
    const double ratio = up.beta_j.real() / beta0;
    row.e_refl = ratio * std::norm(up.coefficient);
    // |c + incident|^2 expanded with |incident| = 1 exactly.
    double t2 = std::norm(down->coefficient);
    if (up.j == 0) {
      t2 += 1.0 + 2.0 * (std::conj(incident) * down->coefficient).real();
    }
    row.e_trans = ratio * t2;
    table.total_reflected += row.e_refl;
    table.total_transmitted += row.e_trans;
    table.rows.push_back(row);
  }
  table.absorbed = 1.0 - (table.total_reflected + table.total_transmitted);
  return table;
}

EnergyBalance energy_balance(const EfficiencyTable &table, const Problem &problem) {
  EnergyBalance out;
  for (const auto &q : problem.q_grid) {
    if (q.imag().norm() != 0.0) {
      out.lossless = false;
      break;
    }
  }
  out.defect = out.lossless ? std::abs(table.absorbed) : table.absorbed;
  out.passive = table.absorbed >= -1e-8;
  return out;
}

void write_efficiencies_csv(std::ostream &os, const EfficiencyTable &table) {
  os << "j,alpha_j,beta_j_re,beta_j_im,e_refl,e_trans\r\n";
  for (const auto &r : table.rows) {
    os << r.j << ',' << fmt(r.alpha_j) << ',' << fmt(r.beta_j.real()) << ','
       << fmt(r.beta_j.imag()) << ',' << fmt(r.e_refl) << ',' << fmt(r.e_trans) << "\r\n";
  }
}

std::string efficiencies_json(const EfficiencyTable &table, const ResultMetadata &meta) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"k", meta.k},
                     {"alpha", meta.alpha},
                     {"N1", meta.n1},
                     {"N2", meta.n2},
                     {"residual", meta.residual},
                     {"energy_defect", meta.energy_defect},
                     {"status", meta.status},
                     {"iterations", meta.iterations}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto &r : table.rows) {
    rows.push_back({{"j", r.j},
                    {"alpha_j", r.alpha_j},
                    {"beta_j_re", r.beta_j.real()},
                    {"beta_j_im", r.beta_j.imag()},
                    {"e_refl", r.e_refl},
                    {"e_trans", r.e_trans}});
  }
  doc["orders"] = rows;
  doc["totals"] = {{"reflected", table.total_reflected},
                   {"transmitted", table.total_transmitted},
                   {"absorbed", table.absorbed}};
  return doc.dump(2) + "\n";
}

void write_residual_history_csv(std::ostream &os, const std::vector<double> &history) {
  os << "iteration,relative_residual\r\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    os << i << ',' << fmt(history[i]) << "\r\n";
  }
}

} // namespace grating
