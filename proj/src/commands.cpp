#include "grating/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include <json.hpp>

#include "grating/analysis.hpp"
#include "grating/config.hpp"
#include "grating/kernel.hpp"
#include "grating/oracle.hpp"
#include "grating/postprocess.hpp"
#include "grating/solver.hpp"

namespace grating {

namespace {

std::ofstream open_output(const std::filesystem::path &path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot write " + path.string());
  }
  return os;
}

std::filesystem::path output_path(const RunConfig &cfg, const std::string &suffix) {
  return cfg.output.directory / (cfg.output.prefix + suffix);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SolveOutcome {
  SolveStatus status = SolveStatus::NotConverged;
  int iterations = 0;
  std::vector<double> history;
  double residual = 0.0;
  std::optional<EfficiencyTable> table;
  EnergyBalance energy;
};

SolveOutcome run_solve(const RunConfig &cfg) {
  const Problem problem = make_problem(cfg);
  const SolveOptions opts = make_solve_options(cfg);
  const double k = problem.wave.k();
  const KernelTable table = kernel_table(problem.grid, Complex(k * k, 0.0), problem.wave.alpha());
  const Solution sol = solve(problem, table, opts);
  SolveOutcome out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.history = sol.residual_history;
  out.residual = residual(problem, table, sol.u).value;
  if (sol.converged()) {
    const RayleighData above = rayleigh_coefficients(sol, problem, table, Side::Above);
    const RayleighData below = rayleigh_coefficients(sol, problem, table, Side::Below);
    out.table = efficiencies(above, below, problem.wave);
    out.energy = energy_balance(*out.table, problem);
  }
  return out;
}

// Errors that mean "the input describes no valid computation".
template <class F> int guarded(std::ostream &log, F &&body) {
  try {
    return body();
  } catch (const RayleighAnomaly &e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConfigError &e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const GeometryError &e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NonSymmetric &e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ShapeMismatch &e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error &e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}

} // namespace

unsigned sweep_threads() {
  if (const char *env = std::getenv("GRATING_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_solve(const std::filesystem::path &config, std::ostream &log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(config);
    const SolveOutcome out = run_solve(cfg);
    const Problem problem = make_problem(cfg);

    if (cfg.wants("csv")) {
      auto hist = open_output(output_path(cfg, "_residuals.csv"));
      write_residual_history_csv(hist, out.history);
    }
    if (!out.table) {
      log << "solver " << to_string(out.status) << " after " << out.iterations
          << " iterations, relative residual " << out.residual << '\n';
      if (cfg.wants("json")) {
        ResultMetadata meta{problem.wave.k(), problem.wave.alpha(), problem.grid.n1, problem.grid.n2,
                            out.residual, 0.0, to_string(out.status), out.iterations};
        auto js = open_output(output_path(cfg, "_result.json"));
        js << efficiencies_json(EfficiencyTable{}, meta);
      }
      return kExitNotConverged;
    }
    if (cfg.wants("csv")) {
      auto csv = open_output(output_path(cfg, "_efficiencies.csv"));
      write_efficiencies_csv(csv, *out.table);
    }
    if (cfg.wants("json")) {
      ResultMetadata meta{problem.wave.k(),  problem.wave.alpha(), problem.grid.n1,
                          problem.grid.n2,   out.residual,         out.energy.defect,
                          to_string(out.status), out.iterations};
      auto js = open_output(output_path(cfg, "_result.json"));
      js << efficiencies_json(*out.table, meta);
    }
    log << "converged in " << out.iterations << " iterations, relative residual " << out.residual
        << ", energy " << (out.energy.lossless ? "defect " : "absorbed fraction ")
        << out.energy.defect << '\n';
    return kExitOk;
  });
}

int cmd_sweep(const std::filesystem::path &config, const std::string &parameter, double from,
              double to, int steps, std::ostream &log) {
  return guarded(log, [&] {
    if (parameter != "k" && parameter != "theta") {
      throw ConfigError("sweep parameter must be k or theta, got '" + parameter + "'");
    }
    if (steps < 1) {
      throw ConfigError("sweep needs at least one step");
    }
    const RunConfig base = load_config(config);
    std::vector<double> values(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      values[i] = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    }

    struct Point {
      double value = 0.0;
      std::optional<SolveOutcome> outcome;
      std::string warning;
      bool invalid = false;
    };
    std::vector<Point> points(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < values.size(); i = next++) {
        Point &pt = points[i];
        pt.value = values[i];
        RunConfig cfg = base;
        if (parameter == "k") {
          cfg.problem.k = values[i];
        } else {
          cfg.problem.theta_deg = values[i];
        }
        try {
          pt.outcome = run_solve(cfg);
        } catch (const RayleighAnomaly &e) {
          pt.warning = e.what();
        } catch (const Error &e) {
          pt.warning = e.what();
          pt.invalid = true;
        }
      }
    };
    const unsigned n_threads = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(values.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) {
      pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
      t.join();
    }

    std::sort(points.begin(), points.end(),
              [](const Point &a, const Point &b) { return a.value < b.value; });
    auto csv = open_output(output_path(base, "_sweep.csv"));
    csv << "parameter,value,status,j,alpha_j,beta_j_re,beta_j_im,e_refl,e_trans,residual,energy_defect\r\n";
    bool all_converged = true;
    for (const Point &pt : points) {
      if (!pt.outcome) {
        log << "warning: skipping " << parameter << " = " << pt.value << ": " << pt.warning << '\n';
        if (pt.invalid) {
          return kExitInvalid;
        }
        continue;
      }
      const SolveOutcome &o = *pt.outcome;
      if (!o.table) {
        all_converged = false;
        log << "warning: " << parameter << " = " << pt.value << " " << to_string(o.status) << '\n';
        continue;
      }
      for (const auto &r : o.table->rows) {
        csv << parameter << ',' << fmt(pt.value) << ',' << to_string(o.status) << ',' << r.j << ','
            << fmt(r.alpha_j) << ',' << fmt(r.beta_j.real()) << ',' << fmt(r.beta_j.imag()) << ','
            << fmt(r.e_refl) << ',' << fmt(r.e_trans) << ',' << fmt(o.residual) << ','
            << fmt(o.energy.defect) << "\r\n";
      }
    }
    log << "sweep over " << values.size() << " points written to "
        << output_path(base, "_sweep.csv").string() << '\n';
    return all_converged ? kExitOk : kExitNotConverged;
  });
}

int cmd_diagnose(const std::filesystem::path &config, std::ostream &log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(config);
    const Problem problem = make_problem(cfg);
    std::string json;
    try {
      const GardingReport report = diagnose(problem, cfg.smoothness);
      json = garding_report_json(report);
      log << "sign of Re(Q): " << to_string(report.sign) << "; " << report.interpretation << '\n';
    } catch (const SingularReQ &e) {
      nlohmann::ordered_json doc;
      doc["error"] = e.what();
      doc["singular_nodes"] = e.nodes();
      json = doc.dump(2) + "\n";
      log << "warning: " << e.what() << '\n';
    }
    auto os = open_output(output_path(cfg, "_diagnosis.json"));
    os << json;
    return kExitOk;
  });
}

int cmd_validate(const std::string &level, std::ostream &log) {
  if (level != "quick" && level != "full") {
    log << "error: validation level must be quick or full\n";
    return kExitInvalid;
  }
  const auto results = run_gates(level == "full" ? GateLevel::Full : GateLevel::Quick);
  bool ok = true;
  for (const auto &g : results) {
    log << (g.passed ? "PASS " : "FAIL ") << g.name << ": value " << g.value << ", threshold "
        << g.tolerance << " (" << g.detail << ")\n";
    ok = ok && g.passed;
  }
  return ok ? kExitOk : kExitFailed;
}

} // namespace grating
