#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grating/analysis.hpp"
#include "grating/problem.hpp"
#include "grating/solver.hpp"

namespace grating {

struct MatrixEntries {
  Complex q11;
  Complex q12;
  Complex q22;

  Mat2c matrix() const;
};

struct ProblemBlock {
  double k = 0.0;
  double theta_deg = 0.0;
  std::optional<double> rho_ref;
  std::optional<double> h;
  std::string shape;
  MatrixEntries q;
  std::optional<MatrixEntries> q_upper;  // two-layer only
  double radius = 0.0;
  double center_x1 = 0.0;
  double center_x2 = 0.0;
  double width = 0.0;
  double height = 0.0;
  double lower = 0.0;
  double interface = 0.0;
  double upper = 0.0;
  std::filesystem::path raster;
};

struct NumericsBlock {
  int n1 = 64;
  int n2 = 256;
  std::optional<double> rho_box;
  double rel_tol = 1e-8;
  int max_iterations = 500;
  int restart = 50;
  bool dealias = false;
};

struct OutputBlock {
  std::filesystem::path directory = ".";
  std::string prefix = "result";
  std::vector<std::string> formats{"csv", "json"};
};

struct RunConfig {
  ProblemBlock problem;
  NumericsBlock numerics;
  OutputBlock output;
  SmoothnessFlags smoothness;

  bool wants(const std::string &format) const;
};

// Strict INI parsing: unknown sections or keys, missing required keys and
// malformed values raise ConfigError. Relative paths resolve against the
// directory of the file.
RunConfig load_config(const std::filesystem::path &path);
RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir = ".");

struct ProblemSetup {
  IncidentWave wave;
  ContrastField contrast;
  Grid grid;
  BuildOptions options;
};

ProblemSetup make_setup(const RunConfig &config);
Problem make_problem(const RunConfig &config);
SolveOptions make_solve_options(const RunConfig &config);

} // namespace grating
