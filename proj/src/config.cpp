#include "grating/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace grating {

namespace pt = boost::property_tree;

Mat2c MatrixEntries::matrix() const {
  Mat2c m;
  m << q11, q12, q12, q22;
  return m;
}

bool RunConfig::wants(const std::string &format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

namespace {

const std::set<std::string> kMatrixKeys{"q", "q_im", "q11", "q12", "q22", "q11_im", "q12_im", "q22_im"};

const std::map<std::string, std::set<std::string>> kShapeKeys{
    {"vacuum", {}},
    {"slab", {"lower", "upper"}},
    {"two-layer", {"lower", "interface", "upper"}},
    {"rectangle", {"width", "height", "center_x1", "center_x2"}},
    {"circle", {"radius", "center_x1", "center_x2"}},
    {"raster", {"raster"}},
};

const std::set<std::string> kProblemCommon{"k", "theta", "rho_ref", "h", "shape"};
const std::set<std::string> kNumericsKeys{"n1",          "n2",      "rho_box", "rel_tol",
                                          "max_iterations", "restart", "dealias"};
const std::set<std::string> kOutputKeys{"directory", "prefix", "formats"};
const std::set<std::string> kAnalysisKeys{"assert_smooth_coefficient", "assert_smooth_boundary"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

class Section {
public:
  Section(std::string name, const pt::ptree *tree) : name_(std::move(name)), tree_(tree) {}

  bool has(const std::string &key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  std::string raw(const std::string &key) const {
    if (!has(key)) {
      throw ConfigError("missing required key [" + name_ + "] " + key);
    }
    return trim(tree_->get<std::string>(key));
  }

  double number(const std::string &key) const {
    const std::string s = raw(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) {
        throw std::invalid_argument(s);
      }
      return v;
    } catch (const std::exception &) {
      throw ConfigError("[" + name_ + "] " + key + " = '" + s + "' is not a finite number");
    }
  }

  double number_or(const std::string &key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::optional<double> optional_number(const std::string &key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  int integer(const std::string &key, int fallback) const {
    if (!has(key)) {
      return fallback;
    }
    const std::string s = raw(key);
    try {
      std::size_t used = 0;
      const long v = std::stol(s, &used);
      if (used != s.size()) {
        throw std::invalid_argument(s);
      }
      return static_cast<int>(v);
    } catch (const std::exception &) {
      throw ConfigError("[" + name_ + "] " + key + " = '" + s + "' is not an integer");
    }
  }

  bool boolean(const std::string &key, bool fallback) const {
    if (!has(key)) {
      return fallback;
    }
    std::string s = raw(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "1" || s == "on") {
      return true;
    }
    if (s == "false" || s == "no" || s == "0" || s == "off") {
      return false;
    }
    throw ConfigError("[" + name_ + "] " + key + " = '" + s + "' is not a boolean");
  }

  void require_only(const std::set<std::string> &allowed) const {
    if (!tree_) {
      return;
    }
    for (const auto &[key, value] : *tree_) {
      if (!allowed.contains(key)) {
        throw ConfigError("unknown or misplaced key [" + name_ + "] " + key);
      }
    }
  }

private:
  std::string name_;
  const pt::ptree *tree_;
};

MatrixEntries read_matrix(const Section &s, const std::string &where) {
  const bool scalar = s.has("q") || s.has("q_im");
  const bool tensor = s.has("q11") || s.has("q12") || s.has("q22") || s.has("q11_im") ||
                      s.has("q12_im") || s.has("q22_im");
  if (scalar && tensor) {
    throw ConfigError(where + ": give either q (scalar) or q11/q12/q22, not both");
  }
  if (!scalar && !tensor) {
    throw ConfigError(where + ": missing contrast entries (q or q11/q12/q22)");
  }
  MatrixEntries m;
  if (scalar) {
    const Complex q(s.number("q"), s.number_or("q_im", 0.0));
    m.q11 = q;
    m.q22 = q;
    return m;
  }
  m.q11 = Complex(s.number("q11"), s.number_or("q11_im", 0.0));
  m.q12 = Complex(s.number_or("q12", 0.0), s.number_or("q12_im", 0.0));
  m.q22 = Complex(s.number("q22"), s.number_or("q22_im", 0.0));
  return m;
}

const pt::ptree *child(const pt::ptree &root, const std::string &name) {
  const auto it = root.find(name);
  return it == root.not_found() ? nullptr : &it->second;
}

} // namespace

RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  pt::ptree root;
  try {
    std::istringstream is(text);
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(std::string("malformed configuration: ") + e.message());
  }
  for (const auto &[name, tree] : root) {
    if (tree.empty() && !tree.data().empty()) {
      throw ConfigError("key '" + name + "' outside of any section");
    }
    if (name != "problem" && name != "numerics" && name != "output" && name != "upper_layer" &&
        name != "analysis") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  if (!child(root, "problem")) {
    throw ConfigError("missing [problem] section");
  }

  RunConfig cfg;
  const Section problem("problem", child(root, "problem"));
  ProblemBlock &p = cfg.problem;
  p.shape = problem.raw("shape");
  const auto shape_it = kShapeKeys.find(p.shape);
  if (shape_it == kShapeKeys.end()) {
    throw ConfigError("unknown shape '" + p.shape +
                      "' (expected vacuum, slab, two-layer, rectangle, circle or raster)");
  }
  std::set<std::string> allowed = kProblemCommon;
  allowed.insert(shape_it->second.begin(), shape_it->second.end());
  if (p.shape != "vacuum" && p.shape != "raster") {
    allowed.insert(kMatrixKeys.begin(), kMatrixKeys.end());
  }
  problem.require_only(allowed);

  p.k = problem.number("k");
  p.theta_deg = problem.number_or("theta", 0.0);
  p.rho_ref = problem.optional_number("rho_ref");
  p.h = problem.optional_number("h");
  if (p.shape == "slab") {
    p.lower = problem.number("lower");
    p.upper = problem.number("upper");
  } else if (p.shape == "two-layer") {
    p.lower = problem.number("lower");
    p.interface = problem.number("interface");
    p.upper = problem.number("upper");
  } else if (p.shape == "rectangle") {
    p.width = problem.number("width");
    p.height = problem.number("height");
    p.center_x1 = problem.number_or("center_x1", 0.0);
    p.center_x2 = problem.number_or("center_x2", 0.0);
  } else if (p.shape == "circle") {
    p.radius = problem.number("radius");
    p.center_x1 = problem.number_or("center_x1", 0.0);
    p.center_x2 = problem.number_or("center_x2", 0.0);
  } else if (p.shape == "raster") {
    p.raster = base_dir / problem.raw("raster");
  }
  if (p.shape != "vacuum" && p.shape != "raster") {
    p.q = read_matrix(problem, "[problem]");
  }

  const Section upper("upper_layer", child(root, "upper_layer"));
  if (p.shape == "two-layer") {
    if (!child(root, "upper_layer")) {
      throw ConfigError("shape two-layer needs an [upper_layer] section");
    }
    upper.require_only(kMatrixKeys);
    p.q_upper = read_matrix(upper, "[upper_layer]");
  } else if (child(root, "upper_layer")) {
    throw ConfigError("[upper_layer] is only valid for shape two-layer");
  }

  const Section numerics("numerics", child(root, "numerics"));
  numerics.require_only(kNumericsKeys);
  NumericsBlock &n = cfg.numerics;
  n.n1 = numerics.integer("n1", n.n1);
  n.n2 = numerics.integer("n2", n.n2);
  n.rho_box = numerics.optional_number("rho_box");
  n.rel_tol = numerics.number_or("rel_tol", n.rel_tol);
  n.max_iterations = numerics.integer("max_iterations", n.max_iterations);
  n.restart = numerics.integer("restart", n.restart);
  n.dealias = numerics.boolean("dealias", n.dealias);

  const Section output("output", child(root, "output"));
  output.require_only(kOutputKeys);
  if (output.has("directory")) {
    cfg.output.directory = base_dir / output.raw("directory");
  } else {
    cfg.output.directory = base_dir;
  }
  if (output.has("prefix")) {
    cfg.output.prefix = output.raw("prefix");
  }
  if (output.has("formats")) {
    cfg.output.formats.clear();
    std::istringstream fs(output.raw("formats"));
    std::string item;
    while (std::getline(fs, item, ',')) {
      item = trim(item);
      if (item != "csv" && item != "json") {
        throw ConfigError("unknown output format '" + item + "' (expected csv or json)");
      }
      cfg.output.formats.push_back(item);
    }
  }

  const Section analysis("analysis", child(root, "analysis"));
  analysis.require_only(kAnalysisKeys);
  cfg.smoothness.coefficient_c21 = analysis.boolean("assert_smooth_coefficient", false);
  cfg.smoothness.boundary_c21 = analysis.boolean("assert_smooth_boundary", false);
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot read configuration file " + path.string());
  }
  std::ostringstream text;
  text << is.rdbuf();
  return parse_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

ProblemSetup make_setup(const RunConfig &config) {
  const ProblemBlock &p = config.problem;
  const double theta = p.theta_deg * kPi / 180.0;
  if (!(std::abs(p.theta_deg) < 90.0)) {
    throw ConfigError("incidence angle theta must lie strictly between -90 and 90 degrees");
  }
  IncidentWave wave = IncidentWave::from_angle(p.k, theta);

  ContrastField contrast;
  if (p.shape == "vacuum") {
    contrast = zero_contrast();
  } else if (p.shape == "slab") {
    contrast = slab_contrast(p.q.matrix(), p.lower, p.upper);
  } else if (p.shape == "two-layer") {
    contrast = two_layer_contrast(p.q.matrix(), p.q_upper->matrix(), p.lower, p.interface, p.upper);
  } else if (p.shape == "rectangle") {
    contrast = rectangle_contrast(p.q.matrix(), {p.center_x1, p.center_x2}, p.width, p.height);
  } else if (p.shape == "circle") {
    contrast = circle_contrast(p.q.matrix(), {p.center_x1, p.center_x2}, p.radius);
  } else {
    contrast = raster_contrast(p.raster);
  }
  if (p.h) {
    if (*p.h < contrast.support_half_height) {
      std::ostringstream os;
      os << "declared support half-height h = " << *p.h << " is below the shape's extent "
         << contrast.support_half_height;
      throw ConfigError(os.str());
    }
    contrast.support_half_height = *p.h;
  }
  const double rho_box =
      config.numerics.rho_box.value_or(default_rho_box(contrast.support_half_height));
  const Grid grid(config.numerics.n1, config.numerics.n2, rho_box);
  BuildOptions options;
  options.rho_ref = p.rho_ref;
  options.dealias = config.numerics.dealias;
  return {wave, std::move(contrast), grid, options};
}

Problem make_problem(const RunConfig &config) {
  const ProblemSetup s = make_setup(config);
  return build_problem(s.wave, s.contrast, s.grid, s.options);
}

SolveOptions make_solve_options(const RunConfig &config) {
  SolveOptions o;
  o.rel_tol = config.numerics.rel_tol;
  o.max_iterations = config.numerics.max_iterations;
  o.restart = config.numerics.restart;
  try {
    o.validate();
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
  return o;
}

} // namespace grating
