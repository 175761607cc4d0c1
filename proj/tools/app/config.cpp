#include "config.hpp"

#include "spme/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace spme::app {

using nlohmann::json;

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Validate: return "validate";
    case ExperimentKind::Skeleton: return "skeleton";
    case ExperimentKind::ConvergeLambda: return "converge-lambda";
    case ExperimentKind::ConvergeNu: return "converge-nu";
    case ExperimentKind::McA: return "mc-a";
    case ExperimentKind::WeakB: return "weak-b";
    case ExperimentKind::Rate: return "rate";
  }
  return "?";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::Validate, ExperimentKind::Skeleton, ExperimentKind::ConvergeLambda,
                 ExperimentKind::ConvergeNu, ExperimentKind::McA, ExperimentKind::WeakB,
                 ExperimentKind::Rate}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

// Strict view of a JSON object: every key must be consumed before finish().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }

  const json& raw(const std::string& k) {
    if (!j_.contains(k)) throw ConfigError(key(k), "missing");
    used_.insert(k);
    return j_.at(k);
  }
  Obj object(const std::string& k) { return Obj(raw(k), key(k)); }

  double num(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k), "must be finite");
    return d;
  }
  double num(const std::string& k, double def) { return has(k) ? num(k) : def; }

  std::uint64_t count(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(key(k), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& k, std::uint64_t def) { return has(k) ? count(k) : def; }

  bool flag(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& k, const std::string& def) { return has(k) ? str(k) : def; }

  std::vector<double> nums(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key(k), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

GridPtr build_grid(Obj o) {
  const std::string type = o.str("type");
  GridPtr grid;
  if (type == "periodic1d") {
    const auto n = o.count("n");
    const double length = o.num("length");
    if (n < 1) throw ConfigError(o.key("n"), "must be at least 1");
    if (!(length > 0.0)) throw ConfigError(o.key("length"), "must be positive");
    grid = MeasureGrid::periodic1d(n, length);
  } else if (type == "weights") {
    auto w = o.nums("weights");
    try {
      grid = MeasureGrid::from_weights(std::move(w));
    } catch (const Error& e) {
      throw ConfigError(o.key("weights"), e.what());
    }
  } else {
    throw ConfigError(o.key("type"), "unknown grid type '" + type + "'");
  }
  o.finish();
  return grid;
}

SpectralGenerator build_generator(Obj o, const GridPtr& grid, double& alpha,
                                  std::optional<SpectralGenerator>& base) {
  const std::string type = o.str("type", "laplacian");
  GeneratorOptions gopts;
  gopts.eig_tol = o.num("eig_tol", gopts.eig_tol);
  gopts.symmetry_tol = o.num("symmetry_tol", gopts.symmetry_tol);
  alpha = o.num("alpha", 1.0);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError(o.key("alpha"), "must lie in (0, 1]");

  std::optional<SpectralGenerator> g;
  try {
    if (type == "laplacian") {
      if (!grid->spacing()) throw ConfigError(o.key("type"), "laplacian needs a periodic1d grid");
      g = SpectralGenerator::periodic_laplacian(grid);
    } else if (type == "dense") {
      const json& m = o.raw("matrix");
      const auto n = static_cast<Eigen::Index>(grid->size());
      if (!m.is_array() || static_cast<Eigen::Index>(m.size()) != n)
        throw ConfigError(o.key("matrix"), "expected an n x n array");
      Eigen::MatrixXd a(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = m[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
          throw ConfigError(o.key("matrix"), "expected an n x n array");
        for (Eigen::Index j = 0; j < n; ++j) {
          if (!row[static_cast<std::size_t>(j)].is_number()) throw ConfigError(o.key("matrix"), "non-numeric entry");
          a(i, j) = row[static_cast<std::size_t>(j)].get<double>();
        }
      }
      g = SpectralGenerator::from_dense(grid, a, gopts);
    } else {
      throw ConfigError(o.key("type"), "unknown generator type '" + type + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(o.key(type == "dense" ? "matrix" : "type"), e.what());
  }
  o.finish();
  base = g;
  return alpha == 1.0 ? *g : fractional(*g, alpha);
}

Nonlinearity build_nonlinearity(Obj o) {
  const std::string kind = o.str("kind");
  NonlinearityParams p;
  p.k1 = o.num("k1", p.k1);
  p.k2 = o.num("k2", p.k2);
  p.m = o.num("m", p.m);
  p.s_max = o.num("s_max", p.s_max);
  NonlinearityKind k;
  try {
    k = nonlinearity_kind_from_string(kind);
  } catch (const Error&) {
    throw ConfigError(o.key("kind"), "unknown nonlinearity '" + kind + "'");
  }
  o.finish();
  if (p.k1 < 0.0) throw ConfigError(o.key("k1"), "must be non-negative");
  if (p.k2 < 0.0) throw ConfigError(o.key("k2"), "must be non-negative");
  if (p.m < 1.0) throw ConfigError(o.key("m"), "must be at least 1");
  if (!(p.s_max > 0.0)) throw ConfigError(o.key("s_max"), "must be positive");
  return Nonlinearity(k, p);
}

NoiseParams build_noise(Obj o) {
  NoiseParams p;
  p.c0 = o.num("c0", p.c0);
  p.c1 = o.num("c1", p.c1);
  p.c2 = o.num("c2", p.c2);
  p.gamma = o.num("gamma", p.gamma);
  p.beta = o.num("beta", p.beta);
  o.finish();
  if (p.c0 < 0.0) throw ConfigError(o.key("c0"), "must be non-negative");
  if (p.c1 < 0.0) throw ConfigError(o.key("c1"), "must be non-negative");
  if (p.c2 < 0.0) throw ConfigError(o.key("c2"), "must be non-negative");
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw ConfigError(o.key("gamma"), "must lie in (0, 1]");
  if (p.beta < 0.0) throw ConfigError(o.key("beta"), "must be non-negative");
  return p;
}

Control build_control(Obj o, const SpectralGenerator& g, double horizon) {
  const std::string type = o.str("type", "zero");
  std::vector<Field> cells;
  if (type == "zero") {
    const auto n = o.count("cells", 1);
    if (n < 1) throw ConfigError(o.key("cells"), "must be at least 1");
    o.finish();
    return Control::zero(g.grid(), horizon, n);
  }
  if (type == "constant") {
    const auto n = o.count("cells", 1);
    if (n < 1) throw ConfigError(o.key("cells"), "must be at least 1");
    const Field f = build_field(o.raw("field"), g, o.key("field"));
    cells.assign(n, f);
  } else if (type == "cells") {
    const json& v = o.raw("values");
    if (!v.is_array() || v.empty()) throw ConfigError(o.key("values"), "expected a non-empty array of fields");
    for (std::size_t i = 0; i < v.size(); ++i)
      cells.push_back(build_field(v[i], g, o.key("values") + "[" + std::to_string(i) + "]"));
  } else {
    throw ConfigError(o.key("type"), "unknown control type '" + type + "'");
  }
  o.finish();
  return Control(horizon, std::move(cells));
}

std::vector<double> positive_decreasing(Obj& o, const std::string& k, double upper) {
  auto v = o.nums(k);
  if (v.size() < 2) throw ConfigError(o.key(k), "needs at least two values");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0 && v[i] < upper)) throw ConfigError(o.key(k), "values must lie in (0, " + std::to_string(upper) + ")");
    if (i > 0 && !(v[i] < v[i - 1])) throw ConfigError(o.key(k), "must be strictly decreasing");
  }
  return v;
}

void build_experiment(Obj o, ExperimentConfig& c) {
  if (o.has("type")) {
    const auto t = o.str("type");
    const auto k = experiment_from_string(t);
    if (!k) throw ConfigError(o.key("type"), "unknown experiment '" + t + "'");
    c.kind = *k;
  } else {
    throw ConfigError(o.key("type"), "missing");
  }
  switch (c.kind) {
    case ExperimentKind::Validate: {
      auto& p = c.validate;
      p.samples = o.count("samples", p.samples);
      if (o.has("times")) p.times = o.nums("times");
      if (o.has("alphas")) p.alphas = o.nums("alphas");
      p.pairing_pairs = o.count("pairing_pairs", p.pairing_pairs);
      if (p.samples < 1) throw ConfigError(o.key("samples"), "must be at least 1");
      for (double t : p.times)
        if (!(t > 0.0)) throw ConfigError(o.key("times"), "must be positive");
      for (double a : p.alphas)
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError(o.key("alphas"), "must lie in (0, 1]");
      break;
    }
    case ExperimentKind::Skeleton: {
      auto& r = c.skeleton.reg;
      r.nu = o.num("nu", 0.0);
      r.lambda = o.num("lambda", 0.0);
      if (!(r.nu >= 0.0 && r.nu < 1.0)) throw ConfigError(o.key("nu"), "must lie in [0, 1)");
      if (!(r.lambda >= 0.0 && r.lambda < 1.0)) throw ConfigError(o.key("lambda"), "must lie in [0, 1)");
      break;
    }
    case ExperimentKind::ConvergeLambda: {
      c.lambda.nu = o.num("nu", c.lambda.nu);
      if (!(c.lambda.nu >= 0.0 && c.lambda.nu < 1.0)) throw ConfigError(o.key("nu"), "must lie in [0, 1)");
      c.lambda.lambdas = positive_decreasing(o, "lambdas", 1.0);
      break;
    }
    case ExperimentKind::ConvergeNu:
      c.nu.nus = positive_decreasing(o, "nus", 1.0);
      break;
    case ExperimentKind::McA: {
      c.mc.eps = positive_decreasing(o, "eps", INFINITY);
      c.mc.samples = o.count("samples", c.mc.samples);
      c.mc.modes = o.count("modes", 0);
      if (c.mc.samples < 2) throw ConfigError(o.key("samples"), "must be at least 2");
      if (c.mc.modes > c.model->generator().size()) throw ConfigError(o.key("modes"), "exceeds the grid size");
      break;
    }
    case ExperimentKind::WeakB: {
      c.weak.amplitude = o.num("amplitude", c.weak.amplitude);
      if (o.has("n_list")) {
        const json& v = o.raw("n_list");
        if (!v.is_array() || v.empty()) throw ConfigError(o.key("n_list"), "expected an array of integers");
        c.weak.n_list.clear();
        for (const auto& e : v) {
          if (!e.is_number_integer() || e.get<long long>() <= 0)
            throw ConfigError(o.key("n_list"), "entries must be positive integers");
          c.weak.n_list.push_back(e.get<int>());
        }
        for (std::size_t i = 1; i < c.weak.n_list.size(); ++i)
          if (c.weak.n_list[i] <= c.weak.n_list[i - 1]) throw ConfigError(o.key("n_list"), "must be increasing");
      }
      break;
    }
    case ExperimentKind::Rate: {
      auto& p = c.rate;
      p.modes = o.count("modes", p.modes);
      p.cells = o.count("cells", p.cells);
      p.terminal_tol = o.num("terminal_tol", p.terminal_tol);
      if (o.has("target")) {
        Obj t = o.object("target");
        const std::string base = t.str("base", "free_flow");
        if (base == "free_flow") p.target_from_free_flow = true;
        else if (base == "zero") p.target_from_free_flow = false;
        else throw ConfigError(t.key("base"), "expected 'free_flow' or 'zero'");
        if (t.has("displacement")) p.displacement = t.raw("displacement");
        t.finish();
      }
      if (o.has("penalties")) p.minimize.penalties = o.nums("penalties");
      p.minimize.max_iterations = static_cast<int>(o.count("max_iterations", 200));
      if (o.has("energy_bound")) p.minimize.energy_bound = o.num("energy_bound");
      p.oracle = o.flag("oracle", true);
      const std::size_t n = c.model->generator().size();
      if (p.modes < 1 || p.modes > n) throw ConfigError(o.key("modes"), "must lie in [1, n]");
      if (p.cells < 1 || p.cells > c.steps || c.steps % p.cells != 0)
        throw ConfigError(o.key("cells"), "must divide N_t");
      if (!(p.terminal_tol > 0.0)) throw ConfigError(o.key("terminal_tol"), "must be positive");
      for (double d : p.minimize.penalties)
        if (!(d > 0.0)) throw ConfigError(o.key("penalties"), "must be positive");
      if (p.minimize.energy_bound && !(*p.minimize.energy_bound > 0.0))
        throw ConfigError(o.key("energy_bound"), "must be positive");
      if (!p.displacement.is_null()) build_field(p.displacement, c.model->generator(), o.key("target.displacement"));
      break;
    }
  }
  o.finish();
}

}  // namespace

Field build_field(const json& desc, const SpectralGenerator& g, const std::string& where) {
  Obj o(desc, where);
  const std::string type = o.str("type");
  const auto& grid = g.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  if (type == "zero") {
  } else if (type == "constant") {
    v.setConstant(o.num("value"));
  } else if (type == "sine" || type == "cosine") {
    if (!grid->labels() || !grid->spacing()) throw ConfigError(o.key("type"), "needs a periodic1d grid");
    const double k = o.num("k", 1.0);
    const double a = o.num("amplitude", 1.0);
    const double length = *grid->spacing() * static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double arg = 2.0 * 3.14159265358979323846 * k * (*grid->labels())(i) / length;
      v(i) = a * (type == "sine" ? std::sin(arg) : std::cos(arg));
    }
  } else if (type == "values") {
    const auto vals = o.nums("values");
    if (static_cast<Eigen::Index>(vals.size()) != n) throw ConfigError(o.key("values"), "length must equal n");
    for (Eigen::Index i = 0; i < n; ++i) v(i) = vals[static_cast<std::size_t>(i)];
  } else if (type == "modes") {
    const auto c = o.nums("coefficients");
    if (static_cast<Eigen::Index>(c.size()) > n) throw ConfigError(o.key("coefficients"), "more coefficients than modes");
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < c.size(); ++k) coeffs(static_cast<Eigen::Index>(k)) = c[k];
    v = g.synthesize_values(coeffs);
  } else if (type == "point") {
    const auto i = o.count("index");
    const double mass = o.num("mass", 1.0);
    if (i >= g.size()) throw ConfigError(o.key("index"), "outside the grid");
    v(static_cast<Eigen::Index>(i)) = mass / grid->weight(i);
  } else if (type == "spectral_power") {
    // coefficients a (1 - lambda_k)^p in every mode
    const double p = o.num("exponent");
    const double a = o.num("amplitude", 1.0);
    Eigen::VectorXd coeffs(n);
    for (Eigen::Index k = 0; k < n; ++k) coeffs(k) = a * std::pow(1.0 - g.eigenvalues()(k), p);
    v = g.synthesize_values(coeffs);
  } else {
    throw ConfigError(o.key("type"), "unknown field type '" + type + "'");
  }
  o.finish();
  if (!v.allFinite()) throw ConfigError(where, "field is not finite");
  return Field(grid, v);
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  Obj root(doc, "");
  const GridPtr grid = build_grid(root.object("grid"));
  const SpectralGenerator g = build_generator(root.object("generator"), grid, c.alpha, c.base_generator);
  const Nonlinearity psi = build_nonlinearity(root.object("nonlinearity"));
  const NoiseParams np = build_noise(root.object("diffusion"));

  Obj run = root.object("run");
  const double T = run.num("T");
  if (!(T > 0.0)) throw ConfigError(run.key("T"), "must be positive");
  c.steps = run.count("N_t");
  if (c.steps < 1) throw ConfigError(run.key("N_t"), "must be at least 1");
  c.x = build_field(run.raw("x"), g, run.key("x"));
  c.control = run.has("control") ? build_control(run.object("control"), g, T) : Control::zero(grid, T, 1);
  run.finish();

  try {
    c.model = Model{psi, NoiseCoefficient(TripleContext(g), np, T)};
  } catch (const Error& e) {
    throw ConfigError("diffusion", e.what());
  }

  c.seed = root.count("seed", 0);
  c.output_dir = root.str("output_dir", "");
  build_experiment(root.object("experiment"), c);
  root.finish();

  c.echo = nlohmann::ordered_json::parse(doc.dump());
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace spme::app
