#include "experiments.hpp"

#include "spme/errors.hpp"
#include "spme/spde.hpp"
#include "spme/version.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace spme::app {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }
  template <class... Ts>
  void row(const Ts&... vs) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(vs), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  std::ostringstream out_;
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json fit_json(const LineFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"rms_residual", f.rms_residual}};
}

void run_validate(const ExperimentConfig& c, RunOutput& out) {
  const auto& p = c.validate;
  const Model& m = *c.model;
  Csv csv({"check", "value", "threshold", "pass"});
  ordered_json s;
  bool all = true;
  auto add = [&](const std::string& name, double value, double threshold, bool pass) {
    csv.row(name, value, threshold, pass);
    s["checks"].push_back({{"check", name}, {"value", value}, {"threshold", threshold}, {"pass", pass}});
    all = all && pass;
  };

  const H1Report h1 = validate_h1(m.psi, p.samples, c.seed);
  add("h1.psi_zero", h1.psi_zero_ok ? 0.0 : 1.0, 0.0, h1.psi_zero_ok);
  add("h1.monotone_margin", h1.worst_monotone_margin, -1e-12, h1.worst_monotone_margin >= -1e-12);
  add("h1.lipschitz_margin", h1.worst_lipschitz_margin, -1e-12, h1.worst_lipschitz_margin >= -1e-12);
  if (h1.worst_coercivity_margin)
    add("h1.coercivity_margin", *h1.worst_coercivity_margin, -1e-12, *h1.worst_coercivity_margin >= -1e-12);
  add("h1.passed", h1.passed ? 1.0 : 0.0, 1.0, h1.passed);
  const MonotoneInequalityReport mono = check_monotone_inequality(m.psi, p.samples, c.seed);
  add("h1.alpha_tilde_margin", mono.worst_margin, -1e-12, mono.passed);

  const HypothesisReport h2 = validate_hypotheses(m.noise, p.samples, c.seed);
  add("h2.lipschitz_margin", h2.lipschitz_margin, -1e-12, h2.lipschitz_ok);
  add("h2.growth_margin", h2.growth_margin, -1e-12, h2.growth_ok);
  add("h3.holder_margin", h2.holder_margin, -1e-12, h2.holder_ok);

  auto submarkov = [&](const std::string& name, const SpectralGenerator& g) {
    SubMarkovOptions so;
    so.seed = c.seed;
    const SubMarkovReport r = validate_submarkov(g, p.times, so);
    add("submarkov." + name, r.worst_violation(), 1e-10, r.all_pass());
  };
  submarkov("model", m.generator());
  for (double a : p.alphas) submarkov("alpha=" + format_double(a), fractional(*c.base_generator, a));

  // Isometry on seeded random pairs, relative to |u|_2 |v|_2.
  const auto& g = m.generator();
  const auto n = static_cast<Eigen::Index>(g.size());
  double worst_pair = 0.0;
  for (std::size_t i = 0; i < p.pairing_pairs; ++i) {
    Eigen::VectorXd u(n), v(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      u(k) = normal_variate(c.seed, i, 0, static_cast<std::uint64_t>(k));
      v(k) = normal_variate(c.seed, i, 1, static_cast<std::uint64_t>(k));
    }
    const Field fu(g.grid(), u), fv(g.grid(), v);
    const PairingResult r = pairing_check(m.context(), fu, fv);
    worst_pair = std::max(worst_pair, std::abs(r.dual_pairing - r.l2_inner) / (norm_l2(fu) * norm_l2(fv)));
  }
  add("pairing.relative", worst_pair, 1e-10, worst_pair <= 1e-10);

  double worst_gamma = 0.0;
  Eigen::VectorXd u(n);
  for (Eigen::Index k = 0; k < n; ++k) u(k) = normal_variate(c.seed, 0, 2, static_cast<std::uint64_t>(k));
  const Field fu(g.grid(), u);
  for (double r : {1.0, 2.0, 3.0}) {
    const Field q = gamma_transform(g, r, fu);
    const Field e = g.multiply(fu, [r](double l) { return std::pow(1.0 - l, -r / 2.0); });
    worst_gamma = std::max(worst_gamma, norm_l2(q - e) / norm_l2(e));
  }
  add("gamma_transform.relative", worst_gamma, 1e-6, worst_gamma <= 1e-6);

  s["all_pass"] = all;
  out.artifacts.push_back({"validate.csv", csv.str()});
  out.summary = s;
}

void run_skeleton(const ExperimentConfig& c, RunOutput& out) {
  const Model& m = *c.model;
  const PathSolution p = solve_regularized(m, *c.control, *c.x, c.steps, c.skeleton.reg);
  Csv csv({"t", "l2_norm", "fstar_norm", "psi_integral_f12", "step_iterations", "step_residual"});
  ordered_json dumpj;
  dumpj["times"] = p.times;
  dumpj["states"] = ordered_json::array();
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    csv.row(p.times[i], p.l2_norm[i], p.fstar_norm[i], p.psi_integral_f12[i], p.iterations[i], p.residuals[i]);
    const auto& v = p.states[i].values();
    dumpj["states"].push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  out.artifacts.push_back({"path.csv", csv.str()});
  out.artifacts.push_back({"path.json", dump(dumpj)});
  out.summary = {{"steps", p.steps()},
                 {"nu", c.skeleton.reg.nu},
                 {"lambda", c.skeleton.reg.lambda},
                 {"integral_identity_defect", integral_identity_defect(m, *c.control, *c.x, p, c.skeleton.reg)},
                 {"control_energy", p.control_energy},
                 {"final_l2_norm", p.l2_norm.back()},
                 {"used_picard", p.used_picard},
                 {"warnings", p.warnings}};
}

void rate_outputs(const RateReport& r, const char* a, const char* b, RunOutput& out) {
  Csv csv({a, b, "abscissa", "distance"});
  for (const auto& p : r.pairs) csv.row(p.first, p.second, p.abscissa, p.distance);
  out.artifacts.push_back({"rate.csv", csv.str()});
  out.summary = {{"fit", fit_json(r.fit)}, {"monotone", r.monotone}};
}

void run_mc(const ExperimentConfig& c, RunOutput& out) {
  const Model& m = *c.model;
  McOptions o;
  o.modes = c.mc.modes;
  o.threads = c.threads;
  const McReport r = mc_condition_a(m, *c.control, *c.x, c.steps, c.mc.eps, c.mc.samples, c.seed, o);
  Csv csv({"epsilon", "mean", "stderr", "n_effective", "terminal_mean", "terminal_stderr", "failed"});
  for (const auto& row : r.rows)
    csv.row(row.epsilon, row.mean, row.stderr_mean, row.n_effective, row.terminal_mean, row.terminal_stderr, row.failed);
  out.artifacts.push_back({"mc.csv", csv.str()});
  out.summary = {{"fit", fit_json(r.fit)}, {"monotone", r.monotone}, {"warnings", r.warnings}};
  const bool gaussian = m.psi.is_linear() && m.psi.params().k1 == 0.0 && m.noise.state_independent() &&
                        c.control->is_zero();
  if (gaussian) {
    ordered_json g = ordered_json::array();
    for (const auto& row : r.rows) {
      const double exact = gaussian_terminal_moment(m, c.steps, row.epsilon, c.mc.modes);
      g.push_back({{"epsilon", row.epsilon},
                   {"exact_terminal", exact},
                   {"z_score", row.terminal_stderr > 0 ? (row.terminal_mean - exact) / row.terminal_stderr : 0.0}});
    }
    out.summary["gaussian"] = g;
  }
}

void run_weak(const ExperimentConfig& c, RunOutput& out) {
  WeakTestOptions o;
  o.threads = c.threads;
  const DecayReport r =
      weak_convergence_test(*c.model, *c.x, c.steps, *c.control, c.weak.amplitude, c.weak.n_list, o);
  Csv csv({"n", "d_n"});
  for (std::size_t i = 0; i < r.ns.size(); ++i) csv.row(r.ns[i], r.distances[i]);
  out.artifacts.push_back({"decay.csv", csv.str()});
  out.summary = {{"strictly_decreasing", r.strictly_decreasing},
                 {"last_over_first", r.last_over_first},
                 {"fit", fit_json(r.fit)},
                 {"passed", r.passed()}};
}

void run_rate(const ExperimentConfig& c, RunOutput& out) {
  const Model& m = *c.model;
  const auto& g = m.generator();
  const auto& rp = c.rate;
  Field target = rp.target_from_free_flow
                     ? solve_skeleton(m, Control::zero(g.grid(), m.horizon(), 1), *c.x, c.steps).final_state()
                     : Field::zeros(g.grid());
  if (!rp.displacement.is_null()) target += build_field(rp.displacement, g, "experiment.target.displacement");
  const RateProblem p{m, *c.x, c.steps, target, rp.terminal_tol, rp.modes, rp.cells};
  const ActionResult a = minimize_action(p, rp.minimize);

  ordered_json cj;
  cj["modes"] = rp.modes;
  cj["cells"] = ordered_json::array();
  const Eigen::VectorXd w = coordinates_from_control(p, a.control);
  const auto times = a.control.time_grid();
  for (std::size_t k = 0; k < rp.cells; ++k) {
    const Eigen::VectorXd coeffs = g.coefficients(a.control.cell(k)).head(static_cast<Eigen::Index>(rp.modes));
    cj["cells"].push_back({{"t0", times[k]},
                           {"t1", times[k + 1]},
                           {"coefficients", std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size())}});
  }
  cj["rate"] = a.rate;
  cj["endpoint_gap"] = a.endpoint_gap;
  out.artifacts.push_back({"control.json", dump(cj)});
  out.summary = {{"rate", a.rate},
                 {"endpoint_gap", a.endpoint_gap},
                 {"reached", a.reached},
                 {"degraded", a.degraded},
                 {"iterations", a.iterations},
                 {"objective_per_level", a.objective_per_level}};
  if (rp.oracle && m.psi.is_linear() && m.noise.state_independent()) {
    const OracleResult o = linear_oracle(p);
    out.summary["oracle"] = {{"rate", o.rate},
                             {"endpoint_gap", o.endpoint_gap},
                             {"rank", o.rank},
                             {"relative_difference", o.rate > 0 ? (a.rate - o.rate) / o.rate : a.rate}};
  }
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& c) {
  RunOutput out;
  switch (c.kind) {
    case ExperimentKind::Validate: run_validate(c, out); break;
    case ExperimentKind::Skeleton: run_skeleton(c, out); break;
    case ExperimentKind::ConvergeLambda:
      rate_outputs(lambda_rate_study(*c.model, *c.control, *c.x, c.steps, c.lambda.nu, c.lambda.lambdas),
                   "lambda", "lambda_next", out);
      break;
    case ExperimentKind::ConvergeNu:
      rate_outputs(nu_rate_study(*c.model, *c.control, *c.x, c.steps, c.nu.nus), "nu", "nu_next", out);
      break;
    case ExperimentKind::McA: run_mc(c, out); break;
    case ExperimentKind::WeakB: run_weak(c, out); break;
    case ExperimentKind::Rate: run_rate(c, out); break;
  }
  out.artifacts.push_back({"summary.json", dump(out.summary)});

  ordered_json manifest;
  manifest["tool"] = "spme";
  manifest["version"] = spme::version;
  manifest["experiment"] = std::string(to_string(c.kind));
  manifest["seed"] = c.seed;
  manifest["config"] = c.echo;
  manifest["outputs"] = ordered_json::array();
  for (const auto& a : out.artifacts) manifest["outputs"].push_back(a.name);
  out.artifacts.push_back({"manifest.json", dump(manifest)});
  return out;
}

void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    for (const auto& [tmp, final] : staged) fs::remove(tmp, ec);
  };
  for (const auto& a : artifacts) {
    const fs::path final = fs::path(dir) / a.name;
    const fs::path tmp = fs::path(dir) / (a.name + ".partial");
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (f) f.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
    if (f) f.close();
    staged.emplace_back(tmp, final);
    if (!f) {
      cleanup();
      throw IoError("cannot write '" + tmp.string() + "'");
    }
  }
  for (const auto& [tmp, final] : staged) {
    fs::rename(tmp, final, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
    }
  }
}

}  // namespace spme::app
