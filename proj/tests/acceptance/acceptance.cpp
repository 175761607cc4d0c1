// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (capped at 255).

#include "cli.hpp"
#include "config.hpp"

#include "spme/diffusion.hpp"
#include "spme/generator.hpp"
#include "spme/ldp.hpp"
#include "spme/nonlinearity.hpp"
#include "spme/skeleton.hpp"
#include "spme/spde.hpp"
#include "spme/triple.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spme;

namespace {

constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

app::ExperimentConfig config(const std::string& name) {
  return app::load_config((fs::path(SPME_CONFIG_DIR) / (name + ".json")).string());
}

SpectralGenerator laplacian(std::size_t n) {
  return SpectralGenerator::periodic_laplacian(MeasureGrid::periodic1d(n, 2.0 * std::numbers::pi));
}

Field seeded_field(const SpectralGenerator& g, std::uint64_t stream) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal_variate(kSeed, stream, 0, static_cast<std::uint64_t>(k));
  return Field(g.grid(), v);
}

Field trig(const GridPtr& grid, double k, double amp, bool cosine = false) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = k * (*grid->labels())(i);
    v(i) = amp * (cosine ? std::cos(a) : std::sin(a));
  }
  return Field(grid, v);
}

std::vector<Nonlinearity> builtins() {
  return {Nonlinearity::linear(1.0), Nonlinearity::atan_saturated(1.0),
          Nonlinearity::linear_plus_atan(1.0, 1.0), Nonlinearity::slope_clamped_power(2.0, 4.0)};
}

Outcome operator_calculus() {
  const SpectralGenerator base = laplacian(64);
  double worst = 0.0;
  for (const SpectralGenerator& g : {base, fractional(base, 0.5)}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Field u = seeded_field(g, s);
      for (double r : {1.0, 2.0, 3.0}) {
        const Field q = gamma_transform(g, r, u);
        const Field e = g.multiply(u, [r](double l) { return std::pow(1.0 - l, -r / 2.0); });
        worst = std::max(worst, norm_l2(q - e) / norm_l2(e));
      }
    }
  }
  return {worst <= 1e-6, fmt("max relative error %.3e (tol 1e-6)", worst)};
}

Outcome submarkov() {
  const SpectralGenerator base = laplacian(64);
  double worst = 0.0;
  bool ok = true;
  for (double alpha : {0.25, 0.5, 1.0}) {
    const SubMarkovReport r = validate_submarkov(fractional(base, alpha), {0.01, 0.1, 1.0});
    ok = ok && r.all_pass();
    worst = std::max(worst, r.worst_violation());
  }
  return {ok && worst <= 1e-10, fmt("worst violation %.3e (tol 1e-10)", worst)};
}

Outcome isometry() {
  const TripleContext ctx(laplacian(64));
  const SpectralGenerator& g = ctx.generator();
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Field u = seeded_field(g, 2 * i + 10), v = seeded_field(g, 2 * i + 11);
    const PairingResult r = pairing_check(ctx, u, v);
    worst = std::max(worst, std::abs(r.dual_pairing - r.l2_inner) / (norm_l2(u) * norm_l2(v)));
  }
  return {worst <= 1e-10, fmt("worst relative disagreement %.3e over 1000 pairs (tol 1e-10)", worst)};
}

Outcome hypotheses() {
  double worst = 0.0;
  bool ok = true;
  for (const auto& psi : builtins()) {
    const H1Report h1 = validate_h1(psi, 10000, kSeed);
    const MonotoneInequalityReport mono = check_monotone_inequality(psi, 10000, kSeed);
    ok = ok && h1.passed && mono.passed && h1.psi_zero_ok;
    worst = std::min({worst, h1.worst_monotone_margin, h1.worst_lipschitz_margin, mono.worst_margin});
    if (h1.worst_coercivity_margin) worst = std::min(worst, *h1.worst_coercivity_margin);
  }
  const TripleContext ctx(laplacian(64));
  const std::vector<NoiseParams> families{{.c0 = 1.0, .c1 = 0.5, .c2 = 0.5, .gamma = 0.5, .beta = 1.0},
                                          {.c0 = 1.0, .c1 = 0.0, .c2 = 0.0, .gamma = 1.0, .beta = 1.0},
                                          {.c0 = 0.5, .c1 = 2.0, .c2 = 1.0, .gamma = 0.25, .beta = 0.5}};
  for (const auto& np : families) {
    const HypothesisReport r = validate_hypotheses(NoiseCoefficient(ctx, np, 1.0), 10000, kSeed);
    ok = ok && r.all_pass();
    worst = std::min({worst, r.lipschitz_margin, r.growth_margin, r.holder_margin});
  }
  ok = ok && worst >= -1e-12;
  return {ok, fmt("4 Psi x H1/monotone, 3 B x H2/H3, worst margin %.3e (tol -1e-12)", worst)};
}

Outcome dissipation() {
  const SpectralGenerator g = laplacian(64);
  const Field x = trig(g.grid(), 1.0, 3.0) + trig(g.grid(), 3.0, 0.5, true) + 0.5 * seeded_field(g, 99);
  const Control h0 = Control::zero(g.grid(), 1.0, 1);
  double worst_l2 = 0.0, worst_nu = 0.0;
  const double nu = 0.3;
  for (const auto& psi : builtins()) {
    const Model m{psi, NoiseCoefficient(TripleContext(g), {}, 1.0)};
    const PathSolution p = solve_skeleton(m, h0, x, 512);
    for (std::size_t i = 1; i < p.l2_norm.size(); ++i) worst_l2 = std::max(worst_l2, p.l2_norm[i] - p.l2_norm[i - 1]);
    const PathSolution q = solve_regularized(m, h0, x, 512, {nu, 0.0});
    double prev = norm_fstar(m.context(), q.states[0], nu);
    for (std::size_t i = 1; i < q.states.size(); ++i) {
      const double cur = norm_fstar(m.context(), q.states[i], nu);
      worst_nu = std::max(worst_nu, cur - prev);
      prev = cur;
    }
  }
  return {worst_l2 <= 1e-10 && worst_nu <= 1e-10,
          fmt("largest step increase |Y|_2 %.3e, ||Y||_F*,nu %.3e (tol 1e-10)", worst_l2, worst_nu)};
}

Outcome lambda_rate() {
  const auto c = config("converge-lambda");
  const Control h = Control::zero(c.x->grid(), c.model->horizon(), 1);
  const RateReport r = lambda_rate_study(*c.model, h, *c.x, c.steps, c.lambda.nu, c.lambda.lambdas);
  // Informational: coercive linear Psi on a smooth datum.
  const SpectralGenerator g = laplacian(64);
  const Model coercive{Nonlinearity::linear(1.0), NoiseCoefficient(TripleContext(g), {}, 1.0)};
  const RateReport rc = lambda_rate_study(coercive, Control::zero(g.grid(), 1.0, 1), trig(g.grid(), 1.0, 1.0), 256,
                                          c.lambda.nu, c.lambda.lambdas);
  const bool ok = r.fit.slope >= 0.7 && r.fit.slope <= 1.3;
  return {ok, fmt("slope %.4f in [0.7, 1.3], fit rms %.3f, monotone %d; coercive k1=1 reference slope %.3f",
                  r.fit.slope, r.fit.rms_residual, static_cast<int>(r.monotone), rc.fit.slope)};
}

Outcome nu_rate() {
  const auto c = config("converge-nu");
  const RateReport r = nu_rate_study(*c.model, *c.control, *c.x, c.steps, c.nu.nus);
  const bool ok = r.fit.slope >= 0.7 && r.fit.slope <= 1.3;
  return {ok, fmt("slope %.4f in [0.7, 1.3], fit rms %.3f, monotone %d", r.fit.slope, r.fit.rms_residual,
                  static_cast<int>(r.monotone))};
}

Outcome condition_a() {
  const auto c = config("mc-a");
  McOptions opts;
  opts.modes = c.mc.modes;
  opts.threads = 4;
  const Control h = c.control ? *c.control : Control::zero(c.x->grid(), c.model->horizon(), 1);
  const McReport r = mc_condition_a(*c.model, h, *c.x, c.steps, c.mc.eps, c.mc.samples, c.seed, opts);
  const bool slope_ok = r.fit.slope >= 0.7 && r.fit.slope <= 1.3;

  // Psi = 0, constant B: exact Gaussian second moment at T.
  const SpectralGenerator g = laplacian(32);
  const Model lin{Nonlinearity::linear(0.0),
                  NoiseCoefficient(TripleContext(g), {.c0 = 1.0, .c1 = 0.0, .c2 = 0.0, .gamma = 1.0, .beta = 1.0}, 1.0)};
  const double eps = 0.1;
  const McReport gr = mc_condition_a(lin, Control::zero(g.grid(), 1.0, 1), trig(g.grid(), 1.0, 1.0), 256, {eps},
                                     200, c.seed, opts);
  const double exact = gaussian_terminal_moment(lin, 256, eps);
  const double z = std::abs(gr.rows[0].terminal_mean - exact) / gr.rows[0].terminal_stderr;
  return {slope_ok && z <= 3.0,
          fmt("slope %.4f in [0.7, 1.3], monotone %d; Gaussian moment %.4f vs exact %.4f (%.2f SE, tol 3)",
              r.fit.slope, static_cast<int>(r.monotone), gr.rows[0].terminal_mean, exact, z)};
}

Outcome condition_b() {
  const auto c = config("weak-b");
  const Control h = c.control ? *c.control : Control::zero(c.x->grid(), c.model->horizon(), 1);
  std::string detail;
  bool ok = true;
  for (const auto& psi : {Nonlinearity::linear(1.0), c.model->psi}) {
    const Model m{psi, c.model->noise};
    const DecayReport r = weak_convergence_test(m, *c.x, c.steps, h, c.weak.amplitude, c.weak.n_list);
    ok = ok && r.passed();
    detail += fmt("%s: decreasing %d, d_16/d_1 %.4f (tol 0.2), slope %.3f; ", std::string(to_string(psi.kind())).c_str(),
                  static_cast<int>(r.strictly_decreasing), r.last_over_first, r.fit.slope);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome rate_oracle() {
  const auto c = config("rate");
  const Model& m = *c.model;
  const Field free_end = solve_skeleton(m, Control::zero(c.x->grid(), m.horizon(), 1), *c.x, c.steps).final_state();
  const Field shift = app::build_field(c.rate.displacement, m.generator(), "experiment.target.displacement");
  RateProblem p{.model = m,
                .x = *c.x,
                .steps = c.steps,
                .target = free_end + shift,
                .terminal_tol = c.rate.terminal_tol,
                .control_modes = c.rate.modes,
                .control_cells = c.rate.cells};
  const OracleResult o = linear_oracle(p);
  const ActionResult a = minimize_action(p, c.rate.minimize);
  const double rel = std::abs(a.rate - o.rate) / o.rate;
  p.target = free_end;
  const ActionResult z = minimize_action(p, c.rate.minimize);
  return {rel <= 0.01 && z.rate <= 1e-8,
          fmt("I* %.6f vs oracle %.6f, rel %.3e (tol 1e-2); zero-cost target I* %.3e (tol 1e-8)", a.rate, o.rate, rel,
              z.rate)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "spme_acceptance_determinism";
  fs::remove_all(root);
  int runs = 0, mismatched = 0;
  std::string notes;
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(SPME_CONFIG_DIR))
    if (e.path().extension() == ".json") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  for (const auto& cfg : configs) {
    const std::string name = cfg.stem().string();
    for (const char* threads : {"1", "4"}) {
      const std::string out = (root / name / threads).string();
      const std::vector<std::string> args{"spme", name, "--config", cfg.string(), "--out", out, "--threads", threads};
      std::vector<const char*> argv;
      for (const auto& s : args) argv.push_back(s.c_str());
      std::ostringstream so, se;
      if (app::run_cli(static_cast<int>(argv.size()), argv.data(), so, se) != 0) {
        ++mismatched;
        notes += " " + name + " failed";
      }
      ++runs;
    }
    for (const auto& f : fs::directory_iterator(root / name / "1")) {
      if (slurp(f.path()) != slurp(root / name / "4" / f.path().filename())) {
        ++mismatched;
        notes += " " + name + "/" + f.path().filename().string();
      }
    }
  }
  fs::remove_all(root);
  return {mismatched == 0 && !configs.empty(),
          fmt("%zu configs, %d runs (threads 1 vs 4), %d mismatches%s", configs.size(), runs, mismatched,
              notes.c_str())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "operator calculus exactness", 5.0, operator_calculus},
      {2, "sub-Markov validation", 5.0, submarkov},
      {3, "Gelfand isometry", 5.0, isometry},
      {4, "hypothesis validators", 10.0, hypotheses},
      {5, "dissipation invariants", 30.0, dissipation},
      {6, "lambda rate", 120.0, lambda_rate},
      {7, "nu rate", 120.0, nu_rate},
      {8, "condition (a) Monte Carlo", 600.0, condition_a},
      {9, "condition (b) weak convergence", 120.0, condition_b},
      {10, "rate functional oracle", 120.0, rate_oracle},
      {11, "determinism", 1800.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %2d %s: %s; runtime %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return std::min(failed, 255);
}
