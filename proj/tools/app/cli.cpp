#include "cli.hpp"

#include "config.hpp"
#include "experiments.hpp"
#include "spme/errors.hpp"
#include "spme/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace spme::app {

namespace {

int report(std::ostream& err, int code, const char* kind, const std::string& message,
           const std::string& field = {}) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  if (!field.empty()) j["field"] = field;
  j["message"] = message;
  err << j.dump() << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral solvers for small-noise stochastic porous media equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spme::version));

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  for (auto kind : {ExperimentKind::Validate, ExperimentKind::Skeleton, ExperimentKind::ConvergeLambda,
                    ExperimentKind::ConvergeNu, ExperimentKind::McA, ExperimentKind::WeakB,
                    ExperimentKind::Rate}) {
    auto* sub = app.add_subcommand(std::string(to_string(kind)));
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads for sample fan-out")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << spme::version << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report(err, kValidation, "usage", e.what());
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (to_string(cfg.kind) != subcommand)
      throw ConfigError("experiment.type", "config declares '" + std::string(to_string(cfg.kind)) +
                                               "' but the subcommand is '" + subcommand + "'");
    if (seed) {
      cfg.seed = *seed;
      cfg.echo["seed"] = *seed;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (cfg.output_dir.empty()) throw ConfigError("output_dir", "no output directory (set output_dir or --out)");
    cfg.echo.erase("output_dir");
    cfg.threads = threads;

    const RunOutput res = run_experiment(cfg);
    write_artifacts(cfg.output_dir, res.artifacts);
    out << res.summary.dump() << '\n';
    return kOk;
  } catch (const MissingFile& e) {
    return report(err, kMissingFile, "missing_file", e.what());
  } catch (const ConfigError& e) {
    return report(err, kValidation, "validation", e.what(), e.field());
  } catch (const IoError& e) {
    return report(err, kOutput, "output", e.what());
  } catch (const SolverError& e) {
    return report(err, kSolver, "solver", e.what(), "step " + std::to_string(e.step()));
  } catch (const IntegrationError& e) {
    return report(err, kSolver, "solver", e.what());
  } catch (const Error& e) {
    // Domain, dimension and resolution errors all stem from the inputs.
    return report(err, kValidation, "validation", e.what());
  } catch (const std::exception& e) {
    return report(err, kInternal, "internal", e.what());
  }
}

}  // namespace spme::app
