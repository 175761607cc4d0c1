#pragma once

#include "spme/errors.hpp"
#include "spme/ldp.hpp"
#include "spme/skeleton.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spme::app {

// Schema violation; `field()` is the dotted path of the offending key.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& what)
      : ValidationError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Config file cannot be opened.
class MissingFile : public Error {
 public:
  using Error::Error;
};

enum class ExperimentKind { Validate, Skeleton, ConvergeLambda, ConvergeNu, McA, WeakB, Rate };

std::string_view to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_string(std::string_view name);

struct ValidateParams {
  std::size_t samples = 10000;
  std::vector<double> times{0.01, 0.1, 1.0};
  std::vector<double> alphas{0.25, 0.5, 1.0};
  std::size_t pairing_pairs = 1000;
};

struct SkeletonParams {
  Regularization reg;
};

struct LambdaParams {
  double nu = 0.5;
  std::vector<double> lambdas;
};

struct NuParams {
  std::vector<double> nus;
};

struct McParams {
  std::vector<double> eps;
  std::size_t samples = 200;
  std::size_t modes = 0;
};

struct WeakParams {
  double amplitude = 1.0;
  std::vector<int> n_list{1, 2, 4, 8, 16};
};

struct RateParams {
  std::size_t modes = 3;
  std::size_t cells = 8;
  double terminal_tol = 1e-3;
  bool target_from_free_flow = true;
  nlohmann::json displacement;  // field description, resolved against the grid
  MinimizeOptions minimize;
  bool oracle = true;
};

// Fully validated configuration. The model objects are built eagerly so that
// every domain error surfaces before any solver runs.
struct ExperimentConfig {
  nlohmann::ordered_json echo;  // normalized copy written to the manifest
  ExperimentKind kind = ExperimentKind::Validate;
  std::uint64_t seed = 0;
  std::string output_dir;
  unsigned threads = 1;

  std::optional<Model> model;
  std::optional<SpectralGenerator> base_generator;  // before the fractional power
  double alpha = 1.0;
  std::size_t steps = 0;
  std::optional<Field> x;
  std::optional<Control> control;

  ValidateParams validate;
  SkeletonParams skeleton;
  LambdaParams lambda;
  NuParams nu;
  McParams mc;
  WeakParams weak;
  RateParams rate;
};

// Parses and validates. Throws ConfigError for schema problems.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Builds a field from a description such as {"type": "sine", "k": 1}.
Field build_field(const nlohmann::json& desc, const SpectralGenerator& g, const std::string& where);

}  // namespace spme::app
