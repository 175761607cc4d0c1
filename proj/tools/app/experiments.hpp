#pragma once

#include "config.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace spme::app {

struct Artifact {
  std::string name;
  std::string content;
};

struct RunOutput {
  std::vector<Artifact> artifacts;  // manifest.json last
  nlohmann::ordered_json summary;
};

// Runs the configured experiment in memory. Outputs depend only on the
// config and seed (never on `threads`).
RunOutput run_experiment(const ExperimentConfig& cfg);

// Output directory problems.
class IoError : public Error {
 public:
  using Error::Error;
};

// Writes every artifact to a temporary name first and renames once all of
// them are on disk.
void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts);

// %.17g, enough to round-trip a double.
std::string format_double(double v);

}  // namespace spme::app
