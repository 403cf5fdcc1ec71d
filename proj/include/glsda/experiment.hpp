#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glsda/config.hpp"
#include "glsda/eval.hpp"

namespace glsda {

struct ScenarioResult {
  DatasetSplit::Scenario scenario{DatasetSplit::Scenario::InDomain};
  EvalReport method;
  std::optional<EvalReport> baseline;  // present on ablation runs
};

struct ExperimentOptions {
  std::vector<DatasetSplit::Scenario> scenarios;
  bool ablation{false};
  // When set, reports, confusion CSVs, loss logs, checkpoints and the
  // ablation delta table are written under this directory.
  std::optional<std::filesystem::path> out_dir;
};

// Full pipeline per scenario: synthesize, preprocess, split, train,
// evaluate. With ablation, a second run with the distillation terms
// disabled is trained on the same seed and the paired delta table is
// emitted.
std::vector<ScenarioResult> run_experiment(const RunConfig& config,
                                           const ExperimentOptions& options);

// CSV with columns stage,ID,CL,CO,Mean: rows baseline, method, delta.
// Scenarios missing from `results` are left empty.
std::string ablation_delta_csv(const std::vector<ScenarioResult>& results);

}  // namespace glsda
