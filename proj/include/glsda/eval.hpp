#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glsda/csi_data.hpp"
#include "glsda/model.hpp"
#include "glsda/train.hpp"

namespace glsda {

// Max-subtraction stabilized softmax; entries positive, sum 1.
std::vector<double> softmax(std::span<const double> logits);

struct Prediction {
  std::size_t cls{0};
  std::vector<double> dist;
};

// Averages the per-antenna probability distributions, then argmax.
// Ties break toward the lowest class id.
Prediction predict_fused(const ModelState& state,
                         std::span<const Matrix> antenna_features);

// Single holistic sample (DFS path).
Prediction predict_one(const ModelState& state, const Matrix& feature);

struct EvalReport {
  std::string scenario;
  double accuracy{0.0};
  std::size_t n{0};
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> confusion{};  // [true][pred]
  std::array<double, kNumClasses> per_class_accuracy{};

  void validate() const;
};

// One prediction per trace id: fused across antenna samples for CSI-Ratio,
// direct for DFS.
EvalReport evaluate(const ModelState& state, const FeatureSet& features,
                    std::span<const std::size_t> trace_ids,
                    const std::string& scenario_tag);

std::string report_to_json(const EvalReport& report, const std::string& config_hash);
std::string confusion_to_csv(const EvalReport& report);

}  // namespace glsda
