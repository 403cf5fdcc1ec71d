#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glsda/csi_data.hpp"
#include "glsda/model.hpp"
#include "glsda/signal.hpp"
#include "glsda/teacher.hpp"

namespace glsda {

enum class Optimizer { Adam, SgdMomentum };
enum class Modality { CsiRatio, Dfs };

const char* modality_name(Modality m);
Modality modality_from_name(const std::string& name);
const char* optimizer_name(Optimizer o);
Optimizer optimizer_from_name(const std::string& name);

struct TrainConfig {
  int epochs{100};
  int batch_size{16};
  Optimizer optimizer{Optimizer::Adam};
  double lr0{4e-5};
  double momentum{0.9};
  double beta1{0.9};
  double beta2{0.999};
  double adam_eps{1e-8};
  double tau_lsdm{0.5};
  double tau_cls{2.0};
  double lambda1{1.0};
  double lambda2{1.0};
  double lambda3{1.0};
  double lambda_ce{1.0};
  double gamma{5.0};  // teacher logit scale
  std::uint64_t seed{0};
  Modality modality{Modality::CsiRatio};
  // When false, the distillation terms (lsdm, feat, temp, cls) are dropped
  // and only the supervised cross-entropy trains the student.
  bool distill{true};
  std::size_t embed_dim{64};  // d, must match the teacher bank

  void validate() const;
};

double cosine_lr(double lr0, int epoch, int total_epochs);

// Per-parameter-tensor moment buffers.
struct OptimizerState {
  std::vector<std::vector<double>> velocity;  // sgd momentum
  std::vector<std::vector<double>> m1, m2;    // adam moments
  long step{0};

  static OptimizerState like(std::span<std::span<double>> params);
};

void sgd_momentum_step(OptimizerState& state, std::span<std::span<double>> params,
                       std::span<std::span<double>> grads, double lr,
                       double momentum);

void adam_step(OptimizerState& state, std::span<std::span<double>> params,
               std::span<std::span<double>> grads, double lr, double beta1,
               double beta2, double eps);

// --- preprocessed dataset ----------------------------------------------------

// Per-trace feature matrices in double precision, ready for the encoder:
// one [L x S] matrix per non-reference antenna for CSI-Ratio, one [F x B]
// matrix for DFS.
struct FeatureSet {
  Modality modality{Modality::CsiRatio};
  std::vector<std::vector<Matrix>> per_trace;
  std::vector<std::uint16_t> labels;

  std::size_t num_traces() const { return per_trace.size(); }
  std::size_t channels() const;
};

FeatureSet preprocess_dataset(const std::vector<CsiTrace>& traces, Modality modality,
                              const RatioParams& ratio_params,
                              const DfsParams& dfs_params);

// One training sample per (trace, antenna) pair for CSI-Ratio; one per
// trace for DFS.
struct TrainSample {
  std::size_t trace_id{0};
  std::size_t slot{0};
  std::uint16_t label{0};
};

std::vector<TrainSample> expand_antenna_samples(const FeatureSet& features,
                                                std::span<const std::size_t> trace_ids);

// --- training loop -----------------------------------------------------------

struct TrainResult {
  ModelState model;
  // CSV: per step "epoch,step,lsdm,feat,temp,cls,ce,total", per epoch
  // "epoch,val_accuracy".
  std::string loss_log;
  std::vector<double> val_accuracy;
};

TrainResult train(const TrainConfig& config, const FeatureSet& features,
                  const DatasetSplit& split, const TeacherBank& bank);

}  // namespace glsda
