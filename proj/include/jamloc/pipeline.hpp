#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "jamloc/analysis.hpp"
#include "jamloc/baselines.hpp"
#include "jamloc/dataset.hpp"
#include "jamloc/preprocess.hpp"
#include "jamloc/training.hpp"

namespace jamloc {

struct CoralConfig {
  double shrinkage = 1e-3;
  double ridge = 1e-3;  // fresh head: ridge least squares on aligned source embeddings
};

struct MmdConfig {
  int epochs = 20;
  int batch_size = 256;  // per domain
  double lr = 1e-3;
  double head_lr = 1e-2;
  double weight = 1.0;
  std::vector<std::string> unfreeze{"encoder.stage3", "head"};
};

struct ProbeConfig {
  int zones = 5;
  int folds = 5;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  AutoencoderSpec spec;
  PhaseConfig pretrain = PhaseConfig::pretrain_defaults();
  PhaseConfig align = PhaseConfig::align_defaults();
  PhaseConfig finetune = PhaseConfig::finetune_defaults();
  SplitRatios ratios;
  std::size_t holdout_size = 3000;
  CirScaling cir_scaling = CirScaling::per_tap;
  TabularConfig tabular;
  CoralConfig coral;
  MmdConfig mmd;
  ProbeConfig probe;
  int mi_bins = 16;
};

// Settings for the built-in synthetic domain-shift benchmark: small batches,
// shortened phases and per-channel CIR scaling so three seeds fit a 30 minute
// budget on one CPU core. The hold-out takes a quarter of the target set.
PipelineConfig benchmark_config(std::uint64_t seed, std::size_t target_size);

// Scaled model inputs for one source/target pair.
struct PreparedData {
  ScalerParams cir_scaler;
  Splits source_splits;
  std::vector<std::size_t> target_labeled_rows, target_holdout_rows;
  LabeledData<float> source_train, source_val, source_test;
  LabeledData<float> target_labeled, target_holdout;
};

PreparedData prepare_data(const SampleSet& source, const SampleSet& target,
                          const PipelineConfig& cfg);
// Rows of `set` as a scaled model batch with coordinates.
LabeledData<float> labeled_batch(const SampleSet& set, const std::vector<std::size_t>& rows,
                                 const ScalerParams& scaler);

MetricsReport evaluate(nn::Localizer<float>& model, const LabeledData<float>& data);

struct VariantResult {
  std::string name;
  MetricsReport target;                 // target hold-out
  std::optional<MetricsReport> source;  // source test split (source-only model)
  double domain_auc = -1;               // after alignment
  int align_epochs = 0;
  double minutes = 0;
};
nlohmann::json to_json(const VariantResult& r);

TrainingState<float> run_pretrain(const PreparedData& data, const PipelineConfig& cfg,
                                  const EpochCallback& on_epoch = {});
// Pretrained model fine-tuned on labeled source data (lambda_ft = 0).
VariantResult run_source_only(TrainingState<float> state, const PreparedData& data,
                              const PipelineConfig& cfg, const EpochCallback& on_epoch = {});
// align -> finetune. adversarial = false zeroes lambda and lambda_ft and
// disables early stopping; align_epochs > 0 overrides the alignment length.
VariantResult run_transfer(TrainingState<float> state, const PreparedData& data,
                           const PipelineConfig& cfg, bool adversarial, int align_epochs = 0,
                           TrainingState<float>* final_state = nullptr,
                           const EpochCallback& on_epoch = {});
VariantResult run_coral(TrainingState<float> state, const PreparedData& data,
                        const PipelineConfig& cfg);
VariantResult run_mmd(TrainingState<float> state, const PreparedData& data,
                      const PipelineConfig& cfg);

// Source-only / A-CNT / CNT (plus CORAL and MMD when requested) on one
// source/target pair, sharing a single pretraining run.
nlohmann::json run_comparison(const SampleSet& source, const SampleSet& target,
                              const PipelineConfig& cfg, bool with_uda_baselines,
                              const EpochCallback& on_epoch = {});

}  // namespace jamloc
