#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "jamloc/models.hpp"
#include "jamloc/optim.hpp"
#include "jamloc/schedule.hpp"

namespace jamloc {

enum class Phase { pretrain, align, finetune };
std::string to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct EarlyStop {
  std::string metric = "auc_gap";  // |AUC - 0.5| on the fixed evaluation slice
  int patience = 5;
  double min_delta = 0.005;
  // Epochs before this one never count as stagnation.
  int start_epoch = 0;
};

struct LossWeights {
  ScheduleSpec alpha = ScheduleSpec::constant(1.0, 1);
  double beta = 1.0;
  ScheduleSpec lambda = ScheduleSpec::constant(0.0, 1);
};

struct PhaseConfig {
  int epochs = 1;
  int batch_size = 256;
  double base_lr = 1e-3;
  ScheduleSpec lr_schedule;
  // Regression head learning rate during fine-tuning (cosine annealed like base_lr).
  double head_lr = 1e-2;
  LossWeights weights;
  std::optional<EarlyStop> early_stop;
  std::vector<std::string> unfreeze;  // parameter-name prefixes trainable in fine-tuning
  int eval_slice = 512;               // per-domain size of the AUC evaluation slice
  bool init_head_bias_to_mean = true;
  // Where to write the state when a loss turns non-finite (empty: no dump).
  std::filesystem::path dump_dir;

  void validate() const;

  // 30 epochs, lr 1e-3 with 10% linear warmup then cosine.
  static PhaseConfig pretrain_defaults();
  // 40 epochs, lambda sigmoid 0.05 -> 0.2, early stop on |AUC - 0.5|.
  static PhaseConfig align_defaults();
  // 200 epochs, alpha 0.5 -> 0.1, lambda_ft 0 -> 0.5, beta 1; last encoder
  // stage, decoder, head and domain classifier trainable.
  static PhaseConfig finetune_defaults();
};

struct EpochRecord {
  Phase phase = Phase::pretrain;
  int epoch = 0;  // 1-based within the phase
  double l_rec = 0.0;
  double l_dom = 0.0;
  double l_reg = 0.0;
  double auc = -1.0;  // domain AUC on the evaluation slice (align)
  double lambda = 0.0;
  double alpha = 0.0;
  double lambda_ft = 0.0;
  std::vector<double> lrs;
  double holdout_mean_error = -1.0;  // finetune
};

// Everything needed to continue training bit-for-bit.
template <typename T>
struct TrainingState {
  explicit TrainingState(const AutoencoderSpec& spec, std::uint64_t seed)
      : model(spec, seed), seed(seed), data_rng(seed + 1) {}

  nn::Localizer<T> model;
  Phase phase = Phase::pretrain;
  int epoch = 0;  // epochs completed in the current phase
  std::vector<Phase> completed;
  std::uint64_t seed;
  std::mt19937_64 data_rng;
  long optimizer_steps = 0;
  std::vector<typename nn::Adam<T>::Moments> optimizer_moments;
  std::vector<EpochRecord> history;

  // Early-stopping / model-selection bookkeeping for the current phase.
  double best_metric = 0.0;
  int best_epoch = 0;
  int stale_epochs = 0;
  bool stopped_early = false;
  std::vector<std::vector<T>> best_params;

  bool has_completed(Phase p) const;
};

// Scaled CIR batch [N, 3, 100] plus optional coordinates [N, 2] in cm.
template <typename T>
struct LabeledData {
  Tensor<T> x;
  Tensor<T> y;
  std::size_t size() const { return x.empty() ? 0 : static_cast<std::size_t>(x.dim(0)); }
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Each phase function continues from state.epoch up to `until_epoch`
// (default: cfg.epochs), so a run may be checkpointed and resumed.
template <typename T>
void pretrain(TrainingState<T>& state, const Tensor<T>& source, const PhaseConfig& cfg,
              int until_epoch = -1, const EpochCallback& on_epoch = {});

template <typename T>
void align(TrainingState<T>& state, const Tensor<T>& source, const Tensor<T>& target,
           const PhaseConfig& cfg, int until_epoch = -1, const EpochCallback& on_epoch = {});

template <typename T>
void finetune(TrainingState<T>& state, const LabeledData<T>& labeled,
              const LabeledData<T>& holdout, const PhaseConfig& cfg, int until_epoch = -1,
              const EpochCallback& on_epoch = {});

// Domain-classifier AUC (source = 0, target = 1) in eval mode.
template <typename T>
double domain_auc(nn::Localizer<T>& model, const Tensor<T>& source, const Tensor<T>& target);

// Eval-mode batched helpers.
template <typename T>
Tensor<T> predict_batched(nn::Localizer<T>& model, const Tensor<T>& x, int batch = 512);
template <typename T>
Tensor<T> embed_batched(nn::Localizer<T>& model, const Tensor<T>& x, int batch = 512);
template <typename T>
double reconstruction_loss(nn::Localizer<T>& model, const Tensor<T>& x, int batch = 512);

// Rows [begin, end) of a tensor along the first axis, or a gather.
template <typename T>
Tensor<T> take_rows(const Tensor<T>& x, const std::vector<std::size_t>& rows);
template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end);

// Freezes every parameter whose name does not start with one of `prefixes`.
template <typename T>
void apply_unfreeze(nn::Localizer<T>& model, const std::vector<std::string>& prefixes);
template <typename T>
void unfreeze_all(nn::Localizer<T>& model);

// Sets the head's fixed output scale to the per-axis label spread and, when
// asked, its bias so the initial prediction is the label mean.
template <typename T>
void init_head(nn::RegressionHead<T>& head, const Tensor<T>& y, bool bias_to_mean);

struct StepLosses {
  double l_rec = 0.0;
  double l_dom = 0.0;
  double l_reg = 0.0;
};

// One alignment step's gradients, accumulated into the parameters. x holds
// n_source source rows followed by target rows; L_rec uses the target rows
// only. Training mode (noise on).
template <typename T>
StepLosses adapt_gradients(nn::Localizer<T>& model, const Tensor<T>& x, std::size_t n_source,
                           T lambda);

// One fine-tuning step's gradients: alpha * L_rec + beta * L_reg plus the
// label-0 domain loss through GRL(lambda_ft).
template <typename T>
StepLosses finetune_gradients(nn::Localizer<T>& model, const Tensor<T>& x, const Tensor<T>& y,
                              double alpha, double beta, T lambda_ft);

}  // namespace jamloc
