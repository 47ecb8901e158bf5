#include <gtest/gtest.h>

#include <fstream>

#include "jamloc/checkpoint.hpp"
#include "jamloc/losses.hpp"
#include "jamloc/preprocess.hpp"
#include "jamloc/synth.hpp"
#include "jamloc/training.hpp"
#include "test_util.hpp"

using namespace jamloc;
using jamloc::testing::random_tensor;
using jamloc::testing::scratch_dir;
using jamloc::testing::tiny_spec;

namespace {

struct Toy {
  LabeledData<float> source, target;
};

// Scaled synthetic source/target batches from the benchmark layout.
const Toy& toy() {
  static const Toy t = [] {
    const auto preset = benchmark_preset(2);
    const auto src = synth_generate(preset.source, 1);
    const auto tgt = synth_generate(preset.target, 2);
    const auto fs = cir_feature_matrix(src), ft = cir_feature_matrix(tgt);
    const auto scaler = fit_cir_scaler(fs, ft, CirScaling::per_channel);
    Toy out;
    out.source.x = to_model_batch<float>(apply_scaler(scaler, fs));
    out.source.y = coordinate_matrix(src).cast<float>();
    out.target.x = to_model_batch<float>(apply_scaler(scaler, ft));
    out.target.y = coordinate_matrix(tgt).cast<float>();
    return out;
  }();
  return t;
}

PhaseConfig quick_pretrain(int epochs) {
  PhaseConfig c = PhaseConfig::pretrain_defaults();
  c.epochs = epochs;
  c.batch_size = 16;
  c.lr_schedule.total_epochs = epochs;
  return c;
}

PhaseConfig quick_align(int epochs) {
  PhaseConfig c = PhaseConfig::align_defaults();
  c.epochs = epochs;
  c.batch_size = 32;
  c.lr_schedule.total_epochs = epochs;
  c.weights.lambda.total_epochs = epochs;
  c.eval_slice = 64;
  return c;
}

PhaseConfig quick_finetune(int epochs) {
  PhaseConfig c = PhaseConfig::finetune_defaults();
  c.epochs = epochs;
  c.batch_size = 16;
  c.lr_schedule.total_epochs = epochs;
  c.weights.alpha.total_epochs = epochs;
  c.weights.lambda.total_epochs = epochs;
  return c;
}

TrainingState<float> pretrained(std::uint64_t seed, int epochs = 1) {
  TrainingState<float> st(tiny_spec(), seed);
  pretrain(st, toy().source.x, quick_pretrain(epochs));
  return st;
}

std::vector<std::vector<float>> params_of(nn::Localizer<float>& m) {
  std::vector<std::vector<float>> out;
  for (auto* p : m.parameters()) out.push_back(p->value);
  return out;
}

}  // namespace

TEST(Pretrain, ReducesReconstructionLoss) {
  TrainingState<float> st(tiny_spec(), 3);
  const auto x = slice_rows(toy().source.x, 0, 64);
  const double before = reconstruction_loss(st.model, x);
  pretrain(st, x, quick_pretrain(15));
  ASSERT_EQ(st.history.size(), 15u);
  EXPECT_LT(st.history.back().l_rec, st.history.front().l_rec);
  EXPECT_LT(reconstruction_loss(st.model, x), before);
  EXPECT_TRUE(st.has_completed(Phase::pretrain));
}

TEST(Pretrain, WarmupRaisesLearningRate) {
  TrainingState<float> st(tiny_spec(), 3);
  pretrain(st, slice_rows(toy().source.x, 0, 32), quick_pretrain(10));
  EXPECT_LT(st.history[0].lrs[0], st.history[1].lrs[0]);
  EXPECT_NEAR(st.history[1].lrs[0], 1e-3, 1e-12);
  EXPECT_LT(st.history[9].lrs[0], st.history[1].lrs[0]);
}

TEST(Pretrain, EmptyDataRejected) {
  TrainingState<float> st(tiny_spec(), 3);
  EXPECT_THROW(pretrain(st, Tensor<float>({0, 3, 100}), quick_pretrain(1)), std::invalid_argument);
}

TEST(Pretrain, NonFiniteLossDumpsState) {
  TrainingState<float> st(tiny_spec(), 3);
  auto x = slice_rows(toy().source.x, 0, 16);
  x[5] = std::numeric_limits<float>::quiet_NaN();
  auto cfg = quick_pretrain(1);
  cfg.dump_dir = scratch_dir("dump");
  EXPECT_THROW(pretrain(st, x, cfg), TrainingError);
  EXPECT_TRUE(std::filesystem::exists(cfg.dump_dir / "checkpoint.json"));
}

TEST(Pretrain, SameSeedIsBitIdentical) {
  auto a = pretrained(9, 2), b = pretrained(9, 2);
  EXPECT_EQ(params_of(a.model), params_of(b.model));
  EXPECT_EQ(a.history[1].l_rec, b.history[1].l_rec);
}

TEST(Resume, PretrainMatchesUninterrupted) {
  const auto x = slice_rows(toy().source.x, 0, 48);
  TrainingState<float> full(tiny_spec(), 4);
  pretrain(full, x, quick_pretrain(4));

  TrainingState<float> part(tiny_spec(), 4);
  pretrain(part, x, quick_pretrain(4), 2);
  const auto dir = scratch_dir("resume_pretrain");
  save_checkpoint(part, dir);
  auto resumed = load_checkpoint<float>(dir);
  pretrain(resumed, x, quick_pretrain(4));

  ASSERT_EQ(resumed.history.size(), full.history.size());
  for (std::size_t i = 0; i < full.history.size(); ++i)
    EXPECT_NEAR(resumed.history[i].l_rec, full.history[i].l_rec, 1e-6);
  EXPECT_EQ(params_of(resumed.model), params_of(full.model));
}

TEST(Resume, AlignAndFinetuneMatchUninterrupted) {
  const auto& d = toy();
  auto run = [&](bool interrupt) {
    auto st = pretrained(5);
    const auto acfg = quick_align(3);
    if (interrupt) {
      align(st, d.source.x, d.target.x, acfg, 1);
      const auto dir = scratch_dir("resume_align");
      save_checkpoint(st, dir);
      st = load_checkpoint<float>(dir);
    }
    align(st, d.source.x, d.target.x, acfg);
    const auto fcfg = quick_finetune(3);
    if (interrupt) {
      finetune(st, d.target, {}, fcfg, 2);
      const auto dir = scratch_dir("resume_finetune");
      save_checkpoint(st, dir);
      st = load_checkpoint<float>(dir);
    }
    finetune(st, d.target, {}, fcfg);
    return st;
  };
  auto a = run(false), b = run(true);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_NEAR(a.history[i].l_rec, b.history[i].l_rec, 1e-6) << i;
    EXPECT_NEAR(a.history[i].l_dom, b.history[i].l_dom, 1e-6) << i;
    EXPECT_NEAR(a.history[i].l_reg, b.history[i].l_reg, 1e-6) << i;
  }
}

TEST(Align, RequiresPretrain) {
  TrainingState<float> st(tiny_spec(), 1);
  EXPECT_THROW(align(st, toy().source.x, toy().target.x, quick_align(1)), std::logic_error);
}

TEST(Align, RecordsLambdaAndAuc) {
  auto st = pretrained(6);
  auto cfg = quick_align(4);
  cfg.early_stop.reset();
  align(st, toy().source.x, toy().target.x, cfg);
  std::vector<EpochRecord> recs;
  for (const auto& r : st.history)
    if (r.phase == Phase::align) recs.push_back(r);
  ASSERT_EQ(recs.size(), 4u);
  for (int e = 0; e < 4; ++e) {
    EXPECT_NEAR(recs[e].lambda, schedule_value(cfg.weights.lambda, e), 1e-6);
    EXPECT_GE(recs[e].auc, 0.0);
    EXPECT_LE(recs[e].auc, 1.0);
  }
  EXPECT_LT(recs[0].lambda, recs[3].lambda);
}

TEST(EarlyStop, WaitsForPatience) {
  for (int patience : {2, 3}) {
    auto st = pretrained(7);
    auto cfg = quick_align(10);
    cfg.early_stop = EarlyStop{"auc_gap", patience, 10.0, 0};  // nothing counts as progress
    align(st, toy().source.x, toy().target.x, cfg);
    EXPECT_TRUE(st.stopped_early);
    EXPECT_EQ(st.epoch, 1 + patience);
    EXPECT_TRUE(st.has_completed(Phase::align));
  }
}

TEST(EarlyStop, DisabledRunsAllEpochs) {
  auto st = pretrained(7);
  auto cfg = quick_align(3);
  cfg.early_stop.reset();
  align(st, toy().source.x, toy().target.x, cfg);
  EXPECT_FALSE(st.stopped_early);
  EXPECT_EQ(st.epoch, 3);
}

TEST(Finetune, FreezeContract) {
  auto st = pretrained(8);
  const auto before = params_of(st.model);
  std::vector<std::string> names;
  for (auto* p : st.model.parameters()) names.push_back(p->name);
  auto cfg = quick_finetune(5);
  finetune(st, toy().target, {}, cfg);
  const auto after = params_of(st.model);
  for (std::size_t i = 0; i < names.size(); ++i) {
    bool unfrozen = false;
    for (const auto& pre : cfg.unfreeze) unfrozen |= names[i].rfind(pre, 0) == 0;
    double diff = 0.0;
    for (std::size_t j = 0; j < before[i].size(); ++j)
      diff = std::max(diff, static_cast<double>(std::abs(after[i][j] - before[i][j])));
    if (unfrozen) EXPECT_GT(diff, 0.0) << names[i];
    else EXPECT_EQ(diff, 0.0) << names[i];
  }
}

TEST(Finetune, WeightTrajectories) {
  auto st = pretrained(8);
  auto cfg = quick_finetune(4);
  finetune(st, toy().target, {}, cfg);
  std::vector<EpochRecord> recs;
  for (const auto& r : st.history)
    if (r.phase == Phase::finetune) recs.push_back(r);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_DOUBLE_EQ(recs[0].alpha, 0.5);
  EXPECT_DOUBLE_EQ(recs[0].lambda_ft, 0.0);
  for (int e = 0; e < 4; ++e) {
    EXPECT_NEAR(recs[e].alpha, 0.5 - 0.4 * e / 4.0, 1e-12);
    EXPECT_NEAR(recs[e].lambda_ft, 0.5 * e / 4.0, 1e-6);
    ASSERT_EQ(recs[e].lrs.size(), 2u);
  }
}

TEST(Finetune, SelectsBestHoldoutEpoch) {
  auto st = pretrained(8);
  const auto holdout = LabeledData<float>{slice_rows(toy().target.x, 0, 32),
                                          slice_rows(toy().target.y, 0, 32)};
  finetune(st, toy().target, holdout, quick_finetune(4));
  double best = 1e300;
  int best_epoch = 0;
  for (const auto& r : st.history)
    if (r.phase == Phase::finetune && r.holdout_mean_error < best)
      best = r.holdout_mean_error, best_epoch = r.epoch;
  EXPECT_EQ(st.best_epoch, best_epoch);
  const auto pred = predict_batched(st.model, holdout.x);
  double err = 0;
  for (int i = 0; i < 32; ++i)
    err += std::hypot(pred.at(i, 0) - holdout.y.at(i, 0), pred.at(i, 1) - holdout.y.at(i, 1));
  EXPECT_NEAR(err / 32, best, 1e-3 * best);
}

TEST(Finetune, Errors) {
  auto st = pretrained(8);
  EXPECT_THROW(finetune(st, LabeledData<float>{}, {}, quick_finetune(1)), std::invalid_argument);
  auto cfg = quick_finetune(1);
  cfg.unfreeze = {"nothing"};
  EXPECT_THROW(finetune(st, toy().target, {}, cfg), std::invalid_argument);
  TrainingState<float> fresh(tiny_spec(), 1);
  EXPECT_THROW(finetune(fresh, toy().target, {}, quick_finetune(1)), std::logic_error);
}

TEST(InitHead, ScaleAndBias) {
  std::mt19937_64 rng(1);
  nn::RegressionHead<double> head(4, 2, rng);
  Tensor<double> y({4, 2}, std::vector<double>{0, 100, 20, 100, 40, 100, 60, 100});
  init_head(head, y, true);
  const double sd = std::sqrt(500.0);
  EXPECT_NEAR(head.output_scale()[0], sd, 1e-12);
  EXPECT_EQ(head.output_scale()[1], 1.0);
  std::fill(head.linear().weight.value.begin(), head.linear().weight.value.end(), 0.0);
  const auto p = head.forward(Tensor<double>({1, 4}));
  EXPECT_NEAR(p[0], 30.0, 1e-9);
  EXPECT_NEAR(p[1], 100.0, 1e-9);
}

// Gradient of the alignment objective on a two-stage miniature encoder:
// grad(L_rec) - lambda * grad(L_dom), the latter through the identity path.
TEST(AdaptGradients, ReconstructionMinusLambdaDomain) {
  AutoencoderSpec spec;
  spec.stage_channels = {4, 8};
  spec.blocks_per_stage = 1;
  spec.expansion = 2;
  spec.noise_sigma = 0.0;
  nn::Localizer<double> model(spec, 21);
  const auto x = random_tensor<double>({4, 3, 100}, 22);
  const double lambda = 0.15;

  model.zero_grad();
  adapt_gradients(model, x, 2, lambda);

  auto objective = [&]() {
    auto out = model.encoder().forward(x, false, model.noise_rng());
    const double rec = loss_rec(model.decoder().forward(slice_rows(out.featmap, 2, 4)),
                                slice_rows(x, 2, 4)).value;
    const std::vector<double> labels{0, 0, 1, 1};
    const double dom = loss_dom(model.domain().forward(out.embedding, lambda),
                                std::span<const double>(labels)).value;
    return rec - lambda * dom;
  };
  nn::ParamList<double> enc;
  model.encoder().collect(enc);
  std::mt19937_64 rng(23);
  const double h = 1e-4;
  for (auto* p : enc)
    for (int t = 0; t < 3; ++t) {
      const std::size_t i = rng() % p->size();
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = objective();
      p->value[i] = keep - h;
      const double dn = objective();
      p->value[i] = keep;
      const double fd = (up - dn) / (2 * h);
      EXPECT_NEAR(p->grad[i], fd, 1e-5 * (1 + std::abs(fd))) << p->name << "[" << i << "]";
    }
}

TEST(FinetuneGradients, WeightedComposition) {
  AutoencoderSpec spec;
  spec.stage_channels = {4, 8};
  spec.blocks_per_stage = 1;
  spec.expansion = 2;
  spec.noise_sigma = 0.0;
  nn::Localizer<double> model(spec, 31);
  model.head().set_output_scale({50.0, 80.0});
  const auto x = random_tensor<double>({3, 3, 100}, 32);
  const auto y = random_tensor<double>({3, 2}, 33, 100.0);
  const double alpha = 0.3, beta = 1.0, lambda = 0.4;
  model.zero_grad();
  const auto l = finetune_gradients(model, x, y, alpha, beta, lambda);
  EXPECT_NEAR(loss_ft(l.l_rec, l.l_reg, l.l_dom, alpha, beta, lambda),
              alpha * l.l_rec + beta * l.l_reg + lambda * l.l_dom, 1e-12);

  // Encoder: alpha L_rec + beta L_reg - lambda L_dom; classifier: + L_dom.
  auto parts = [&]() {
    auto out = model.encoder().forward(x, false, model.noise_rng());
    const double rec = loss_rec(model.decoder().forward(out.featmap), x).value;
    const double reg = loss_reg(model.head().forward(out.embedding), y).value;
    const std::vector<double> zeros(3, 0.0);
    const double dom = loss_dom(model.domain().forward(out.embedding, lambda),
                                std::span<const double>(zeros)).value;
    return std::array<double, 3>{rec, reg, dom};
  };
  auto check = [&](nn::Param<double>* p, double sign_dom) {
    const std::size_t i = p->size() / 2;
    const double keep = p->value[i], h = 1e-4;
    p->value[i] = keep + h;
    const auto up = parts();
    p->value[i] = keep - h;
    const auto dn = parts();
    p->value[i] = keep;
    const double fd = (alpha * (up[0] - dn[0]) + beta * (up[1] - dn[1]) +
                       sign_dom * (up[2] - dn[2])) / (2 * h);
    EXPECT_NEAR(p->grad[i], fd, 1e-5 * (1 + std::abs(fd))) << p->name;
  };
  nn::ParamList<double> enc, dom;
  model.encoder().collect(enc);
  model.domain().collect(dom);
  for (auto* p : enc) check(p, -lambda);
  for (auto* p : dom) check(p, 1.0);
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  auto st = pretrained(10);
  finetune(st, toy().target, {}, quick_finetune(2), 1);
  const auto dir = scratch_dir("ckpt");
  save_checkpoint(st, dir, {{"note", 1}});
  auto back = load_checkpoint<float>(dir);
  EXPECT_EQ(params_of(back.model), params_of(st.model));
  EXPECT_EQ(back.model.head().output_scale(), st.model.head().output_scale());
  EXPECT_EQ(back.phase, Phase::finetune);
  EXPECT_EQ(back.epoch, 1);
  EXPECT_EQ(back.history.size(), st.history.size());
  EXPECT_EQ(back.optimizer_steps, st.optimizer_steps);
  const auto x = slice_rows(toy().target.x, 0, 4);
  EXPECT_EQ(back.model.predict(x), st.model.predict(x));
  EXPECT_EQ(read_checkpoint_info(dir).at("metrics").at("note"), 1);
}

TEST(Checkpoint, SpecHashMismatchRejected) {
  auto st = pretrained(10);
  const auto dir = scratch_dir("ckpt_hash");
  save_checkpoint(st, dir);
  auto info = read_checkpoint_info(dir);
  info["spec_hash"] = "0";
  std::ofstream(dir / "checkpoint.json") << info.dump();
  EXPECT_THROW(load_checkpoint<float>(dir), std::runtime_error);
  EXPECT_THROW(load_checkpoint<double>(scratch_dir("ckpt_missing")), std::runtime_error);
}

TEST(Checkpoint, HistoryJsonl) {
  auto st = pretrained(10, 2);
  const auto file = scratch_dir("history") / "history.jsonl";
  write_history(st.history, file);
  const auto back = read_history(file);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].l_rec, st.history[1].l_rec);
  EXPECT_EQ(back[1].lrs, st.history[1].lrs);
}
