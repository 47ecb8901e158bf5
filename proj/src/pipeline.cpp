#include "jamloc/pipeline.hpp"

#include <Eigen/Dense>
#include <chrono>

#include "jamloc/losses.hpp"
#include "jamloc/uda.hpp"

namespace jamloc {

using nlohmann::json;

namespace {

double minutes_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
}

Tensor<double> to_double(const Tensor<float>& x) { return x.cast<double>(); }

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace

PipelineConfig benchmark_config(std::uint64_t seed, std::size_t target_size) {
  PipelineConfig c;
  c.seed = seed;
  c.holdout_size = target_size / 4;
  c.cir_scaling = CirScaling::per_channel;
  auto shorten = [](PhaseConfig& p, int epochs, int batch) {
    p.epochs = epochs;
    p.batch_size = batch;
    p.lr_schedule.total_epochs = epochs;
    p.weights.alpha.total_epochs = epochs;
    p.weights.lambda.total_epochs = epochs;
  };
  shorten(c.pretrain, 10, 32);
  shorten(c.align, 10, 64);
  shorten(c.finetune, 30, 32);
  c.mmd.epochs = 10;
  c.mmd.batch_size = 32;
  return c;
}

LabeledData<float> labeled_batch(const SampleSet& set, const std::vector<std::size_t>& rows,
                                 const ScalerParams& scaler) {
  LabeledData<float> out;
  out.x = to_model_batch<float>(apply_scaler(scaler, cir_feature_matrix(set, rows)));
  out.y = Tensor<float>({static_cast<int>(rows.size()), 2});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.y.at(static_cast<int>(i), 0) = static_cast<float>(set.samples[rows[i]].x_cm);
    out.y.at(static_cast<int>(i), 1) = static_cast<float>(set.samples[rows[i]].y_cm);
  }
  return out;
}

PreparedData prepare_data(const SampleSet& source, const SampleSet& target,
                          const PipelineConfig& cfg) {
  if (source.size() == 0 || target.size() == 0)
    throw std::invalid_argument("prepare: empty source or target set");
  if (cfg.holdout_size >= target.size())
    throw std::invalid_argument("prepare: hold-out size " + std::to_string(cfg.holdout_size) +
                                " leaves no labeled target samples");
  PreparedData d;
  d.source_splits = split(source, cfg.ratios, cfg.seed);
  auto [labeled, holdout] = stratified_holdout(target, cfg.holdout_size, cfg.seed + 7);
  d.target_labeled_rows = std::move(labeled);
  d.target_holdout_rows = std::move(holdout);
  d.cir_scaler = fit_cir_scaler(cir_feature_matrix(source, d.source_splits.train),
                                cir_feature_matrix(target, d.target_labeled_rows),
                                cfg.cir_scaling);
  d.source_train = labeled_batch(source, d.source_splits.train, d.cir_scaler);
  d.source_val = labeled_batch(source, d.source_splits.val, d.cir_scaler);
  d.source_test = labeled_batch(source, d.source_splits.test, d.cir_scaler);
  d.target_labeled = labeled_batch(target, d.target_labeled_rows, d.cir_scaler);
  d.target_holdout = labeled_batch(target, d.target_holdout_rows, d.cir_scaler);
  return d;
}

MetricsReport evaluate(nn::Localizer<float>& model, const LabeledData<float>& data) {
  return localization_metrics(to_double(predict_batched(model, data.x)), to_double(data.y));
}

json to_json(const VariantResult& r) {
  json j = {{"name", r.name}, {"target", to_json(r.target)}, {"minutes", r.minutes}};
  if (r.source) j["source"] = to_json(*r.source);
  if (r.domain_auc >= 0) j["domain_auc"] = r.domain_auc;
  if (r.align_epochs > 0) j["align_epochs"] = r.align_epochs;
  return j;
}

TrainingState<float> run_pretrain(const PreparedData& data, const PipelineConfig& cfg,
                                  const EpochCallback& on_epoch) {
  TrainingState<float> st(cfg.spec, cfg.seed);
  pretrain(st, data.source_train.x, cfg.pretrain, -1, on_epoch);
  return st;
}

VariantResult run_source_only(TrainingState<float> st, const PreparedData& data,
                              const PipelineConfig& cfg, const EpochCallback& on_epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  PhaseConfig ft = cfg.finetune;
  ft.weights.lambda = ScheduleSpec::constant(0.0, ft.epochs);
  finetune(st, data.source_train, data.source_val, ft, -1, on_epoch);
  VariantResult r;
  r.name = "source_only";
  r.source = evaluate(st.model, data.source_test);
  r.target = evaluate(st.model, data.target_holdout);
  r.minutes = minutes_since(t0);
  return r;
}

VariantResult run_transfer(TrainingState<float> st, const PreparedData& data,
                           const PipelineConfig& cfg, bool adversarial, int align_epochs,
                           TrainingState<float>* final_state, const EpochCallback& on_epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  PhaseConfig al = cfg.align;
  PhaseConfig ft = cfg.finetune;
  if (align_epochs > 0) {
    al.epochs = align_epochs;
    al.lr_schedule.total_epochs = align_epochs;
  }
  if (!adversarial) {
    al.weights.lambda = ScheduleSpec::constant(0.0, al.epochs);
    al.early_stop.reset();
    ft.weights.lambda = ScheduleSpec::constant(0.0, ft.epochs);
  }
  align(st, data.source_train.x, data.target_labeled.x, al, -1, on_epoch);
  VariantResult r;
  r.name = adversarial ? "a_cnt" : "cnt";
  r.align_epochs = st.epoch;
  r.domain_auc = st.history.back().auc;
  finetune(st, data.target_labeled, data.target_holdout, ft, -1, on_epoch);
  r.target = evaluate(st.model, data.target_holdout);
  r.minutes = minutes_since(t0);
  if (final_state) *final_state = std::move(st);
  return r;
}

VariantResult run_coral(TrainingState<float> st, const PreparedData& data,
                        const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto& model = st.model;
  const Tensor<double> src = to_double(embed_batched(model, data.source_train.x));
  const Tensor<double> tgt = to_double(embed_batched(model, data.target_labeled.x));
  const Tensor<double> aligned = coral_transform(src, tgt, cfg.coral.shrinkage);

  // Fresh linear head by ridge least squares (bias unpenalised).
  const int n = aligned.dim(0), d = aligned.dim(1);
  Eigen::MatrixXd x(n, d + 1), y(n, 2);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) x(i, c) = aligned.at(i, c);
    x(i, d) = 1.0;
    y(i, 0) = data.source_train.y.at(i, 0);
    y(i, 1) = data.source_train.y.at(i, 1);
  }
  Eigen::MatrixXd reg = cfg.coral.ridge * n * Eigen::MatrixXd::Identity(d + 1, d + 1);
  reg(d, d) = 0.0;
  const Eigen::MatrixXd w = (x.transpose() * x + reg).ldlt().solve(x.transpose() * y);

  const Tensor<double> hold = to_double(embed_batched(model, data.target_holdout.x));
  Tensor<double> pred({hold.dim(0), 2});
  for (int i = 0; i < hold.dim(0); ++i)
    for (int k = 0; k < 2; ++k) {
      double v = w(d, k);
      for (int c = 0; c < d; ++c) v += hold.at(i, c) * w(c, k);
      pred.at(i, k) = v;
    }
  VariantResult r;
  r.name = "coral";
  r.target = localization_metrics(pred, to_double(data.target_holdout.y));
  r.minutes = minutes_since(t0);
  return r;
}

VariantResult run_mmd(TrainingState<float> st, const PreparedData& data,
                      const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto& model = st.model;
  apply_unfreeze(model, cfg.mmd.unfreeze);
  init_head(model.head(), data.source_train.y, true);
  nn::Adam<float> opt;
  {
    nn::ParamList<float> body, head;
    model.encoder().collect(body);
    model.head().collect(head);
    opt.add_group(body, cfg.mmd.lr);
    opt.add_group(head, cfg.mmd.head_lr);
  }
  std::mt19937_64 rng(cfg.seed + 11);
  const auto& xs_all = data.source_train;
  const auto& xt_all = data.target_labeled.x;
  const std::size_t ns = xs_all.size(), nt = xt_all.dim(0);
  const std::size_t bs = cfg.mmd.batch_size;
  const std::size_t steps = (ns + bs - 1) / bs;
  const ScheduleSpec lr_sched{ScheduleKind::cosine_anneal, 1.0, 0.0, cfg.mmd.epochs};
  for (int epoch = 0; epoch < cfg.mmd.epochs; ++epoch) {
    std::vector<std::size_t> order = all_rows(ns);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<std::size_t> pick_t(0, nt - 1);
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t b = s * bs, e = std::min(ns, b + bs), m = e - b;
      const std::vector<std::size_t> rows(order.begin() + b, order.begin() + e);
      std::vector<std::size_t> trows(m);
      for (auto& t : trows) t = pick_t(rng);
      const Tensor<float> xs = take_rows(xs_all.x, rows);
      const Tensor<float> ys = take_rows(xs_all.y, rows);
      const Tensor<float> xt = take_rows(xt_all, trows);
      Tensor<float> x({static_cast<int>(2 * m), xs.dim(1), xs.dim(2)});
      std::copy(xs.values().begin(), xs.values().end(), x.data());
      std::copy(xt.values().begin(), xt.values().end(), x.data() + xs.size());

      const double f = schedule_value_at(lr_sched, epoch + static_cast<double>(s) / steps);
      opt.set_lr(0, cfg.mmd.lr * f);
      opt.set_lr(1, cfg.mmd.head_lr * f);
      opt.zero_grad();
      auto out = model.encoder().forward(x, true, model.noise_rng());
      const Tensor<float> emb_s = slice_rows(out.embedding, 0, m);
      const Tensor<float> emb_t = slice_rows(out.embedding, m, 2 * m);
      auto l_reg = loss_reg(model.head().forward(emb_s), ys);
      const Tensor<double> es = to_double(emb_s), et = to_double(emb_t);
      const MmdGrad g = mmd_with_grad(es, et, median_bandwidth(es, et));
      if (!std::isfinite(l_reg.value + g.value)) throw TrainingError("mmd baseline diverged");
      const Tensor<float> d_head = model.head().backward(l_reg.grad);
      Tensor<float> d_emb(out.embedding.shape());
      const int w = d_emb.dim(1);
      for (std::size_t i = 0; i < m * w; ++i) {
        d_emb[i] = d_head[i] + static_cast<float>(cfg.mmd.weight * g.dx[i]);
        d_emb[m * w + i] = static_cast<float>(cfg.mmd.weight * g.dy[i]);
      }
      model.encoder().backward({}, d_emb);
      opt.step();
    }
  }
  unfreeze_all(model);
  VariantResult r;
  r.name = "mmd";
  r.target = evaluate(model, data.target_holdout);
  r.minutes = minutes_since(t0);
  return r;
}

json run_comparison(const SampleSet& source, const SampleSet& target, const PipelineConfig& cfg,
                    bool with_uda_baselines, const EpochCallback& on_epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(source, target, cfg);
  const TrainingState<float> pre = run_pretrain(data, cfg, on_epoch);

  json out;
  out["seed"] = cfg.seed;
  const VariantResult so = run_source_only(pre, data, cfg, on_epoch);
  const VariantResult acnt = run_transfer(pre, data, cfg, true, 0, nullptr, on_epoch);
  const VariantResult cnt = run_transfer(pre, data, cfg, false, acnt.align_epochs, nullptr, on_epoch);
  out["variants"] = json::array({to_json(so), to_json(acnt), to_json(cnt)});
  if (with_uda_baselines) {
    out["variants"].push_back(to_json(run_coral(pre, data, cfg)));
    out["variants"].push_back(to_json(run_mmd(pre, data, cfg)));
  }
  out["minutes"] = minutes_since(t0);
  return out;
}

}  // namespace jamloc
