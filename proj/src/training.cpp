#include "jamloc/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jamloc/analysis.hpp"
#include "jamloc/checkpoint.hpp"
#include "jamloc/losses.hpp"

namespace jamloc {

std::string to_string(Phase p) {
  switch (p) {
    case Phase::pretrain: return "pretrain";
    case Phase::align: return "align";
    case Phase::finetune: return "finetune";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "pretrain") return Phase::pretrain;
  if (s == "align") return Phase::align;
  if (s == "finetune") return Phase::finetune;
  throw std::invalid_argument("unknown phase '" + s + "'");
}

void PhaseConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("phase config: epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("phase config: batch_size must be positive");
  if (!(base_lr >= 0.0) || !(head_lr >= 0.0))
    throw std::invalid_argument("phase config: learning rates must be non-negative");
  if (eval_slice <= 0) throw std::invalid_argument("phase config: eval_slice must be positive");
  lr_schedule.validate();
  weights.alpha.validate();
  weights.lambda.validate();
  if (early_stop && (early_stop->patience < 1 || early_stop->min_delta < 0))
    throw std::invalid_argument("phase config: bad early-stop settings");
}

PhaseConfig PhaseConfig::pretrain_defaults() {
  PhaseConfig c;
  c.epochs = 30;
  c.base_lr = 1e-3;
  c.lr_schedule = {ScheduleKind::warmup_then_cosine, 1e-3, 0.0, 30, 0.1};
  c.weights.alpha = ScheduleSpec::constant(1.0, 30);
  c.weights.lambda = ScheduleSpec::constant(0.0, 30);
  return c;
}

PhaseConfig PhaseConfig::align_defaults() {
  PhaseConfig c;
  c.epochs = 40;
  c.base_lr = 1e-4;
  c.lr_schedule = ScheduleSpec::constant(1e-4, 40);
  c.weights.alpha = ScheduleSpec::constant(1.0, 40);
  c.weights.lambda = {ScheduleKind::sigmoid_ramp, 0.05, 0.2, 40, 0.1, 10.0};
  c.early_stop = EarlyStop{};
  return c;
}

PhaseConfig PhaseConfig::finetune_defaults() {
  PhaseConfig c;
  c.epochs = 200;
  c.base_lr = 1e-3;
  c.head_lr = 1e-2;
  c.lr_schedule = {ScheduleKind::cosine_anneal, 1e-3, 0.0, 200};
  c.weights.alpha = {ScheduleKind::linear, 0.5, 0.1, 200};
  c.weights.beta = 1.0;
  c.weights.lambda = {ScheduleKind::linear, 0.0, 0.5, 200};
  c.unfreeze = {"encoder.stage3", "decoder", "head", "domain"};
  return c;
}

template <typename T>
bool TrainingState<T>::has_completed(Phase p) const {
  return std::find(completed.begin(), completed.end(), p) != completed.end();
}

// ------------------------------------------------------------------ helpers

template <typename T>
Tensor<T> take_rows(const Tensor<T>& x, const std::vector<std::size_t>& rows) {
  if (x.rank() == 0) throw std::invalid_argument("take_rows on scalar tensor");
  const std::size_t stride = x.size() / static_cast<std::size_t>(x.dim(0));
  std::vector<int> shape = x.shape();
  shape[0] = static_cast<int>(rows.size());
  Tensor<T> out(shape);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(x.dim(0)))
      throw std::out_of_range("take_rows: row index out of range");
    std::copy_n(x.data() + rows[i] * stride, stride, out.data() + i * stride);
  }
  return out;
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  if (begin > end || end > static_cast<std::size_t>(x.dim(0)))
    throw std::out_of_range("slice_rows: bad range");
  const std::size_t stride = x.size() / static_cast<std::size_t>(x.dim(0));
  std::vector<int> shape = x.shape();
  shape[0] = static_cast<int>(end - begin);
  return Tensor<T>(shape, std::vector<T>(x.data() + begin * stride, x.data() + end * stride));
}

template <typename T>
void apply_unfreeze(nn::Localizer<T>& model, const std::vector<std::string>& prefixes) {
  for (auto* p : model.parameters()) {
    p->trainable = std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string& pre) {
      return p->name.compare(0, pre.size(), pre) == 0;
    });
  }
}

template <typename T>
void unfreeze_all(nn::Localizer<T>& model) {
  for (auto* p : model.parameters()) p->trainable = true;
}

template <typename T>
Tensor<T> embed_batched(nn::Localizer<T>& model, const Tensor<T>& x, int batch) {
  const std::size_t n = x.dim(0);
  Tensor<T> out({static_cast<int>(n), model.spec().embedding_dim()});
  for (std::size_t b = 0; b < n; b += batch) {
    const std::size_t e = std::min(n, b + batch);
    Tensor<T> emb = model.embed(slice_rows(x, b, e));
    std::copy(emb.values().begin(), emb.values().end(), out.data() + b * emb.dim(1));
  }
  return out;
}

template <typename T>
Tensor<T> predict_batched(nn::Localizer<T>& model, const Tensor<T>& x, int batch) {
  return model.head().forward(embed_batched(model, x, batch));
}

template <typename T>
double reconstruction_loss(nn::Localizer<T>& model, const Tensor<T>& x, int batch) {
  const std::size_t n = x.dim(0);
  double total = 0.0;
  for (std::size_t b = 0; b < n; b += batch) {
    const std::size_t e = std::min(n, b + batch);
    Tensor<T> xb = slice_rows(x, b, e);
    total += loss_rec(model.reconstruct(xb), xb).value * static_cast<double>(e - b);
  }
  return total / static_cast<double>(n);
}

template <typename T>
double domain_auc(nn::Localizer<T>& model, const Tensor<T>& source, const Tensor<T>& target) {
  auto probs = [&](const Tensor<T>& x) {
    return model.domain().forward(embed_batched(model, x), T(0));
  };
  Tensor<T> ps = probs(source), pt = probs(target);
  std::vector<double> scores, labels;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    scores.push_back(ps[i]);
    labels.push_back(0.0);
  }
  for (std::size_t i = 0; i < pt.size(); ++i) {
    scores.push_back(pt[i]);
    labels.push_back(1.0);
  }
  return roc_auc(scores, labels);
}

namespace {

double sched(const ScheduleSpec& s, double epoch) {
  return schedule_value_at(s, std::clamp(epoch, 0.0, static_cast<double>(s.total_epochs)));
}

ScheduleSpec lr_curve(const PhaseConfig& cfg, double base) {
  ScheduleSpec s = cfg.lr_schedule;
  const double scale = cfg.base_lr > 0.0 ? base / cfg.base_lr : 0.0;
  s.start_value = base;
  s.end_value = cfg.lr_schedule.end_value * scale;
  s.total_epochs = cfg.epochs;
  return s;
}

// Evenly spaced rows, used for the fixed AUC evaluation slice.
std::vector<std::size_t> spread_rows(std::size_t n, std::size_t k) {
  k = std::min(n, k);
  std::vector<std::size_t> rows(k);
  for (std::size_t i = 0; i < k; ++i) rows[i] = i * n / k;
  return rows;
}

std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

template <typename T>
void check_finite(TrainingState<T>& st, const PhaseConfig& cfg, double value, const char* what) {
  if (std::isfinite(value)) return;
  std::string msg = std::string("non-finite ") + what + " in " + to_string(st.phase) +
                    " epoch " + std::to_string(st.epoch + 1);
  if (!cfg.dump_dir.empty()) {
    save_checkpoint(st, cfg.dump_dir);
    msg += "; state dumped to " + cfg.dump_dir.string();
  }
  throw TrainingError(msg);
}

template <typename T>
void enter_phase(TrainingState<T>& st, Phase p) {
  if (st.phase == p && st.epoch > 0) return;
  st.phase = p;
  st.epoch = 0;
  st.optimizer_steps = 0;
  st.optimizer_moments.clear();
  st.best_metric = 0.0;
  st.best_epoch = 0;
  st.stale_epochs = 0;
  st.stopped_early = false;
  st.best_params.clear();
}

}  // namespace

template <typename T>
void init_head(nn::RegressionHead<T>& head, const Tensor<T>& y, bool bias_to_mean) {
  const int n = y.dim(0);
  std::vector<T> scale(2);
  auto& bias = head.linear().bias.value;
  for (int c = 0; c < 2; ++c) {
    double m = 0.0, v = 0.0;
    for (int i = 0; i < n; ++i) m += y.at(i, c);
    m /= n;
    for (int i = 0; i < n; ++i) v += (y.at(i, c) - m) * (y.at(i, c) - m);
    const double sd = std::sqrt(v / n);
    scale[c] = static_cast<T>(sd > 1.0 ? sd : 1.0);
    if (bias_to_mean) bias[c] = static_cast<T>(m / scale[c]);
  }
  head.set_output_scale(std::move(scale));
}

namespace {

template <typename T>
void restore_optimizer(nn::Adam<T>& opt, const TrainingState<T>& st) {
  if (!st.optimizer_moments.empty() || st.optimizer_steps > 0)
    opt.import_state(st.optimizer_steps, st.optimizer_moments);
}

template <typename T>
void save_optimizer(const nn::Adam<T>& opt, TrainingState<T>& st) {
  st.optimizer_steps = opt.steps();
  st.optimizer_moments = opt.export_state();
}

template <typename T>
int resolve_until(const PhaseConfig& cfg, int until) {
  return until < 0 ? cfg.epochs : std::min(until, cfg.epochs);
}

template <typename T>
std::vector<std::vector<T>> snapshot(nn::Localizer<T>& model) {
  std::vector<std::vector<T>> out;
  for (auto* p : model.parameters()) out.push_back(p->value);
  return out;
}

template <typename T>
void restore(nn::Localizer<T>& model, const std::vector<std::vector<T>>& values) {
  auto ps = model.parameters();
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = values[i];
}

}  // namespace

template <typename T>
StepLosses adapt_gradients(nn::Localizer<T>& model, const Tensor<T>& x, std::size_t n_source,
                           T lambda) {
  const std::size_t n = x.dim(0);
  if (n_source == 0 || n_source >= n)
    throw std::invalid_argument("adapt_gradients: need source and target rows");
  auto out = model.encoder().forward(x, true, model.noise_rng());
  const Tensor<T> xt = slice_rows(x, n_source, n);
  auto l_rec = loss_rec(model.decoder().forward(slice_rows(out.featmap, n_source, n)), xt);
  std::vector<T> labels(n, T(0));
  std::fill(labels.begin() + n_source, labels.end(), T(1));
  auto l_dom = loss_dom(model.domain().forward(out.embedding, lambda), std::span<const T>(labels));

  Tensor<T> d_feat(out.featmap.shape());
  const Tensor<T> d_feat_t = model.decoder().backward(l_rec.grad);
  const std::size_t row = d_feat.size() / n;
  std::copy(d_feat_t.values().begin(), d_feat_t.values().end(), d_feat.data() + n_source * row);
  // The classifier sees the unweighted domain gradient; the GRL alone
  // scales what reaches the encoder, so it receives -lambda * dL_dom.
  model.encoder().backward(d_feat, model.domain().backward(l_dom.grad));
  return {l_rec.value, l_dom.value, 0.0};
}

template <typename T>
StepLosses finetune_gradients(nn::Localizer<T>& model, const Tensor<T>& x, const Tensor<T>& y,
                              double alpha, double beta, T lambda_ft) {
  auto out = model.encoder().forward(x, true, model.noise_rng());
  auto l_rec = loss_rec(model.decoder().forward(out.featmap), x);
  auto l_reg = loss_reg(model.head().forward(out.embedding), y);
  const std::vector<T> zeros(x.dim(0), T(0));
  auto l_dom =
      loss_dom(model.domain().forward(out.embedding, lambda_ft), std::span<const T>(zeros));

  for (auto& g : l_rec.grad.values()) g *= static_cast<T>(alpha);
  for (auto& g : l_reg.grad.values()) g *= static_cast<T>(beta);
  const Tensor<T> d_feat = model.decoder().backward(l_rec.grad);
  Tensor<T> d_emb = model.head().backward(l_reg.grad);
  const Tensor<T> d_emb_dom = model.domain().backward(l_dom.grad);
  for (std::size_t i = 0; i < d_emb.size(); ++i) d_emb[i] += d_emb_dom[i];
  model.encoder().backward(d_feat, d_emb);
  return {l_rec.value, l_dom.value, l_reg.value};
}

// ------------------------------------------------------------------ phases

template <typename T>
void pretrain(TrainingState<T>& st, const Tensor<T>& source, const PhaseConfig& cfg,
              int until_epoch, const EpochCallback& on_epoch) {
  cfg.validate();
  if (source.empty() || source.dim(0) == 0) throw std::invalid_argument("pretrain: empty data");
  if (st.has_completed(Phase::pretrain)) throw std::logic_error("pretrain already completed");
  if (st.phase != Phase::pretrain) throw std::logic_error("pretrain: state is past pretraining");
  enter_phase(st, Phase::pretrain);
  unfreeze_all(st.model);

  auto& model = st.model;
  nn::Adam<T> opt;
  opt.add_group(model.autoencoder_parameters(), cfg.base_lr);
  restore_optimizer(opt, st);
  const ScheduleSpec lr = lr_curve(cfg, cfg.base_lr);

  const std::size_t n = source.dim(0);
  const std::size_t bs = cfg.batch_size;
  const std::size_t steps = (n + bs - 1) / bs;
  const int until = resolve_until<T>(cfg, until_epoch);

  while (st.epoch < until) {
    const auto order = permutation(n, st.data_rng);
    double rec_sum = 0.0;
    EpochRecord rec;
    rec.phase = Phase::pretrain;
    rec.epoch = st.epoch + 1;
    rec.lrs = {sched(lr, st.epoch)};
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t b = s * bs, e = std::min(n, b + bs);
      Tensor<T> x = take_rows(source, {order.begin() + b, order.begin() + e});
      opt.set_lr(0, sched(lr, st.epoch + static_cast<double>(s) / steps));
      opt.zero_grad();
      auto out = model.encoder().forward(x, true, model.noise_rng());
      auto lr_rec = loss_rec(model.decoder().forward(out.featmap), x);
      check_finite(st, cfg, lr_rec.value, "L_rec");
      model.encoder().backward(model.decoder().backward(lr_rec.grad), {});
      opt.step();
      rec_sum += lr_rec.value * static_cast<double>(e - b);
    }
    rec.l_rec = rec_sum / static_cast<double>(n);
    save_optimizer(opt, st);
    ++st.epoch;
    st.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (st.epoch >= cfg.epochs) st.completed.push_back(Phase::pretrain);
}

template <typename T>
void align(TrainingState<T>& st, const Tensor<T>& source, const Tensor<T>& target,
           const PhaseConfig& cfg, int until_epoch, const EpochCallback& on_epoch) {
  cfg.validate();
  if (!st.has_completed(Phase::pretrain))
    throw std::logic_error("align: missing pretrain state");
  if (st.has_completed(Phase::align)) throw std::logic_error("align already completed");
  if (st.phase == Phase::finetune) throw std::logic_error("align: state is past alignment");
  if (source.empty() || target.empty()) throw std::invalid_argument("align: empty data");
  enter_phase(st, Phase::align);
  unfreeze_all(st.model);

  auto& model = st.model;
  nn::Adam<T> opt;
  {
    auto ps = model.autoencoder_parameters();
    model.domain().collect(ps);
    opt.add_group(ps, cfg.base_lr);
  }
  restore_optimizer(opt, st);
  const ScheduleSpec lr = lr_curve(cfg, cfg.base_lr);

  const std::size_t ns = source.dim(0), nt = target.dim(0);
  const std::size_t half = std::max<std::size_t>(1, cfg.batch_size / 2);
  const std::size_t steps = (nt + half - 1) / half;
  const Tensor<T> eval_src = take_rows(source, spread_rows(ns, cfg.eval_slice));
  const Tensor<T> eval_tgt = take_rows(target, spread_rows(nt, cfg.eval_slice));
  const int until = resolve_until<T>(cfg, until_epoch);

  while (st.epoch < until && !st.stopped_early) {
    const auto tgt_order = permutation(nt, st.data_rng);
    const auto src_order = permutation(ns, st.data_rng);
    const T lambda = static_cast<T>(sched(cfg.weights.lambda, st.epoch));
    EpochRecord rec;
    rec.phase = Phase::align;
    rec.epoch = st.epoch + 1;
    rec.lambda = lambda;
    rec.lrs = {sched(lr, st.epoch)};
    double rec_sum = 0.0, dom_sum = 0.0;
    std::size_t src_cursor = 0;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t b = s * half, e = std::min(nt, b + half);
      const std::size_t bt = e - b;
      std::vector<std::size_t> rows_s(bt);
      for (auto& r : rows_s) r = src_order[src_cursor++ % ns];
      Tensor<T> xs = take_rows(source, rows_s);
      Tensor<T> xt = take_rows(target, {tgt_order.begin() + b, tgt_order.begin() + e});
      Tensor<T> x({static_cast<int>(2 * bt), xs.dim(1), xs.dim(2)});
      std::copy(xs.values().begin(), xs.values().end(), x.data());
      std::copy(xt.values().begin(), xt.values().end(), x.data() + xs.size());

      opt.set_lr(0, sched(lr, st.epoch + static_cast<double>(s) / steps));
      opt.zero_grad();
      const auto l = adapt_gradients(model, x, bt, lambda);
      check_finite(st, cfg, loss_adapt(l.l_rec, l.l_dom, lambda), "L_adapt");
      opt.step();
      const double l_rec = l.l_rec, l_dom = l.l_dom;
      rec_sum += l_rec * static_cast<double>(bt);
      dom_sum += l_dom * static_cast<double>(bt);
    }
    rec.l_rec = rec_sum / static_cast<double>(nt);
    rec.l_dom = dom_sum / static_cast<double>(nt);
    rec.auc = domain_auc(model, eval_src, eval_tgt);
    save_optimizer(opt, st);
    ++st.epoch;

    if (cfg.early_stop) {
      const double gap = std::abs(rec.auc - 0.5);
      if (st.epoch == 1 || gap < st.best_metric - cfg.early_stop->min_delta) {
        st.best_metric = gap;
        st.best_epoch = st.epoch;
        st.stale_epochs = 0;
      } else if (st.epoch > cfg.early_stop->start_epoch) {
        ++st.stale_epochs;
      }
      if (st.stale_epochs >= cfg.early_stop->patience) st.stopped_early = true;
    }
    st.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (st.epoch >= cfg.epochs || st.stopped_early) st.completed.push_back(Phase::align);
}

template <typename T>
void finetune(TrainingState<T>& st, const LabeledData<T>& labeled, const LabeledData<T>& holdout,
              const PhaseConfig& cfg, int until_epoch, const EpochCallback& on_epoch) {
  cfg.validate();
  if (!st.has_completed(Phase::pretrain))
    throw std::logic_error("finetune: missing pretrain state");
  if (st.has_completed(Phase::finetune)) throw std::logic_error("finetune already completed");
  if (labeled.size() == 0 || labeled.y.empty())
    throw std::invalid_argument("finetune: no labeled targets");
  if (labeled.y.rank() != 2 || labeled.y.dim(0) != labeled.x.dim(0) || labeled.y.dim(1) != 2)
    throw std::invalid_argument("finetune: labels must be [N, 2]");
  const bool entering = st.phase != Phase::finetune || st.epoch == 0;
  enter_phase(st, Phase::finetune);

  auto& model = st.model;
  apply_unfreeze(model, cfg.unfreeze);
  {
    auto ps = model.parameters();
    if (std::none_of(ps.begin(), ps.end(), [](auto* p) { return p->trainable; }))
      throw std::invalid_argument("finetune: all parameters frozen");
  }
  if (entering) init_head(model.head(), labeled.y, cfg.init_head_bias_to_mean);

  nn::Adam<T> opt;
  {
    nn::ParamList<T> body, head;
    model.encoder().collect(body);
    model.decoder().collect(body);
    model.domain().collect(body);
    model.head().collect(head);
    opt.add_group(body, cfg.base_lr);
    opt.add_group(head, cfg.head_lr);
  }
  restore_optimizer(opt, st);
  const ScheduleSpec lr_body = lr_curve(cfg, cfg.base_lr);
  const ScheduleSpec lr_head = lr_curve(cfg, cfg.head_lr);

  const std::size_t n = labeled.size();
  const std::size_t bs = cfg.batch_size;
  const std::size_t steps = (n + bs - 1) / bs;
  const int until = resolve_until<T>(cfg, until_epoch);
  const double beta = cfg.weights.beta;

  while (st.epoch < until) {
    const auto order = permutation(n, st.data_rng);
    const double alpha = sched(cfg.weights.alpha, st.epoch);
    const T lambda_ft = static_cast<T>(sched(cfg.weights.lambda, st.epoch));
    EpochRecord rec;
    rec.phase = Phase::finetune;
    rec.epoch = st.epoch + 1;
    rec.alpha = alpha;
    rec.lambda_ft = lambda_ft;
    rec.lrs = {sched(lr_body, st.epoch), sched(lr_head, st.epoch)};
    double rec_sum = 0.0, reg_sum = 0.0, dom_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t b = s * bs, e = std::min(n, b + bs);
      const std::vector<std::size_t> rows(order.begin() + b, order.begin() + e);
      Tensor<T> x = take_rows(labeled.x, rows);
      Tensor<T> y = take_rows(labeled.y, rows);
      const double frac = st.epoch + static_cast<double>(s) / steps;
      opt.set_lr(0, sched(lr_body, frac));
      opt.set_lr(1, sched(lr_head, frac));
      opt.zero_grad();

      const auto l = finetune_gradients(model, x, y, alpha, beta, lambda_ft);
      check_finite(st, cfg, loss_ft(l.l_rec, l.l_reg, l.l_dom, alpha, beta, lambda_ft), "L_ft");
      opt.step();
      const double w = static_cast<double>(e - b);
      rec_sum += l.l_rec * w;
      reg_sum += l.l_reg * w;
      dom_sum += l.l_dom * w;
    }
    rec.l_rec = rec_sum / n;
    rec.l_reg = reg_sum / n;
    rec.l_dom = dom_sum / n;
    save_optimizer(opt, st);
    ++st.epoch;

    if (holdout.size() > 0) {
      const Tensor<T> pred = predict_batched(model, holdout.x);
      double err = 0.0;
      for (int i = 0; i < pred.dim(0); ++i)
        err += std::hypot(static_cast<double>(pred.at(i, 0) - holdout.y.at(i, 0)),
                          static_cast<double>(pred.at(i, 1) - holdout.y.at(i, 1)));
      rec.holdout_mean_error = err / pred.dim(0);
      if (st.best_epoch == 0 || rec.holdout_mean_error < st.best_metric) {
        st.best_metric = rec.holdout_mean_error;
        st.best_epoch = st.epoch;
        st.best_params = snapshot(model);
      }
    }
    st.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (st.epoch >= cfg.epochs) {
    if (!st.best_params.empty()) restore(model, st.best_params);
    st.completed.push_back(Phase::finetune);
    unfreeze_all(model);
  }
}

#define JAMLOC_INSTANTIATE_TRAINING(T)                                                        \
  template struct TrainingState<T>;                                                           \
  template void pretrain<T>(TrainingState<T>&, const Tensor<T>&, const PhaseConfig&, int,     \
                            const EpochCallback&);                                            \
  template void align<T>(TrainingState<T>&, const Tensor<T>&, const Tensor<T>&,               \
                         const PhaseConfig&, int, const EpochCallback&);                      \
  template void finetune<T>(TrainingState<T>&, const LabeledData<T>&, const LabeledData<T>&,  \
                            const PhaseConfig&, int, const EpochCallback&);                   \
  template double domain_auc<T>(nn::Localizer<T>&, const Tensor<T>&, const Tensor<T>&);       \
  template Tensor<T> predict_batched<T>(nn::Localizer<T>&, const Tensor<T>&, int);            \
  template Tensor<T> embed_batched<T>(nn::Localizer<T>&, const Tensor<T>&, int);              \
  template double reconstruction_loss<T>(nn::Localizer<T>&, const Tensor<T>&, int);           \
  template Tensor<T> take_rows<T>(const Tensor<T>&, const std::vector<std::size_t>&);         \
  template Tensor<T> slice_rows<T>(const Tensor<T>&, std::size_t, std::size_t);               \
  template void apply_unfreeze<T>(nn::Localizer<T>&, const std::vector<std::string>&);        \
  template void unfreeze_all<T>(nn::Localizer<T>&);                                          \
  template void init_head<T>(nn::RegressionHead<T>&, const Tensor<T>&, bool);                 \
  template StepLosses adapt_gradients<T>(nn::Localizer<T>&, const Tensor<T>&, std::size_t, T);  \
  template StepLosses finetune_gradients<T>(nn::Localizer<T>&, const Tensor<T>&,              \
                                            const Tensor<T>&, double, double, T);

JAMLOC_INSTANTIATE_TRAINING(float)
JAMLOC_INSTANTIATE_TRAINING(double)

}  // namespace jamloc
