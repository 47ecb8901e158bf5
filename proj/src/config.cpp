#include "jamloc/config.hpp"

#include <cstdio>
#include <fstream>

#include "jamloc/checkpoint.hpp"

namespace jamloc {

using nlohmann::json;

json schedule_to_json(const ScheduleSpec& s) {
  json j = {{"kind", to_string(s.kind)}, {"start", s.start_value}, {"end", s.end_value},
            {"total_epochs", s.total_epochs}};
  if (s.kind == ScheduleKind::warmup_then_cosine) j["warmup_fraction"] = s.warmup_fraction;
  if (s.kind == ScheduleKind::sigmoid_ramp) j["steepness"] = s.steepness;
  return j;
}

ScheduleSpec schedule_from_json(const json& j, int default_total) {
  ScheduleSpec s;
  if (j.is_number()) return ScheduleSpec::constant(j.get<double>(), default_total);
  s.kind = schedule_kind_from_string(j.value("kind", std::string("linear")));
  s.start_value = j.value("start", 0.0);
  s.end_value = j.value("end", s.start_value);
  s.total_epochs = j.value("total_epochs", default_total);
  s.warmup_fraction = j.value("warmup_fraction", s.warmup_fraction);
  s.steepness = j.value("steepness", s.steepness);
  s.validate();
  return s;
}

json phase_to_json(const PhaseConfig& p) {
  json j = {{"epochs", p.epochs},
            {"batch_size", p.batch_size},
            {"base_lr", p.base_lr},
            {"head_lr", p.head_lr},
            {"lr_schedule", schedule_to_json(p.lr_schedule)},
            {"alpha", schedule_to_json(p.weights.alpha)},
            {"beta", p.weights.beta},
            {"lambda", schedule_to_json(p.weights.lambda)},
            {"unfreeze", p.unfreeze},
            {"eval_slice", p.eval_slice},
            {"init_head_bias_to_mean", p.init_head_bias_to_mean},
            {"early_stop", nullptr}};
  if (p.early_stop)
    j["early_stop"] = {{"metric", p.early_stop->metric},
                       {"patience", p.early_stop->patience},
                       {"min_delta", p.early_stop->min_delta},
                       {"start_epoch", p.early_stop->start_epoch}};
  return j;
}

PhaseConfig phase_from_json(const json& j, const PhaseConfig& d) {
  PhaseConfig p = d;
  p.epochs = j.value("epochs", d.epochs);
  p.batch_size = j.value("batch_size", d.batch_size);
  p.base_lr = j.value("base_lr", d.base_lr);
  p.head_lr = j.value("head_lr", d.head_lr);
  // Schedules keep their kind and shape but follow the phase length unless
  // a total is given explicitly.
  auto sched = [&](const char* key, ScheduleSpec fallback) {
    fallback.total_epochs = p.epochs;
    return j.contains(key) ? schedule_from_json(j[key], p.epochs) : fallback;
  };
  p.lr_schedule = sched("lr_schedule", d.lr_schedule);
  p.lr_schedule.start_value = p.base_lr;
  p.weights.alpha = sched("alpha", d.weights.alpha);
  p.weights.beta = j.value("beta", d.weights.beta);
  p.weights.lambda = sched("lambda", d.weights.lambda);
  p.unfreeze = j.value("unfreeze", d.unfreeze);
  p.eval_slice = j.value("eval_slice", d.eval_slice);
  p.init_head_bias_to_mean = j.value("init_head_bias_to_mean", d.init_head_bias_to_mean);
  if (j.contains("early_stop")) {
    if (j["early_stop"].is_null()) {
      p.early_stop.reset();
    } else {
      EarlyStop es = d.early_stop.value_or(EarlyStop{});
      const json& e = j["early_stop"];
      es.metric = e.value("metric", es.metric);
      if (es.metric != "auc_gap")
        throw std::invalid_argument("early_stop.metric must be \"auc_gap\"");
      es.patience = e.value("patience", es.patience);
      es.min_delta = e.value("min_delta", es.min_delta);
      es.start_epoch = e.value("start_epoch", es.start_epoch);
      p.early_stop = es;
    }
  }
  p.validate();
  return p;
}

json config_to_json(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"model", spec_to_json(c.spec)},
          {"pretrain", phase_to_json(c.pretrain)},
          {"align", phase_to_json(c.align)},
          {"finetune", phase_to_json(c.finetune)},
          {"split", {{"train", c.ratios.train}, {"val", c.ratios.val}, {"test", c.ratios.test}}},
          {"holdout_size", c.holdout_size},
          {"cir_scaling", c.cir_scaling == CirScaling::per_tap ? "per_tap" : "per_channel"},
          {"baseline",
           {{"knn_k", c.tabular.knn_k},
            {"simplenn",
             {{"width", c.tabular.simplenn.width},
              {"blocks", c.tabular.simplenn.blocks},
              {"epochs", c.tabular.simplenn.epochs},
              {"batch_size", c.tabular.simplenn.batch_size},
              {"lr", c.tabular.simplenn.lr}}}}},
          {"coral", {{"shrinkage", c.coral.shrinkage}, {"ridge", c.coral.ridge}}},
          {"mmd",
           {{"epochs", c.mmd.epochs},
            {"batch_size", c.mmd.batch_size},
            {"lr", c.mmd.lr},
            {"head_lr", c.mmd.head_lr},
            {"weight", c.mmd.weight},
            {"unfreeze", c.mmd.unfreeze}}},
          {"probe", {{"zones", c.probe.zones}, {"folds", c.probe.folds}}},
          {"mi_bins", c.mi_bins}};
}

json default_config_json() { return config_to_json(PipelineConfig{}); }

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  try {
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    if (j.contains("model")) c.spec = spec_from_json(j["model"]);
    if (j.contains("pretrain")) c.pretrain = phase_from_json(j["pretrain"], c.pretrain);
    if (j.contains("align")) c.align = phase_from_json(j["align"], c.align);
    if (j.contains("finetune")) c.finetune = phase_from_json(j["finetune"], c.finetune);
    if (j.contains("split")) {
      c.ratios.train = j["split"].value("train", c.ratios.train);
      c.ratios.val = j["split"].value("val", c.ratios.val);
      c.ratios.test = j["split"].value("test", c.ratios.test);
    }
    c.holdout_size = j.value("holdout_size", c.holdout_size);
    if (j.contains("cir_scaling")) {
      const std::string s = j["cir_scaling"];
      if (s == "per_tap") c.cir_scaling = CirScaling::per_tap;
      else if (s == "per_channel") c.cir_scaling = CirScaling::per_channel;
      else throw std::invalid_argument("cir_scaling must be per_tap or per_channel");
    }
    if (j.contains("baseline")) {
      const json& b = j["baseline"];
      c.tabular.knn_k = b.value("knn_k", c.tabular.knn_k);
      if (b.contains("simplenn")) {
        auto& s = c.tabular.simplenn;
        const json& n = b["simplenn"];
        s.width = n.value("width", s.width);
        s.blocks = n.value("blocks", s.blocks);
        s.epochs = n.value("epochs", s.epochs);
        s.batch_size = n.value("batch_size", s.batch_size);
        s.lr = n.value("lr", s.lr);
      }
    }
    if (j.contains("coral")) {
      c.coral.shrinkage = j["coral"].value("shrinkage", c.coral.shrinkage);
      c.coral.ridge = j["coral"].value("ridge", c.coral.ridge);
    }
    if (j.contains("mmd")) {
      const json& m = j["mmd"];
      c.mmd.epochs = m.value("epochs", c.mmd.epochs);
      c.mmd.batch_size = m.value("batch_size", c.mmd.batch_size);
      c.mmd.lr = m.value("lr", c.mmd.lr);
      c.mmd.head_lr = m.value("head_lr", c.mmd.head_lr);
      c.mmd.weight = m.value("weight", c.mmd.weight);
      c.mmd.unfreeze = m.value("unfreeze", c.mmd.unfreeze);
    }
    if (j.contains("probe")) {
      c.probe.zones = j["probe"].value("zones", c.probe.zones);
      c.probe.folds = j["probe"].value("folds", c.probe.folds);
    }
    c.mi_bins = j.value("mi_bins", c.mi_bins);
    c.tabular.simplenn.seed = c.seed;
    if (c.tabular.knn_k < 1) throw std::invalid_argument("baseline.knn_k must be at least 1");
    if (c.mmd.epochs < 1 || c.mmd.batch_size < 1)
      throw std::invalid_argument("mmd epochs and batch_size must be positive");
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const std::filesystem::path& file) {
  if (file.empty()) return PipelineConfig{};
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot read config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(file.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace jamloc
