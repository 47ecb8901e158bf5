// jamloc command-line tool. One subcommand per pipeline stage; every command
// writes <out>/manifest.json describing what it read and produced.
//
// Exit status: 0 success, 1 validation error (bad flags, config or data),
// 2 runtime failure (training divergence, I/O).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "jamloc/analysis.hpp"
#include "jamloc/baselines.hpp"
#include "jamloc/checkpoint.hpp"
#include "jamloc/config.hpp"
#include "jamloc/dataset.hpp"
#include "jamloc/pipeline.hpp"
#include "jamloc/plot.hpp"
#include "jamloc/preprocess.hpp"
#include "jamloc/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jamloc;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kManifestSchemaVersion = 1;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::string device = "cpu";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "Random seed (overrides the config)");
  app->add_option("--out", c.out, "Output directory")->required();
  app->add_option("--data", c.data, "Data root holding source/ and target/ (default: $JAMLOC_DATA_DIR)");
  app->add_option("--checkpoint", c.checkpoint, "Checkpoint directory");
  app->add_option("--device", c.device, "Compute device (only cpu)");
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

// Per-command state: resolved config, inputs and the artifacts written.
class Run {
 public:
  Run(std::string command, Common& c) : command_(std::move(command)), c_(c) {
    if (c_.device != "cpu") throw ValidationError("unsupported device '" + c_.device + "' (only cpu)");
    out_ = c_.out;
    fs::create_directories(out_);
  }

  // Precedence, lowest first: defaults, the checkpoint's run.json config,
  // --config, then command-line flags.
  void resolve_config(const json& flag_patch = json::object()) {
    json merged = default_config_json();
    if (!c_.checkpoint.empty() && fs::exists(fs::path(c_.checkpoint) / "run.json"))
      merged.merge_patch(read_json(fs::path(c_.checkpoint) / "run.json").at("config"));
    if (!c_.config.empty()) {
      merged.merge_patch(read_json(c_.config));
      inputs_["config"] = fs::absolute(c_.config).string();
    }
    if (c_.seed) merged["seed"] = *c_.seed;
    merged.merge_patch(flag_patch);
    try {
      cfg = config_from_json(merged);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
  }

  fs::path data_root() {
    std::string root = c_.data;
    if (root.empty() && !c_.checkpoint.empty() && fs::exists(fs::path(c_.checkpoint) / "run.json"))
      root = read_json(fs::path(c_.checkpoint) / "run.json").value("data", std::string());
    if (root.empty()) {
      const char* env = std::getenv("JAMLOC_DATA_DIR");
      if (env) root = env;
    }
    if (root.empty()) throw ValidationError("no data root: pass --data or set JAMLOC_DATA_DIR");
    if (!fs::is_directory(root)) throw ValidationError("data root " + root + " is not a directory");
    inputs_["data"] = fs::absolute(root).string();
    return fs::absolute(root);
  }

  SampleSet load(Domain d) {
    const fs::path dir = data_root() / to_string(d);
    if (!fs::exists(dir / "manifest.json")) throw ValidationError("no dataset at " + dir.string());
    SampleSet s = load_dataset(dir);
    if (s.domain != d)
      throw ValidationError(dir.string() + " holds " + to_string(s.domain) + " data");
    return s;
  }

  fs::path checkpoint() {
    if (c_.checkpoint.empty()) throw ValidationError(command_ + " needs --checkpoint");
    const fs::path p = c_.checkpoint;
    if (!fs::exists(p / "checkpoint.json")) throw ValidationError("no checkpoint at " + p.string());
    inputs_["checkpoint"] = fs::absolute(p).string();
    return p;
  }

  json run_info() {
    const fs::path p = checkpoint() / "run.json";
    return fs::exists(p) ? read_json(p) : json::object();
  }

  fs::path artifact(const std::string& name) {
    artifacts_.insert(name);
    return out_ / name;
  }

  void write_manifest(const json& extra = json::object()) {
    json m = {{"schema_version", kManifestSchemaVersion},
              {"command", command_},
              {"config_hash", config_hash(cfg)},
              {"seed", cfg.seed},
              {"inputs", inputs_},
              {"artifacts", json(std::vector<std::string>(artifacts_.begin(), artifacts_.end()))},
              {"versions",
               {{"jamloc", kVersion},
                {"compiler", __VERSION__},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"dataset_schema", kDatasetSchemaVersion},
                {"checkpoint_schema", kCheckpointSchemaVersion},
                {"scaler_schema", kScalerSchemaVersion}}}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_json(out_ / "manifest.json", m);
  }

  PipelineConfig cfg;
  fs::path out_;

 private:
  std::string command_;
  Common& c_;
  json inputs_ = json::object();
  std::set<std::string> artifacts_;
};

void log_epoch(const EpochRecord& r) {
  std::cerr << to_string(r.phase) << " epoch " << r.epoch << ": L_rec=" << r.l_rec;
  if (r.phase != Phase::pretrain) std::cerr << " L_dom=" << r.l_dom;
  if (r.phase == Phase::finetune) std::cerr << " L_reg=" << r.l_reg;
  if (r.auc >= 0) std::cerr << " AUC=" << r.auc;
  if (r.holdout_mean_error >= 0) std::cerr << " holdout_err=" << r.holdout_mean_error;
  std::cerr << '\n';
}

// Loss and schedule curves for the latest phase in the history.
void plot_history(Run& run, const std::vector<EpochRecord>& history, Phase phase) {
  Series rec{"L_rec", {}, {}}, dom{"L_dom", {}, {}}, reg{"L_reg", {}, {}};
  Series auc{"domain AUC", {}, {}}, hold{"hold-out mean error", {}, {}};
  Series lam{"lambda", {}, {}}, alpha{"alpha", {}, {}}, lam_ft{"lambda_ft", {}, {}}, lr{"lr", {}, {}};
  for (const auto& r : history) {
    if (r.phase != phase) continue;
    const double e = r.epoch;
    rec.x.push_back(e), rec.y.push_back(r.l_rec);
    dom.x.push_back(e), dom.y.push_back(r.l_dom);
    reg.x.push_back(e), reg.y.push_back(r.l_reg);
    if (r.auc >= 0) auc.x.push_back(e), auc.y.push_back(r.auc);
    if (r.holdout_mean_error >= 0) hold.x.push_back(e), hold.y.push_back(r.holdout_mean_error);
    lam.x.push_back(e), lam.y.push_back(r.lambda);
    alpha.x.push_back(e), alpha.y.push_back(r.alpha);
    lam_ft.x.push_back(e), lam_ft.y.push_back(r.lambda_ft);
    if (!r.lrs.empty()) lr.x.push_back(e), lr.y.push_back(r.lrs.front());
  }
  const std::string name = to_string(phase);
  std::vector<Series> losses{rec};
  if (phase != Phase::pretrain) losses.push_back(dom);
  if (phase == Phase::finetune) losses.push_back(reg);
  write_line_plot(run.artifact(name + "_losses.svg"), {name + " losses", "epoch", "loss", true},
                  losses);
  if (phase == Phase::align)
    write_line_plot(run.artifact("align_auc.svg"), {"domain classifier AUC", "epoch", "AUC"}, {auc});
  if (phase == Phase::finetune)
    write_line_plot(run.artifact("finetune_holdout.svg"),
                    {"hold-out mean error", "epoch", "cm"}, {hold});
  std::vector<Series> sched{lr};
  if (phase == Phase::align) sched.push_back(lam);
  if (phase == Phase::finetune) sched.push_back(alpha), sched.push_back(lam_ft);
  write_line_plot(run.artifact(name + "_schedules.svg"), {name + " schedules", "epoch", "value"},
                  sched);
}

void save_phase(Run& run, TrainingState<float>& st, const PreparedData& data, json info,
                const json& metrics = json::object()) {
  save_checkpoint(st, run.out_, metrics);
  run.artifact("checkpoint.json");
  run.artifact("state.bin");
  write_scaler(data.cir_scaler, run.artifact("cir_scaler.json"));
  info["config"] = config_to_json(run.cfg);
  write_json(run.artifact("run.json"), info);
  write_history(st.history, run.artifact("history.jsonl"));
  plot_history(run, st.history, st.phase);
}

json phase_patch(const char* phase, int epochs) {
  if (epochs <= 0) return json::object();
  return {{phase, {{"epochs", epochs}}}};
}

// ------------------------------------------------------------------ commands

int cmd_synth(Common& c, const std::string& preset, int spp) {
  Run run("synth", c);
  run.resolve_config();
  if (spp < 1) throw ValidationError("--samples-per-position must be positive");
  SynthPreset p;
  if (preset == "benchmark") p = benchmark_preset(spp);
  else if (preset == "campaign") p = campaign_preset(spp);
  else throw ValidationError("unknown preset '" + preset + "' (benchmark, campaign)");
  const std::uint64_t seed = run.cfg.seed;
  write_dataset(synth_generate(p.source, seed), run.out_ / "source");
  write_dataset(synth_generate(p.target, seed + 100), run.out_ / "target");
  for (const char* d : {"source", "target"}) {
    run.artifact(std::string(d) + "/manifest.json");
    run.artifact(std::string(d) + "/data.csv");
  }
  run.write_manifest({{"preset", preset}, {"samples_per_position", spp},
                      {"source_seed", seed}, {"target_seed", seed + 100}});
  return 0;
}

int cmd_split(Common& c, const std::string& domain) {
  Run run("split", c);
  run.resolve_config();
  const SampleSet set = run.load(domain_from_string(domain));
  const Splits s = split(set, run.cfg.ratios, run.cfg.seed);
  write_splits(s, run.artifact("splits.json"));
  run.write_manifest({{"domain", domain},
                      {"sizes", {{"train", s.train.size()}, {"val", s.val.size()}, {"test", s.test.size()}}}});
  return 0;
}

void write_matrix_csv(const fs::path& file, const Tensor<double>& m) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.precision(17);
  for (int i = 0; i < m.dim(0); ++i)
    for (int j = 0; j < m.dim(1); ++j) out << m.at(i, j) << (j + 1 == m.dim(1) ? '\n' : ',');
}

int cmd_preprocess(Common& c, bool apply) {
  Run run("preprocess", c);
  run.resolve_config();
  const SampleSet source = run.load(Domain::source);
  const SampleSet target = run.load(Domain::target);
  const PreparedData d = prepare_data(source, target, run.cfg);
  write_scaler(d.cir_scaler, run.artifact("cir_scaler.json"));
  const ScalerParams diag =
      fit_scaler(diagnostics_matrix(source, d.source_splits.train), FitScope::source_train_only);
  write_scaler(diag, run.artifact("diag_scaler.json"));
  if (apply) {
    write_matrix_csv(run.artifact("source_cir.csv"), apply_scaler(d.cir_scaler, cir_feature_matrix(source)));
    write_matrix_csv(run.artifact("target_cir.csv"), apply_scaler(d.cir_scaler, cir_feature_matrix(target)));
    write_matrix_csv(run.artifact("source_diag.csv"), apply_scaler(diag, diagnostics_matrix(source)));
    write_matrix_csv(run.artifact("target_diag.csv"), apply_scaler(diag, diagnostics_matrix(target)));
  }
  run.write_manifest();
  return 0;
}

int cmd_baseline(Common& c, const std::string& model, const std::string& task_name) {
  Run run("baseline", c);
  run.resolve_config();
  TabularTask task;
  try {
    task = tabular_task_from_string(task_name);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (model != "knn" && model != "simplenn" && !has_external_model(model))
    throw ValidationError("unknown model '" + model + "' (knn, simplenn)");
  const SampleSet source = run.load(Domain::source);
  const Splits s = split(source, run.cfg.ratios, run.cfg.seed);
  TabularResult res = train_tabular(model, task, source, s, run.cfg.tabular);
  json report = {{"source_test", res.report}};
  report["source_test"].erase("wall_time_min");

  // Source-trained model applied to the whole target set.
  const fs::path tdir = run.data_root() / "target";
  if (fs::exists(tdir / "manifest.json")) {
    const SampleSet target = load_dataset(tdir);
    const Tensor<double> x = apply_scaler(res.scaler, diagnostics_matrix(target));
    const Tensor<double> pred = res.model->predict(x);
    if (task == TabularTask::regress) {
      report["target"] = to_json(localization_metrics(pred, coordinate_matrix(target)));
      report["target"].erase("wall_time_min");
    } else {
      report["target_note"] = "target positions differ from source classes; not scored";
    }
  }
  write_json(run.artifact("report.json"), report);
  write_scaler(res.scaler, run.artifact("diag_scaler.json"));
  write_splits(s, run.artifact("splits.json"));
  run.write_manifest({{"model", model}, {"task", task_name}});
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_pretrain(Common& c, int epochs, int until) {
  Run run("pretrain", c);
  run.resolve_config(phase_patch("pretrain", epochs));
  const fs::path root = run.data_root();
  const PreparedData data = prepare_data(run.load(Domain::source), run.load(Domain::target), run.cfg);
  std::optional<TrainingState<float>> st;
  if (!c.checkpoint.empty()) {
    st.emplace(load_checkpoint<float>(run.checkpoint()));
    if (st->phase != Phase::pretrain) throw ValidationError("checkpoint is past pre-training");
  } else {
    st.emplace(run.cfg.spec, run.cfg.seed);
  }
  PhaseConfig pc = run.cfg.pretrain;
  pc.dump_dir = run.out_ / "diverged";
  pretrain(*st, data.source_train.x, pc, until, log_epoch);
  const json metrics = {{"source_val_L_rec", reconstruction_loss(st->model, data.source_val.x)}};
  save_phase(run, *st, data, {{"data", root.string()}, {"variant", "a_cnt"}}, metrics);
  run.write_manifest({{"epoch", st->epoch}});
  return 0;
}

int cmd_align(Common& c, bool adversarial, int epochs, int until) {
  Run run("align", c);
  run.resolve_config(phase_patch("align", epochs));
  TrainingState<float> st = load_checkpoint<float>(run.checkpoint());
  json info = run.run_info();
  const fs::path root = run.data_root();
  if (!st.has_completed(Phase::pretrain)) throw ValidationError("checkpoint has not finished pre-training");
  if (st.phase == Phase::finetune) throw ValidationError("checkpoint is already fine-tuned");
  // A resumed CNT run stays non-adversarial.
  if (st.phase == Phase::align && info.value("variant", "a_cnt") == "cnt") adversarial = false;
  const PreparedData data = prepare_data(run.load(Domain::source), run.load(Domain::target), run.cfg);
  PhaseConfig pc = run.cfg.align;
  if (!adversarial) {
    pc.weights.lambda = ScheduleSpec::constant(0.0, pc.epochs);
    pc.early_stop.reset();
  }
  pc.dump_dir = run.out_ / "diverged";
  align(st, data.source_train.x, data.target_labeled.x, pc, until, log_epoch);
  const json metrics = {{"domain_auc", st.history.back().auc}, {"stopped_early", st.stopped_early}};
  save_phase(run, st, data, {{"data", root.string()}, {"variant", adversarial ? "a_cnt" : "cnt"}},
             metrics);
  run.write_manifest({{"epoch", st.epoch}, {"adversarial", adversarial}});
  return 0;
}

int cmd_finetune(Common& c, bool source_only, int epochs, int until) {
  Run run("finetune", c);
  run.resolve_config(phase_patch("finetune", epochs));
  TrainingState<float> st = load_checkpoint<float>(run.checkpoint());
  json info = run.run_info();
  const fs::path root = run.data_root();
  if (!st.has_completed(Phase::pretrain)) throw ValidationError("checkpoint has not finished pre-training");
  std::string variant = info.value("variant", std::string("a_cnt"));
  if (source_only) variant = "source_only";
  if (variant == "source_only" && st.has_completed(Phase::align))
    throw ValidationError("source-only fine-tuning starts from a pre-trained checkpoint");
  if (variant != "source_only" && !st.has_completed(Phase::align) && st.phase != Phase::finetune)
    std::cerr << "note: fine-tuning on target without an alignment phase\n";
  const PreparedData data = prepare_data(run.load(Domain::source), run.load(Domain::target), run.cfg);
  PhaseConfig pc = run.cfg.finetune;
  if (variant != "a_cnt") pc.weights.lambda = ScheduleSpec::constant(0.0, pc.epochs);
  pc.dump_dir = run.out_ / "diverged";
  const bool on_source = variant == "source_only";
  finetune(st, on_source ? data.source_train : data.target_labeled,
           on_source ? data.source_val : data.target_holdout, pc, until, log_epoch);
  json metrics = {{"target_holdout", to_json(evaluate(st.model, data.target_holdout))}};
  if (on_source) metrics["source_test"] = to_json(evaluate(st.model, data.source_test));
  save_phase(run, st, data, {{"data", root.string()}, {"variant", variant}}, metrics);
  write_json(run.artifact("metrics.json"), metrics);
  run.write_manifest({{"epoch", st.epoch}, {"variant", variant}});
  std::cout << metrics.dump(2) << '\n';
  return 0;
}

// Rows of the requested split, reproduced from the run's seed and ratios.
std::vector<std::size_t> split_rows(const SampleSet& set, const PipelineConfig& cfg,
                                    Domain domain, const std::string& which) {
  std::vector<std::size_t> all(set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (which == "all") return all;
  if (domain == Domain::source) {
    const Splits s = split(set, cfg.ratios, cfg.seed);
    if (which == "train") return s.train;
    if (which == "val") return s.val;
    if (which == "test") return s.test;
  } else {
    if (cfg.holdout_size >= set.size())
      throw ValidationError("hold-out size exceeds the target set");
    auto [labeled, holdout] = stratified_holdout(set, cfg.holdout_size, cfg.seed + 7);
    if (which == "holdout") return holdout;
    if (which == "labeled") return labeled;
  }
  throw ValidationError("split '" + which + "' does not exist for the " + to_string(domain) + " domain");
}

int cmd_eval(Common& c, const std::string& domain_name, std::string which) {
  Run run("eval", c);
  run.resolve_config();
  const fs::path ck = run.checkpoint();
  TrainingState<float> st = load_checkpoint<float>(ck);
  const Domain domain = domain_from_string(domain_name);
  if (which.empty()) which = domain == Domain::source ? "test" : "holdout";
  const SampleSet set = run.load(domain);
  const ScalerParams scaler = load_scaler(ck / "cir_scaler.json", FitScope::source_plus_target);
  const auto rows = split_rows(set, run.cfg, domain, which);
  const LabeledData<float> data = labeled_batch(set, rows, scaler);
  const Tensor<double> pred = predict_batched(st.model, data.x).cast<double>();
  MetricsReport m = localization_metrics(pred, data.y.cast<double>());
  json report = to_json(m);
  report.erase("wall_time_min");
  report["domain"] = domain_name;
  report["split"] = which;
  write_json(run.artifact("metrics.json"), report);
  {
    std::ofstream out(run.artifact("predictions.csv"));
    out << "sample_id,x_cm,y_cm,pred_x_cm,pred_y_cm\n";
    out.precision(10);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& s = set.samples[rows[i]];
      out << s.sample_id << ',' << s.x_cm << ',' << s.y_cm << ',' << pred.at(i, 0) << ','
          << pred.at(i, 1) << '\n';
    }
  }
  run.write_manifest();
  std::cout << report.dump(2) << '\n';
  return 0;
}

// Evenly spaced subset so diagnostics stay affordable on large sets.
std::vector<std::size_t> thin(std::size_t n, std::size_t max_rows) {
  const std::size_t k = std::min(n, max_rows);
  std::vector<std::size_t> r(k);
  for (std::size_t i = 0; i < k; ++i) r[i] = i * n / k;
  return r;
}

int cmd_diagnose(Common& c, std::size_t max_rows) {
  Run run("diagnose", c);
  run.resolve_config();
  const SampleSet source = run.load(Domain::source);
  const SampleSet target = run.load(Domain::target);
  const auto rs = thin(source.size(), max_rows), rt = thin(target.size(), max_rows);
  const Tensor<double> fs_ = cir_feature_matrix(source, rs), ft = cir_feature_matrix(target, rt);
  const ScalerParams sc = fit_cir_scaler(fs_, ft, run.cfg.cir_scaling);
  const EmdReport r = per_tap_emd(apply_scaler(sc, fs_), apply_scaler(sc, ft));

  static const char* kChannelNames[kChannels] = {"magnitude", "sin_phase", "cos_phase"};
  json channels = json::object();
  std::vector<Series> emd_series, shift_series;
  std::ofstream csv(run.artifact("emd.csv"));
  csv << "channel,tap,emd,mean_shift\n";
  csv.precision(10);
  for (int ch = 0; ch < kChannels; ++ch) {
    Series e{kChannelNames[ch], {}, {}}, m{kChannelNames[ch], {}, {}};
    for (int t = 0; t < kModelTaps; ++t) {
      const int col = ch * kModelTaps + t;
      e.x.push_back(t), e.y.push_back(r.emd[col]);
      m.x.push_back(t), m.y.push_back(r.mean_shift[col]);
      csv << kChannelNames[ch] << ',' << t << ',' << r.emd[col] << ',' << r.mean_shift[col] << '\n';
    }
    channels[kChannelNames[ch]] = {{"emd", e.y}, {"mean_shift", m.y}};
    emd_series.push_back(std::move(e));
    shift_series.push_back(std::move(m));
  }
  json flagged = json::array();
  for (int col : r.flagged)
    flagged.push_back({{"channel", kChannelNames[col / kModelTaps]}, {"tap", col % kModelTaps}});
  const json report = {{"threshold", kEmdFlagThreshold},
                       {"source_rows", rs.size()},
                       {"target_rows", rt.size()},
                       {"channels", channels},
                       {"flagged", flagged},
                       {"flagged_count", r.flagged.size()}};
  write_json(run.artifact("emd.json"), report);
  write_line_plot(run.artifact("emd.svg"), {"per-tap Wasserstein distance", "tap", "EMD"}, emd_series);
  write_line_plot(run.artifact("mean_shift.svg"), {"per-tap |mean shift|", "tap", "|delta mean|"},
                  shift_series);
  run.write_manifest({{"flagged_count", r.flagged.size()}});
  std::cout << "flagged " << r.flagged.size() << " of " << r.emd.size() << " tap columns\n";
  return 0;
}

int cmd_importance(Common& c, const std::string& domain) {
  Run run("importance", c);
  run.resolve_config();
  const SampleSet set = run.load(domain_from_string(domain));
  const Tensor<double> diag = diagnostics_matrix(set);
  std::vector<double> position(set.size());
  std::vector<int> groups(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    position[i] = groups[i] = set.samples[i].position_id;
  std::map<std::string, std::map<std::string, double>> tables;
  for (int k = 0; k < kNumDiagnostics; ++k) {
    std::vector<double> col(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) col[i] = diag.at(static_cast<int>(i), k);
    const std::string name(kDiagnosticNames[k]);
    tables["mutual_info"][name] = mutual_info(col, position, run.cfg.mi_bins);
    tables["eta_squared"][name] = eta_squared(col, groups);
  }
  const auto ranks = rank_aggregate(tables);
  json rows = json::array();
  std::ofstream csv(run.artifact("importance.csv"));
  csv << "feature,mutual_info,eta_squared,mean_rank\n";
  csv.precision(10);
  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& [f, rank] : ranks) {
    const double mi = tables["mutual_info"][f], eta = tables["eta_squared"][f];
    rows.push_back({{"feature", f}, {"mutual_info", mi}, {"eta_squared", eta}, {"mean_rank", rank}});
    csv << f << ',' << mi << ',' << eta << ',' << rank << '\n';
    labels.push_back(f);
    values.push_back(rank);
  }
  write_json(run.artifact("importance.json"),
             {{"domain", domain}, {"target", "position_id"}, {"bins", run.cfg.mi_bins}, {"features", rows}});
  write_bar_plot(run.artifact("importance.svg"), {"feature mean rank (lower is more important)", "mean rank", ""},
                 labels, values);
  run.write_manifest();
  std::cout << json(rows).dump(2) << '\n';
  return 0;
}

int cmd_probe(Common& c, const std::string& domain_name, std::string which) {
  Run run("probe", c);
  run.resolve_config();
  const fs::path ck = run.checkpoint();
  TrainingState<float> st = load_checkpoint<float>(ck);
  const Domain domain = domain_from_string(domain_name);
  if (which.empty()) which = domain == Domain::source ? "test" : "holdout";
  const SampleSet set = run.load(domain);
  const ScalerParams scaler = load_scaler(ck / "cir_scaler.json", FitScope::source_plus_target);
  const auto rows = split_rows(set, run.cfg, domain, which);
  const LabeledData<float> data = labeled_batch(set, rows, scaler);
  const Tensor<double> emb = embed_batched(st.model, data.x).cast<double>();
  const Tensor<double> coords = data.y.cast<double>();
  const ProbeResult p = zone_probe(emb, coords, run.cfg.probe.zones, run.cfg.probe.folds, run.cfg.seed);
  json centroids = json::array();
  std::vector<std::pair<double, double>> marks;
  for (int k = 0; k < p.centroids.dim(0); ++k) {
    centroids.push_back({p.centroids.at(k, 0), p.centroids.at(k, 1)});
    marks.emplace_back(p.centroids.at(k, 0), p.centroids.at(k, 1));
  }
  const json report = {{"roc_auc_ovr", p.roc_auc_ovr}, {"accuracy", p.accuracy},
                       {"majority_prior", p.majority_prior}, {"centroids", centroids},
                       {"zones", run.cfg.probe.zones}, {"folds", run.cfg.probe.folds},
                       {"domain", domain_name}, {"split", which}, {"n", rows.size()}};
  write_json(run.artifact("probe.json"), report);
  std::vector<double> xs(rows.size()), ys(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) xs[i] = coords.at(i, 0), ys[i] = coords.at(i, 1);
  write_scatter_plot(run.artifact("zones.svg"), {"k-means zones of ground-truth positions", "x (cm)", "y (cm)"},
                     xs, ys, p.zones, marks);
  run.write_manifest();
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_compare(Common& c, bool uda, bool benchmark) {
  Run run("compare", c);
  run.resolve_config();
  const SampleSet source = run.load(Domain::source);
  const SampleSet target = run.load(Domain::target);
  if (benchmark && c.config.empty()) {
    const std::uint64_t seed = run.cfg.seed;
    run.cfg = benchmark_config(seed, target.size());
  }
  json report = run_comparison(source, target, run.cfg, uda, log_epoch);
  write_json(run.artifact("timing.json"), {{"minutes", report["minutes"]}});
  report.erase("minutes");
  for (auto& v : report["variants"]) v.erase("minutes");
  write_json(run.artifact("comparison.json"), report);
  write_json(run.artifact("config.json"), config_to_json(run.cfg));
  run.write_manifest();
  std::cout << report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jamloc: domain-adaptive UWB jammer localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common c;
  std::string preset = "benchmark", domain = "source", model = "knn", task = "regress", which;
  int spp = 40, epochs = 0, until = -1;
  bool apply = false, no_adv = false, source_only = false, uda = false, benchmark = false;
  std::size_t max_rows = 20000;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic source/target dataset pair");
  add_common(synth, c);
  synth->add_option("--preset", preset, "benchmark or campaign");
  synth->add_option("--samples-per-position", spp, "Rounds per jammer position");

  auto* split_cmd = app.add_subcommand("split", "Stratified train/val/test split");
  add_common(split_cmd, c);
  split_cmd->add_option("--domain", domain, "source or target");

  auto* prep = app.add_subcommand("preprocess", "Fit CIR and diagnostics scalers");
  add_common(prep, c);
  prep->add_flag("--apply", apply, "Also write scaled feature matrices");

  auto* base = app.add_subcommand("baseline", "Tabular baseline on diagnostics features");
  add_common(base, c);
  base->add_option("--model", model, "knn, simplenn or a registered adapter");
  base->add_option("--task", task, "classify or regress");

  auto* pre = app.add_subcommand("pretrain", "Denoising autoencoder pre-training on source CIRs");
  add_common(pre, c);
  auto* al = app.add_subcommand("align", "Adversarial domain alignment");
  add_common(al, c);
  al->add_flag("--no-adversarial", no_adv, "Lambda fixed at 0 (non-adversarial transfer)");
  auto* ft = app.add_subcommand("finetune", "Supervised fine-tuning of the regression head");
  add_common(ft, c);
  ft->add_flag("--source-only", source_only, "Fine-tune on labeled source data instead of target");
  for (auto* sub : {pre, al, ft}) {
    sub->add_option("--epochs", epochs, "Phase length (overrides the config)");
    sub->add_option("--until-epoch", until, "Stop after this epoch; resume later with --checkpoint");
  }

  auto* ev = app.add_subcommand("eval", "Localization metrics for a checkpoint on a split");
  add_common(ev, c);
  auto* pr = app.add_subcommand("probe", "Spatial zone probe on pooled embeddings");
  add_common(pr, c);
  for (auto* sub : {ev, pr}) {
    sub->add_option("--domain", domain, "source or target");
    sub->add_option("--split", which, "train, val, test (source); labeled, holdout (target); all");
  }

  auto* diag = app.add_subcommand("diagnose", "Per-tap source/target distribution shift");
  add_common(diag, c);
  diag->add_option("--max-rows", max_rows, "Rows used per domain (evenly spaced)");

  auto* imp = app.add_subcommand("importance", "Diagnostics feature importance");
  add_common(imp, c);
  imp->add_option("--domain", domain, "source or target");

  auto* cmp = app.add_subcommand("compare", "Source-only, A-CNT and CNT on one dataset pair");
  add_common(cmp, c);
  cmp->add_flag("--uda", uda, "Also run the CORAL and MMD baselines");
  cmp->add_flag("--benchmark", benchmark, "Use the shortened synthetic benchmark settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(c, preset, spp);
    if (*split_cmd) return cmd_split(c, domain);
    if (*prep) return cmd_preprocess(c, apply);
    if (*base) return cmd_baseline(c, model, task);
    if (*pre) return cmd_pretrain(c, epochs, until);
    if (*al) return cmd_align(c, !no_adv, epochs, until);
    if (*ft) return cmd_finetune(c, source_only, epochs, until);
    if (*ev) return cmd_eval(c, domain, which);
    if (*pr) return cmd_probe(c, domain, which);
    if (*diag) return cmd_diagnose(c, max_rows);
    if (*imp) return cmd_importance(c, domain);
    if (*cmp) return cmd_compare(c, uda, benchmark);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DatasetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
