#include "jamloc/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace jamloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'J', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
struct Blob {
  std::map<std::string, std::vector<T>> entries;
};

template <typename T>
void write_blob(const Blob<T>& blob, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t width = sizeof(T);
  const std::uint64_t count = blob.entries.size();
  out.write(reinterpret_cast<const char*>(&width), sizeof width);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const auto& [name, values] : blob.entries) {
    const std::uint32_t len = static_cast<std::uint32_t>(name.size());
    const std::uint64_t n = values.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(name.data(), len);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(n * sizeof(T)));
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

template <typename T>
Blob<T> read_blob(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error(file.string() + " is not a checkpoint blob");
  std::uint32_t width = 0;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&width), sizeof width);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (width != sizeof(T))
    throw std::runtime_error("checkpoint stores " + std::to_string(width * 8) +
                             "-bit values, expected " + std::to_string(sizeof(T) * 8));
  Blob<T> blob;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string name(len, '\0');
    in.read(name.data(), len);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || n > (1ull << 32)) throw std::runtime_error("truncated checkpoint blob");
    std::vector<T> values(n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw std::runtime_error("truncated checkpoint blob");
    blob.entries.emplace(std::move(name), std::move(values));
  }
  return blob;
}

template <typename Rng>
std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

template <typename Rng>
void set_rng_state(Rng& rng, const std::string& s) {
  std::istringstream is(s);
  is >> rng;
  if (!is) throw std::runtime_error("corrupt RNG state in checkpoint");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json read_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
}

}  // namespace

json spec_to_json(const AutoencoderSpec& s) {
  return {{"in_channels", s.in_channels},
          {"taps", s.taps},
          {"stage_channels", s.stage_channels},
          {"blocks_per_stage", s.blocks_per_stage},
          {"convnext_kernel", s.convnext_kernel},
          {"expansion", s.expansion},
          {"noise_sigma", s.noise_sigma},
          {"noise_mode", s.noise_mode == NoiseMode::every_stage ? "every_stage" : "input_only"}};
}

AutoencoderSpec spec_from_json(const json& j) {
  AutoencoderSpec s;
  s.in_channels = j.value("in_channels", s.in_channels);
  s.taps = j.value("taps", s.taps);
  s.stage_channels = j.value("stage_channels", s.stage_channels);
  s.blocks_per_stage = j.value("blocks_per_stage", s.blocks_per_stage);
  s.convnext_kernel = j.value("convnext_kernel", s.convnext_kernel);
  s.expansion = j.value("expansion", s.expansion);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  const std::string mode = j.value("noise_mode", std::string("every_stage"));
  if (mode == "every_stage") s.noise_mode = NoiseMode::every_stage;
  else if (mode == "input_only") s.noise_mode = NoiseMode::input_only;
  else throw std::invalid_argument("unknown noise_mode '" + mode + "'");
  s.validate();
  return s;
}

json to_json(const EpochRecord& r) {
  json j = {{"phase", to_string(r.phase)}, {"epoch", r.epoch},   {"L_rec", r.l_rec},
            {"L_dom", r.l_dom},            {"L_reg", r.l_reg},   {"AUC", nullptr},
            {"lambda", r.lambda},          {"alpha", r.alpha},   {"lambda_ft", r.lambda_ft},
            {"lrs", r.lrs},                {"holdout_mean_error", nullptr}};
  if (r.auc >= 0) j["AUC"] = r.auc;
  if (r.holdout_mean_error >= 0) j["holdout_mean_error"] = r.holdout_mean_error;
  return j;
}

EpochRecord epoch_record_from_json(const json& j) {
  EpochRecord r;
  r.phase = phase_from_string(j.at("phase").get<std::string>());
  r.epoch = j.at("epoch").get<int>();
  r.l_rec = j.value("L_rec", 0.0);
  r.l_dom = j.value("L_dom", 0.0);
  r.l_reg = j.value("L_reg", 0.0);
  r.auc = j.contains("AUC") && !j["AUC"].is_null() ? j["AUC"].get<double>() : -1.0;
  r.lambda = j.value("lambda", 0.0);
  r.alpha = j.value("alpha", 0.0);
  r.lambda_ft = j.value("lambda_ft", 0.0);
  r.lrs = j.value("lrs", std::vector<double>{});
  r.holdout_mean_error = j.contains("holdout_mean_error") && !j["holdout_mean_error"].is_null()
                             ? j["holdout_mean_error"].get<double>()
                             : -1.0;
  return r;
}

void write_history(const std::vector<EpochRecord>& history, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const auto& r : history) out << to_json(r).dump() << '\n';
}

std::vector<EpochRecord> read_history(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<EpochRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(epoch_record_from_json(json::parse(line)));
  return out;
}

json read_checkpoint_info(const fs::path& dir) { return read_json_file(dir / "checkpoint.json"); }

template <typename T>
void save_checkpoint(TrainingState<T>& st, const fs::path& dir, const json& metrics) {
  fs::create_directories(dir);
  auto& model = st.model;
  const auto params = model.parameters();

  Blob<T> blob;
  for (const auto* p : params) blob.entries["param/" + p->name] = p->value;
  for (const auto& m : st.optimizer_moments) {
    blob.entries["adam_m/" + m.name] = m.m;
    blob.entries["adam_v/" + m.name] = m.v;
  }
  for (std::size_t i = 0; i < st.best_params.size(); ++i)
    blob.entries["best/" + params[i]->name] = st.best_params[i];
  write_blob(blob, dir / "state.bin");

  json completed = json::array();
  for (Phase p : st.completed) completed.push_back(to_string(p));
  json moments_order = json::array();
  for (const auto& m : st.optimizer_moments) moments_order.push_back(m.name);
  json history = json::array();
  for (const auto& r : st.history) history.push_back(to_json(r));

  const json meta = {{"schema_version", kCheckpointSchemaVersion},
                     {"dtype_bits", sizeof(T) * 8},
                     {"spec", spec_to_json(model.spec())},
                     {"spec_canonical", model.spec().canonical()},
                     {"spec_hash", hex64(model.spec().hash())},
                     {"phase", to_string(st.phase)},
                     {"epoch", st.epoch},
                     {"completed", completed},
                     {"seed", st.seed},
                     {"data_rng", rng_state(st.data_rng)},
                     {"noise_rng", rng_state(model.noise_rng())},
                     {"optimizer_steps", st.optimizer_steps},
                     {"optimizer_order", moments_order},
                     {"best_metric", st.best_metric},
                     {"best_epoch", st.best_epoch},
                     {"stale_epochs", st.stale_epochs},
                     {"stopped_early", st.stopped_early},
                     {"head_scale", std::vector<double>(model.head().output_scale().begin(),
                                                        model.head().output_scale().end())},
                     {"history", history},
                     {"metrics", metrics}};
  std::ofstream out(dir / "checkpoint.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "checkpoint.json").string());
  out << meta.dump(2) << '\n';
}

template <typename T>
TrainingState<T> load_checkpoint(const fs::path& dir) {
  const json meta = read_checkpoint_info(dir);
  if (meta.value("schema_version", 0) != kCheckpointSchemaVersion)
    throw std::runtime_error("unsupported checkpoint schema in " + dir.string());
  const AutoencoderSpec spec = spec_from_json(meta.at("spec"));
  if (hex64(spec.hash()) != meta.at("spec_hash").get<std::string>())
    throw std::runtime_error("checkpoint spec hash mismatch in " + dir.string());

  TrainingState<T> st(spec, meta.at("seed").get<std::uint64_t>());
  const Blob<T> blob = read_blob<T>(dir / "state.bin");
  auto params = st.model.parameters();
  for (auto* p : params) {
    auto it = blob.entries.find("param/" + p->name);
    if (it == blob.entries.end())
      throw std::runtime_error("checkpoint lacks parameter " + p->name);
    if (it->second.size() != p->size())
      throw std::runtime_error("checkpoint parameter " + p->name + " has the wrong size");
    p->value = it->second;
  }
  for (const auto& name : meta.at("optimizer_order")) {
    const std::string n = name.get<std::string>();
    st.optimizer_moments.push_back(
        {n, blob.entries.at("adam_m/" + n), blob.entries.at("adam_v/" + n)});
  }
  if (blob.entries.count("best/" + params.front()->name)) {
    for (auto* p : params) st.best_params.push_back(blob.entries.at("best/" + p->name));
  }

  st.phase = phase_from_string(meta.at("phase").get<std::string>());
  st.epoch = meta.at("epoch").get<int>();
  for (const auto& p : meta.at("completed")) st.completed.push_back(phase_from_string(p));
  set_rng_state(st.data_rng, meta.at("data_rng").get<std::string>());
  set_rng_state(st.model.noise_rng(), meta.at("noise_rng").get<std::string>());
  st.optimizer_steps = meta.at("optimizer_steps").get<long>();
  st.best_metric = meta.at("best_metric").get<double>();
  st.best_epoch = meta.at("best_epoch").get<int>();
  st.stale_epochs = meta.at("stale_epochs").get<int>();
  st.stopped_early = meta.at("stopped_early").get<bool>();
  {
    const auto hs = meta.value("head_scale", std::vector<double>{});
    st.model.head().set_output_scale(std::vector<T>(hs.begin(), hs.end()));
  }
  for (const auto& r : meta.at("history")) st.history.push_back(epoch_record_from_json(r));
  return st;
}

template void save_checkpoint<float>(TrainingState<float>&, const fs::path&, const json&);
template void save_checkpoint<double>(TrainingState<double>&, const fs::path&, const json&);
template TrainingState<float> load_checkpoint<float>(const fs::path&);
template TrainingState<double> load_checkpoint<double>(const fs::path&);

}  // namespace jamloc
