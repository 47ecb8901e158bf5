#include "jamloc/preprocess.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace jamloc {
using nlohmann::json;

std::string to_string(FitScope s) {
  return s == FitScope::source_train_only ? "source_train_only" : "source_plus_target";
}

FitScope fit_scope_from_string(const std::string& s) {
  if (s == "source_train_only") return FitScope::source_train_only;
  if (s == "source_plus_target") return FitScope::source_plus_target;
  throw std::invalid_argument("unknown fit scope '" + s + "'");
}

ProcessedTensor cir_to_channels(std::span<const std::complex<double>> cir) {
  if (cir.size() < static_cast<std::size_t>(kModelTaps))
    throw std::invalid_argument("cir has " + std::to_string(cir.size()) + " taps, need at least " +
                                std::to_string(kModelTaps));
  ProcessedTensor out;
  for (int t = 0; t < kModelTaps; ++t) {
    const auto c = cir[t];
    const double mag = std::abs(c);
    out.at(0, t) = mag;
    if (mag == 0.0) {
      out.at(1, t) = 0.0;
      out.at(2, t) = 1.0;
    } else {
      out.at(1, t) = c.imag() / mag;
      out.at(2, t) = c.real() / mag;
    }
  }
  return out;
}

ScalerParams fit_scaler(const Tensor<double>& m, FitScope scope) {
  if (m.rank() != 2) throw std::invalid_argument("fit_scaler expects a matrix");
  const int n = m.dim(0), d = m.dim(1);
  if (n < 2) throw std::invalid_argument("fit_scaler needs at least 2 rows");
  for (double v : m.values())
    if (!std::isfinite(v)) throw std::invalid_argument("fit_scaler: non-finite entry");
  ScalerParams p;
  p.fit_scope = scope;
  p.feature_axis_len = d;
  p.means.assign(d, 0.0);
  p.stds.assign(d, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) p.means[j] += m.at(i, j);
  for (auto& v : p.means) v /= n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      const double e = m.at(i, j) - p.means[j];
      p.stds[j] += e * e;
    }
  for (auto& v : p.stds) v = std::max(std::sqrt(v / n), kStdFloor);
  return p;
}

namespace {
void check_dims(const ScalerParams& p, const Tensor<double>& m) {
  if (m.rank() != 2 || m.dim(1) != static_cast<int>(p.means.size()))
    throw std::invalid_argument("scaler expects " + std::to_string(p.means.size()) +
                                " columns, got " + m.shape_string());
}
}  // namespace

Tensor<double> apply_scaler(const ScalerParams& p, const Tensor<double>& m) {
  check_dims(p, m);
  Tensor<double> out(m.shape());
  for (int i = 0; i < m.dim(0); ++i)
    for (int j = 0; j < m.dim(1); ++j) out.at(i, j) = (m.at(i, j) - p.means[j]) / p.stds[j];
  return out;
}

Tensor<double> invert_scaler(const ScalerParams& p, const Tensor<double>& m) {
  check_dims(p, m);
  Tensor<double> out(m.shape());
  for (int i = 0; i < m.dim(0); ++i)
    for (int j = 0; j < m.dim(1); ++j) out.at(i, j) = m.at(i, j) * p.stds[j] + p.means[j];
  return out;
}

void write_scaler(const ScalerParams& p, const std::filesystem::path& file) {
  json j = {{"schema_version", kScalerSchemaVersion},
            {"fit_scope", to_string(p.fit_scope)},
            {"feature_axis_len", p.feature_axis_len},
            {"means", p.means},
            {"stds", p.stds}};
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream(file, std::ios::binary) << j.dump(1) << '\n';
}

ScalerParams load_scaler(const std::filesystem::path& file, FitScope expected) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("missing scaler sidecar " + file.string());
  ScalerParams p;
  try {
    const json j = json::parse(in);
    if (j.at("schema_version").get<int>() != kScalerSchemaVersion)
      throw std::runtime_error("unsupported scaler schema version in " + file.string());
    p.fit_scope = fit_scope_from_string(j.at("fit_scope").get<std::string>());
    p.feature_axis_len = j.at("feature_axis_len").get<int>();
    p.means = j.at("means").get<std::vector<double>>();
    p.stds = j.at("stds").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error("bad scaler sidecar " + file.string() + ": " + e.what());
  }
  if (p.fit_scope != expected)
    throw std::runtime_error("scaler " + file.string() + " was fitted with scope " +
                             to_string(p.fit_scope) + ", expected " + to_string(expected));
  if (p.means.size() != p.stds.size() ||
      p.means.size() != static_cast<std::size_t>(p.feature_axis_len))
    throw std::runtime_error("scaler " + file.string() + " has inconsistent lengths");
  for (double s : p.stds)
    if (!(s > 0.0)) throw std::runtime_error("scaler " + file.string() + " has a non-positive std");
  return p;
}

Tensor<double> cir_feature_matrix(const SampleSet& set, const std::vector<std::size_t>& rows) {
  constexpr int d = kChannels * kModelTaps;
  Tensor<double> m({static_cast<int>(rows.size()), d});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows.size()); ++i) {
    const auto t = cir_to_channels(set.samples.at(rows[i]).cir);
    std::copy(t.values.begin(), t.values.end(), m.data() + i * d);
  }
  return m;
}

Tensor<double> cir_feature_matrix(const SampleSet& set) {
  std::vector<std::size_t> all(set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return cir_feature_matrix(set, all);
}

Tensor<double> diagnostics_matrix(const SampleSet& set, const std::vector<std::size_t>& rows) {
  Tensor<double> m({static_cast<int>(rows.size()), kNumDiagnostics});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < kNumDiagnostics; ++k)
      m.at(static_cast<int>(i), k) = set.samples.at(rows[i]).diagnostics[k];
  return m;
}

Tensor<double> diagnostics_matrix(const SampleSet& set) {
  std::vector<std::size_t> all(set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return diagnostics_matrix(set, all);
}

Tensor<double> coordinate_matrix(const SampleSet& set) {
  Tensor<double> m({static_cast<int>(set.size()), 2});
  for (std::size_t i = 0; i < set.size(); ++i) {
    m.at(static_cast<int>(i), 0) = set.samples[i].x_cm;
    m.at(static_cast<int>(i), 1) = set.samples[i].y_cm;
  }
  return m;
}

ScalerParams fit_cir_scaler(const Tensor<double>& source, const Tensor<double>& target,
                            CirScaling granularity) {
  if (source.rank() != 2 || target.rank() != 2 || source.dim(1) != target.dim(1))
    throw std::invalid_argument("fit_cir_scaler: source and target widths differ");
  std::vector<double> joined = source.values();
  joined.insert(joined.end(), target.values().begin(), target.values().end());
  const int d = source.dim(1);
  const Tensor<double> all({source.dim(0) + target.dim(0), d}, std::move(joined));
  if (granularity == CirScaling::per_tap) return fit_scaler(all, FitScope::source_plus_target);

  if (d % kChannels != 0) throw std::invalid_argument("per-channel scaling needs 3 channels");
  const int taps = d / kChannels;
  Tensor<double> flat({all.dim(0) * taps, kChannels});
  for (int i = 0; i < all.dim(0); ++i)
    for (int c = 0; c < kChannels; ++c)
      for (int t = 0; t < taps; ++t) flat.at(i * taps + t, c) = all.at(i, c * taps + t);
  const ScalerParams per_channel = fit_scaler(flat, FitScope::source_plus_target);
  ScalerParams p;
  p.fit_scope = FitScope::source_plus_target;
  p.feature_axis_len = d;
  for (int c = 0; c < kChannels; ++c)
    for (int t = 0; t < taps; ++t) {
      p.means.push_back(per_channel.means[c]);
      p.stds.push_back(per_channel.stds[c]);
    }
  return p;
}

template <typename T>
Tensor<T> to_model_batch(const Tensor<double>& scaled) {
  if (scaled.rank() != 2 || scaled.dim(1) != kChannels * kModelTaps)
    throw std::invalid_argument("expected N x 300 features, got " + scaled.shape_string());
  Tensor<T> out({scaled.dim(0), kChannels, kModelTaps});
  for (std::size_t i = 0; i < scaled.size(); ++i) out[i] = static_cast<T>(scaled[i]);
  return out;
}

template Tensor<float> to_model_batch<float>(const Tensor<double>&);
template Tensor<double> to_model_batch<double>(const Tensor<double>&);

}  // namespace jamloc
