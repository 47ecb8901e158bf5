#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jamloc/dataset.hpp"
#include "jamloc/tensor.hpp"

namespace jamloc {

inline constexpr int kChannels = 3;  // magnitude, sin phase, cos phase
inline constexpr int kModelTaps = 100;
inline constexpr double kStdFloor = 1e-8;
inline constexpr int kScalerSchemaVersion = 1;

enum class FitScope { source_train_only, source_plus_target };
enum class CirScaling { per_tap, per_channel };

std::string to_string(FitScope s);
FitScope fit_scope_from_string(const std::string& s);

struct ScalerParams {
  std::vector<double> means;
  std::vector<double> stds;
  FitScope fit_scope = FitScope::source_train_only;
  int feature_axis_len = 0;
};

// 3 x 100, channel-major: values[c * 100 + t].
struct ProcessedTensor {
  std::array<double, kChannels * kModelTaps> values{};
  double& at(int channel, int tap) { return values[channel * kModelTaps + tap]; }
  double at(int channel, int tap) const { return values[channel * kModelTaps + tap]; }
};

// Magnitude and phase channels of the first 100 taps. A zero tap has phase 0
// (sin 0, cos 1).
ProcessedTensor cir_to_channels(std::span<const std::complex<double>> cir);

// Column means and population standard deviations (floored at 1e-8).
ScalerParams fit_scaler(const Tensor<double>& matrix, FitScope scope);
Tensor<double> apply_scaler(const ScalerParams& p, const Tensor<double>& matrix);
Tensor<double> invert_scaler(const ScalerParams& p, const Tensor<double>& matrix);

void write_scaler(const ScalerParams& p, const std::filesystem::path& file);
// Rejects a sidecar whose fit scope differs from `expected`.
ScalerParams load_scaler(const std::filesystem::path& file, FitScope expected);

// N x 300 matrix of unscaled channel tensors (flattened channel-major).
Tensor<double> cir_feature_matrix(const SampleSet& set);
Tensor<double> cir_feature_matrix(const SampleSet& set, const std::vector<std::size_t>& rows);
// N x 11 diagnostics matrix.
Tensor<double> diagnostics_matrix(const SampleSet& set);
Tensor<double> diagnostics_matrix(const SampleSet& set, const std::vector<std::size_t>& rows);
// N x 2 coordinates in cm.
Tensor<double> coordinate_matrix(const SampleSet& set);

// CIR scaler fitted jointly on source and target channel tensors.
ScalerParams fit_cir_scaler(const Tensor<double>& source_features,
                            const Tensor<double>& target_features,
                            CirScaling granularity = CirScaling::per_tap);

// Scaled N x 300 features -> [N, 3, 100] model batch.
template <typename T>
Tensor<T> to_model_batch(const Tensor<double>& scaled_features);

}  // namespace jamloc
