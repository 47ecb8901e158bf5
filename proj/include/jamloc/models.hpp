#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jamloc/layers.hpp"

namespace jamloc {

enum class NoiseMode { every_stage, input_only };

// Architecture of the 1-D ConvNeXt denoising autoencoder.
struct AutoencoderSpec {
  int in_channels = 3;
  int taps = 100;
  std::vector<int> stage_channels{32, 64, 128};
  int blocks_per_stage = 2;
  int convnext_kernel = 7;
  int expansion = 4;
  double noise_sigma = 0.6;
  NoiseMode noise_mode = NoiseMode::every_stage;

  int embedding_dim() const { return stage_channels.back(); }
  void validate() const;
  // Stable text form; its FNV-1a hash tags checkpoints.
  std::string canonical() const;
  std::uint64_t hash() const;
};

struct DomainClassifierSpec {
  std::vector<int> hidden{128, 64};
};

enum class SimpleNNHead { classify, regress };

namespace nn {

// Encoder: per stage, [noise] -> stride-2 conv -> ConvNeXt blocks.
// Stage 1 uses kernel 4 / pad 1, later stages kernel 3 / pad 1, which maps
// 100 taps to 50 -> 25 -> 13.
template <typename T>
class Encoder {
 public:
  struct Output {
    Tensor<T> embedding;  // [B, C_last], mean over length
    Tensor<T> featmap;    // [B, L_last, C_last], channels-last
  };

  Encoder() = default;
  Encoder(const AutoencoderSpec& spec, std::mt19937_64& init_rng);

  // x: [B, in_channels, taps]
  Output forward(const Tensor<T>& x, bool training, std::mt19937_64& noise_rng);
  // Either gradient may be empty. Stops early once no earlier stage is trainable.
  void backward(const Tensor<T>& d_featmap, const Tensor<T>& d_embedding);

  void collect(ParamList<T>& out);
  void collect_stage(std::size_t stage, ParamList<T>& out);
  std::size_t num_stages() const { return stages_.size(); }
  const std::vector<int>& lengths() const { return lengths_; }

 private:
  struct Stage {
    Conv1d<T> down;
    std::vector<ConvNeXtBlock<T>> blocks;
  };
  bool stage_trainable(std::size_t i);

  AutoencoderSpec spec_;
  std::vector<Stage> stages_;
  std::vector<int> lengths_;  // input length of each stage, then the final length
  GaussianNoise<T> noise_;
};

// Decoder: per stage, ConvNeXt blocks -> stride-2 transposed conv, then a
// final kernel-3 convolution to in_channels. Output padding is chosen so the
// lengths retrace the encoder exactly.
template <typename T>
class Decoder {
 public:
  Decoder() = default;
  Decoder(const AutoencoderSpec& spec, const std::vector<int>& encoder_lengths,
          std::mt19937_64& init_rng);

  // featmap [B, L_last, C_last] -> [B, in_channels, taps]
  Tensor<T> forward(const Tensor<T>& featmap);
  Tensor<T> backward(const Tensor<T>& d_out, bool need_input_grad = true);
  void collect(ParamList<T>& out);

 private:
  struct Stage {
    std::vector<ConvNeXtBlock<T>> blocks;
    ConvTranspose1d<T> up;
  };
  std::vector<Stage> stages_;
  Conv1d<T> final_;
  int out_channels_ = 3;
};

template <typename T>
class DomainClassifier {
 public:
  DomainClassifier() = default;
  DomainClassifier(int in_dim, const DomainClassifierSpec& spec, std::mt19937_64& rng);

  // embedding -> GRL(lambda) -> fc -> relu -> fc -> relu -> fc -> sigmoid; [B, 1]
  Tensor<T> forward(const Tensor<T>& embedding, T lambda);
  // Gradient w.r.t. the embedding, already passed back through the reversal.
  Tensor<T> backward(const Tensor<T>& d_prob);
  void collect(ParamList<T>& out);

  Linear<T>& layer(std::size_t i) { return i == 0 ? fc1_ : (i == 1 ? fc2_ : out_); }

 private:
  GradReversal<T> grl_;
  Linear<T> fc1_, fc2_, out_;
  Relu<T> act1_, act2_;
  Tensor<T> prob_;
};

template <typename T>
class RegressionHead {
 public:
  RegressionHead() = default;
  RegressionHead(int in_dim, int out_dim, std::mt19937_64& rng)
      : fc_("head", in_dim, out_dim, rng) {}

  // Output = scale * (W e + b); the fixed per-axis scale keeps the trainable
  // weights O(1) while predictions are in cm.
  Tensor<T> forward(const Tensor<T>& embedding) {
    Tensor<T> y = fc_.forward(embedding);
    if (!scale_.empty())
      for (int i = 0; i < y.rows(); ++i)
        for (int c = 0; c < y.cols(); ++c) y[i * y.cols() + c] *= scale_[c];
    return y;
  }
  Tensor<T> backward(const Tensor<T>& d_out) {
    if (scale_.empty()) return fc_.backward(d_out);
    Tensor<T> g = d_out;
    for (int i = 0; i < g.rows(); ++i)
      for (int c = 0; c < g.cols(); ++c) g[i * g.cols() + c] *= scale_[c];
    return fc_.backward(g);
  }
  void collect(ParamList<T>& out) { fc_.collect(out); }
  Linear<T>& linear() { return fc_; }
  const std::vector<T>& output_scale() const { return scale_; }
  void set_output_scale(std::vector<T> s) { scale_ = std::move(s); }

 private:
  Linear<T> fc_;
  std::vector<T> scale_;  // empty: identity
};

// Autoencoder plus both heads. Owns the noise generator so training runs are
// reproducible and resumable.
template <typename T>
class Localizer {
 public:
  Localizer(const AutoencoderSpec& spec, std::uint64_t seed,
            const DomainClassifierSpec& dspec = {});

  const AutoencoderSpec& spec() const { return spec_; }
  Encoder<T>& encoder() { return encoder_; }
  Decoder<T>& decoder() { return decoder_; }
  DomainClassifier<T>& domain() { return domain_; }
  RegressionHead<T>& head() { return head_; }
  std::mt19937_64& noise_rng() { return noise_rng_; }

  ParamList<T> parameters();
  ParamList<T> autoencoder_parameters();
  void zero_grad();

  // Eval-mode helpers (no noise, no caches needed afterwards).
  Tensor<T> embed(const Tensor<T>& x);
  Tensor<T> reconstruct(const Tensor<T>& x);
  Tensor<T> predict(const Tensor<T>& x);

 private:
  AutoencoderSpec spec_;
  std::mt19937_64 init_rng_;
  Encoder<T> encoder_;
  Decoder<T> decoder_;
  DomainClassifier<T> domain_;
  RegressionHead<T> head_;
  std::mt19937_64 noise_rng_;
};

// Tabular baseline: stem affine -> residual blocks h + relu(W h + b) -> head.
template <typename T>
class SimpleNN {
 public:
  SimpleNN(int in_dim, int width, int blocks, int out_dim, std::uint64_t seed);

  Tensor<T> forward(const Tensor<T>& x);
  void backward(const Tensor<T>& d_out);
  ParamList<T> parameters();
  void zero_grad();

  Linear<T>& block(std::size_t i) { return blocks_[i].fc; }
  int out_dim() const { return head_.out_features(); }

 private:
  struct Block {
    Linear<T> fc;
    Relu<T> act;
  };
  Linear<T> stem_;
  std::vector<Block> blocks_;
  Linear<T> head_;
};

}  // namespace nn

// Trainable scalar counts.
std::size_t autoencoder_param_count(const AutoencoderSpec& spec);
std::size_t domain_classifier_param_count(int in_dim, const DomainClassifierSpec& spec = {});
std::size_t regression_head_param_count(int in_dim, int out_dim = 2);

template <typename T>
std::size_t param_count(nn::Localizer<T>& model) {
  return nn::count_params(model.parameters());
}

}  // namespace jamloc
