// Serial reference kernels against the GEMM/OpenMP versions, at the shapes
// the default autoencoder runs with a batch of 64.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "jamloc/kernels.hpp"
#include "jamloc/models.hpp"

namespace k = jamloc::kernels;

namespace {

std::vector<float> randv(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

constexpr int kBatch = 64;

// Stage-2 downsampling conv: 64 x 50 x 32 -> 64 x 25 x 64, kernel 3, stride 2.
k::ConvGeometry stage2() { return {kBatch, 50, 32, 64, 3, 2, 1, 0}; }

template <bool Serial>
void BM_Conv1dForward(benchmark::State& state) {
  const auto g = stage2();
  auto x = randv(static_cast<std::size_t>(g.batch) * g.in_len * g.in_ch, 1);
  auto w = randv(static_cast<std::size_t>(g.kernel) * g.in_ch * g.out_ch, 2);
  auto b = randv(g.out_ch, 3);
  std::vector<float> y(static_cast<std::size_t>(g.batch) * g.conv_out_len() * g.out_ch);
  for (auto _ : state) {
    if constexpr (Serial) k::serial::conv1d_forward<float>(g, x, w, b, y);
    else k::conv1d_forward<float>(g, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Serial>
void BM_Conv1dBackward(benchmark::State& state) {
  const auto g = stage2();
  auto x = randv(static_cast<std::size_t>(g.batch) * g.in_len * g.in_ch, 1);
  auto w = randv(static_cast<std::size_t>(g.kernel) * g.in_ch * g.out_ch, 2);
  auto dy = randv(static_cast<std::size_t>(g.batch) * g.conv_out_len() * g.out_ch, 3);
  std::vector<float> dx(x.size()), dw(w.size()), db(g.out_ch);
  for (auto _ : state) {
    if constexpr (Serial) k::serial::conv1d_backward<float>(g, x, w, dy, dx, dw, db);
    else k::conv1d_backward<float>(g, x, w, dy, dx, dw, db);
    benchmark::DoNotOptimize(dx.data());
  }
}

// Decoder upsampling: 64 x 13 x 128 -> 64 x 25 x 64.
template <bool Serial>
void BM_ConvTransposeForward(benchmark::State& state) {
  const k::ConvGeometry g{kBatch, 13, 128, 64, 3, 2, 1, 0};
  auto x = randv(static_cast<std::size_t>(g.batch) * g.in_len * g.in_ch, 1);
  auto w = randv(static_cast<std::size_t>(g.in_ch) * g.kernel * g.out_ch, 2);
  auto b = randv(g.out_ch, 3);
  std::vector<float> y(static_cast<std::size_t>(g.batch) * g.transpose_out_len() * g.out_ch);
  for (auto _ : state) {
    if constexpr (Serial) k::serial::conv_transpose1d_forward<float>(g, x, w, b, y);
    else k::conv_transpose1d_forward<float>(g, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

// Stage-1 depthwise conv: 64 x 50 x 32, kernel 7.
template <bool Serial>
void BM_DepthwiseForward(benchmark::State& state) {
  const int len = 50, ch = 32, kern = 7;
  auto x = randv(static_cast<std::size_t>(kBatch) * len * ch, 1);
  auto w = randv(static_cast<std::size_t>(kern) * ch, 2);
  auto b = randv(ch, 3);
  std::vector<float> y(x.size());
  for (auto _ : state) {
    if constexpr (Serial) k::serial::depthwise_forward<float>(kBatch, len, ch, kern, 3, x, w, b, y);
    else k::depthwise_forward<float>(kBatch, len, ch, kern, 3, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

// Stage-3 pointwise expansion: (64 * 13) x 128 -> 512.
template <bool Serial>
void BM_LinearForward(benchmark::State& state) {
  const int rows = kBatch * 13, in = 128, out = 512;
  auto x = randv(static_cast<std::size_t>(rows) * in, 1);
  auto w = randv(static_cast<std::size_t>(in) * out, 2);
  auto b = randv(out, 3);
  std::vector<float> y(static_cast<std::size_t>(rows) * out);
  for (auto _ : state) {
    if constexpr (Serial) k::serial::linear_forward<float>(rows, in, out, x, w, b, y);
    else k::linear_forward<float>(rows, in, out, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Serial>
void BM_LinearBackward(benchmark::State& state) {
  const int rows = kBatch * 13, in = 128, out = 512;
  auto x = randv(static_cast<std::size_t>(rows) * in, 1);
  auto w = randv(static_cast<std::size_t>(in) * out, 2);
  auto dy = randv(static_cast<std::size_t>(rows) * out, 3);
  std::vector<float> dx(x.size()), dw(w.size()), db(out);
  for (auto _ : state) {
    if constexpr (Serial) k::serial::linear_backward<float>(rows, in, out, x, w, dy, dx, dw, db);
    else k::linear_backward<float>(rows, in, out, x, w, dy, dx, dw, db);
    benchmark::DoNotOptimize(dx.data());
  }
}

template <bool Serial>
void BM_LayerNormForward(benchmark::State& state) {
  const int rows = kBatch * 50, ch = 32;
  auto x = randv(static_cast<std::size_t>(rows) * ch, 1);
  std::vector<float> gamma(ch, 1.0f), beta(ch, 0.0f), y(x.size()), xhat(x.size()), rstd(rows);
  for (auto _ : state) {
    if constexpr (Serial)
      k::serial::layernorm_forward<float>(rows, ch, 1e-6f, x, gamma, beta, y, xhat, rstd);
    else k::layernorm_forward<float>(rows, ch, 1e-6f, x, gamma, beta, y, xhat, rstd);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Serial>
void BM_Gelu(benchmark::State& state) {
  auto x = randv(static_cast<std::size_t>(kBatch) * 50 * 128, 1);
  std::vector<float> y(x.size());
  for (auto _ : state) {
    if constexpr (Serial) k::serial::gelu_forward<float>(x, y);
    else k::gelu_forward<float>(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

// Whole training step of the autoencoder at batch 64 (optimized kernels).
void BM_AutoencoderStep(benchmark::State& state) {
  jamloc::nn::Localizer<float> model(jamloc::AutoencoderSpec{}, 1);
  jamloc::Tensor<float> x({kBatch, 3, 100}, randv(static_cast<std::size_t>(kBatch) * 300, 4));
  for (auto _ : state) {
    auto out = model.encoder().forward(x, true, model.noise_rng());
    auto rec = model.decoder().forward(out.featmap);
    model.encoder().backward(model.decoder().backward(rec), {});
    benchmark::DoNotOptimize(rec.data());
  }
  state.SetItemsProcessed(state.iterations() * kBatch);
}

}  // namespace

BENCHMARK(BM_Conv1dForward<true>)->Name("conv1d_forward/serial");
BENCHMARK(BM_Conv1dForward<false>)->Name("conv1d_forward/optimized");
BENCHMARK(BM_Conv1dBackward<true>)->Name("conv1d_backward/serial");
BENCHMARK(BM_Conv1dBackward<false>)->Name("conv1d_backward/optimized");
BENCHMARK(BM_ConvTransposeForward<true>)->Name("conv_transpose_forward/serial");
BENCHMARK(BM_ConvTransposeForward<false>)->Name("conv_transpose_forward/optimized");
BENCHMARK(BM_DepthwiseForward<true>)->Name("depthwise_forward/serial");
BENCHMARK(BM_DepthwiseForward<false>)->Name("depthwise_forward/optimized");
BENCHMARK(BM_LinearForward<true>)->Name("linear_forward/serial");
BENCHMARK(BM_LinearForward<false>)->Name("linear_forward/optimized");
BENCHMARK(BM_LinearBackward<true>)->Name("linear_backward/serial");
BENCHMARK(BM_LinearBackward<false>)->Name("linear_backward/optimized");
BENCHMARK(BM_LayerNormForward<true>)->Name("layernorm_forward/serial");
BENCHMARK(BM_LayerNormForward<false>)->Name("layernorm_forward/optimized");
BENCHMARK(BM_Gelu<true>)->Name("gelu_forward/serial");
BENCHMARK(BM_Gelu<false>)->Name("gelu_forward/optimized");
BENCHMARK(BM_AutoencoderStep)->Name("autoencoder_train_step")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
