#include <gtest/gtest.h>

#include "jamloc/preprocess.hpp"
#include "test_util.hpp"

using namespace jamloc;
using jamloc::testing::random_tensor;
using jamloc::testing::scratch_dir;

TEST(CirChannels, ThreeFourFive) {
  std::vector<std::complex<double>> cir(300);
  cir[0] = {3, 4};
  const auto t = cir_to_channels(cir);
  EXPECT_DOUBLE_EQ(t.at(0, 0), 5.0);
  EXPECT_NEAR(t.at(1, 0), 0.8, 1e-15);
  EXPECT_NEAR(t.at(2, 0), 0.6, 1e-15);
}

TEST(CirChannels, ZeroTapConvention) {
  std::vector<std::complex<double>> cir(300);
  const auto t = cir_to_channels(cir);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(t.at(0, i), 0.0);
    EXPECT_EQ(t.at(1, i), 0.0);
    EXPECT_EQ(t.at(2, i), 1.0);
  }
}

TEST(CirChannels, TruncatesToHundredTaps) {
  std::vector<std::complex<double>> cir(300);
  for (int i = 0; i < 300; ++i) cir[i] = {static_cast<double>(i), 1.0};
  const auto t = cir_to_channels(cir);
  EXPECT_EQ(t.values.size(), 300u);
  EXPECT_NEAR(t.at(0, 99), std::hypot(99.0, 1.0), 1e-12);
  for (int i = 0; i < 100; ++i)
    EXPECT_NEAR(t.at(1, i) * t.at(1, i) + t.at(2, i) * t.at(2, i), 1.0, 1e-12);
}

TEST(CirChannels, TooFewTapsRejected) {
  std::vector<std::complex<double>> cir(99);
  EXPECT_THROW(cir_to_channels(cir), std::invalid_argument);
}

TEST(Scaler, ColumnOneTwoThree) {
  Tensor<double> m({3, 1}, std::vector<double>{1, 2, 3});
  const auto p = fit_scaler(m, FitScope::source_train_only);
  EXPECT_DOUBLE_EQ(p.means[0], 2.0);
  EXPECT_NEAR(p.stds[0], std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(p.stds[0], 0.816497, 1e-6);
}

TEST(Scaler, ConstantColumnFloored) {
  Tensor<double> m({3, 1}, 5.0);
  const auto p = fit_scaler(m, FitScope::source_train_only);
  EXPECT_EQ(p.means[0], 5.0);
  EXPECT_EQ(p.stds[0], 1e-8);
}

TEST(Scaler, SymmetricColumn) {
  Tensor<double> m({2, 1}, std::vector<double>{-1, 1});
  const auto p = fit_scaler(m, FitScope::source_train_only);
  EXPECT_EQ(p.means[0], 0.0);
  EXPECT_EQ(p.stds[0], 1.0);
}

TEST(Scaler, ApplyAtMeanIsZero) {
  ScalerParams p{{2.0}, {0.816497}, FitScope::source_train_only, 1};
  EXPECT_EQ(apply_scaler(p, Tensor<double>({1, 1}, 2.0))[0], 0.0);
}

TEST(Scaler, SelfNormalization) {
  const auto a = random_tensor<double>({50, 4}, 1, 7.0);
  const auto z = apply_scaler(fit_scaler(a, FitScope::source_train_only), a);
  for (int c = 0; c < 4; ++c) {
    double m = 0, v = 0;
    for (int i = 0; i < 50; ++i) m += z.at(i, c) / 50;
    for (int i = 0; i < 50; ++i) v += (z.at(i, c) - m) * (z.at(i, c) - m) / 50;
    EXPECT_LE(std::abs(m), 1e-9);
    EXPECT_LE(std::abs(std::sqrt(v) - 1.0), 1e-9);
  }
}

TEST(Scaler, AppliesFittedParamsToOtherData) {
  Tensor<double> train({3, 2}, std::vector<double>{1, 10, 2, 20, 3, 60});
  const auto p = fit_scaler(train, FitScope::source_train_only);
  const auto before = p;
  Tensor<double> other({2, 2}, std::vector<double>{4, 0, -1, 30});
  const auto z = apply_scaler(p, other);
  const double s0 = std::sqrt(2.0 / 3.0);
  const double s1 = std::sqrt(((10 - 30.0) * (10 - 30.0) + 100 + 900) / 3.0);
  EXPECT_NEAR(z.at(0, 0), (4 - 2) / s0, 1e-12);
  EXPECT_NEAR(z.at(0, 1), (0 - 30) / s1, 1e-12);
  EXPECT_NEAR(z.at(1, 0), (-1 - 2) / s0, 1e-12);
  EXPECT_NEAR(z.at(1, 1), 0.0, 1e-12);
  EXPECT_EQ(p.means, before.means);
  EXPECT_EQ(p.stds, before.stds);
}

TEST(Scaler, InvertRecoversInput) {
  const auto a = random_tensor<double>({20, 3}, 2, 4.0);
  const auto p = fit_scaler(a, FitScope::source_train_only);
  const auto back = invert_scaler(p, apply_scaler(p, a));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(back[i], a[i], 1e-9 * (1 + std::abs(a[i])));
}

TEST(Scaler, Errors) {
  EXPECT_THROW(fit_scaler(Tensor<double>({1, 2}), FitScope::source_train_only),
               std::invalid_argument);
  Tensor<double> bad({2, 1}, std::vector<double>{1.0, std::nan("")});
  EXPECT_THROW(fit_scaler(bad, FitScope::source_train_only), std::invalid_argument);
  const auto p = fit_scaler(Tensor<double>({2, 2}, std::vector<double>{1, 2, 3, 4}),
                            FitScope::source_train_only);
  EXPECT_THROW(apply_scaler(p, Tensor<double>({2, 3})), std::invalid_argument);
}

TEST(Scaler, SidecarRoundTripAndScopeCheck) {
  const auto a = random_tensor<double>({10, 3}, 3);
  const auto p = fit_scaler(a, FitScope::source_plus_target);
  const auto file = scratch_dir("scaler") / "scaler.json";
  write_scaler(p, file);
  const auto back = load_scaler(file, FitScope::source_plus_target);
  EXPECT_EQ(back.means, p.means);
  EXPECT_EQ(back.stds, p.stds);
  EXPECT_THROW(load_scaler(file, FitScope::source_train_only), std::runtime_error);
}

TEST(CirScaler, JointFitPerTapAndPerChannel) {
  const auto src = random_tensor<double>({6, 300}, 1);
  Tensor<double> tgt = random_tensor<double>({4, 300}, 2);
  for (auto& v : tgt.values()) v += 3.0;
  const auto p = fit_cir_scaler(src, tgt, CirScaling::per_tap);
  EXPECT_EQ(p.fit_scope, FitScope::source_plus_target);
  ASSERT_EQ(p.means.size(), 300u);
  double m0 = 0;
  for (int i = 0; i < 6; ++i) m0 += src.at(i, 0);
  for (int i = 0; i < 4; ++i) m0 += tgt.at(i, 0);
  EXPECT_NEAR(p.means[0], m0 / 10, 1e-12);

  const auto pc = fit_cir_scaler(src, tgt, CirScaling::per_channel);
  ASSERT_EQ(pc.means.size(), 300u);
  for (int t = 1; t < 100; ++t) {
    EXPECT_EQ(pc.means[t], pc.means[0]);
    EXPECT_EQ(pc.stds[200 + t], pc.stds[200]);
  }
  double mc = 0;
  for (int i = 0; i < 6; ++i)
    for (int t = 0; t < 100; ++t) mc += src.at(i, 100 + t);
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < 100; ++t) mc += tgt.at(i, 100 + t);
  EXPECT_NEAR(pc.means[100], mc / 1000, 1e-12);
}

TEST(ModelBatch, ChannelMajorLayout) {
  Tensor<double> f({2, 300});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 300; ++j) f.at(i, j) = i * 1000 + j;
  const auto b = to_model_batch<float>(f);
  EXPECT_EQ(b.shape(), (std::vector<int>{2, 3, 100}));
  EXPECT_EQ(b.at(1, 2, 5), 1205.0f);
}
