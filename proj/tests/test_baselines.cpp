#include <gtest/gtest.h>

#include "jamloc/baselines.hpp"
#include "jamloc/synth.hpp"
#include "test_util.hpp"

using namespace jamloc;
using jamloc::testing::random_tensor;

TEST(Knn, ExactMatchWithKOne) {
  const auto train = random_tensor<double>({10, 3}, 1);
  std::vector<int> labels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Tensor<double> q({1, 3});
  for (int c = 0; c < 3; ++c) q[c] = train.at(6, c);
  EXPECT_EQ(knn_classify(train, labels, q, 1)[0], 6);
}

TEST(Knn, FullKGivesGlobalMean) {
  const auto train = random_tensor<double>({8, 2}, 1);
  const auto y = random_tensor<double>({8, 2}, 2, 100.0);
  const auto pred = knn_regress(train, y, random_tensor<double>({3, 2}, 3), 8);
  for (int c = 0; c < 2; ++c) {
    double m = 0;
    for (int i = 0; i < 8; ++i) m += y.at(i, c) / 8;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(pred.at(i, c), m, 1e-9);
  }
}

TEST(Knn, SixPointToyMatchesBruteForce) {
  Tensor<double> train({6, 2}, std::vector<double>{0, 0, 1, 0, 0, 1, 5, 5, 6, 5, 5, 6});
  const std::vector<int> labels{0, 0, 1, 1, 1, 0};
  const auto query = random_tensor<double>({20, 2}, 4, 4.0);
  const auto got = knn_classify(train, labels, query, 3);
  for (int i = 0; i < 20; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < 6; ++j)
      d.push_back({std::hypot(query.at(i, 0) - train.at(j, 0), query.at(i, 1) - train.at(j, 1)), j});
    std::sort(d.begin(), d.end());
    int ones = 0;
    for (int j = 0; j < 3; ++j) ones += labels[d[j].second];
    EXPECT_EQ(got[i], ones >= 2 ? 1 : 0) << i;
  }
}

TEST(Knn, TieGoesToSmallestClass) {
  Tensor<double> train({2, 1}, std::vector<double>{-1, 1});
  EXPECT_EQ(knn_classify(train, {7, 3}, Tensor<double>({1, 1}), 2)[0], 3);
}

TEST(Knn, KTooLargeRejected) {
  EXPECT_THROW(knn_classify(Tensor<double>({2, 1}), {0, 1}, Tensor<double>({1, 1}), 3),
               std::invalid_argument);
}

// Rescaling features and re-standardizing leaves neighbours unchanged.
TEST(Knn, InvariantUnderAffineRescaling) {
  const auto train = random_tensor<double>({40, 4}, 1);
  const auto query = random_tensor<double>({15, 4}, 2);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i % 3;
  auto standardize = [](const Tensor<double>& fit, const Tensor<double>& x) {
    return apply_scaler(fit_scaler(fit, FitScope::source_train_only), x);
  };
  const auto base = knn_classify(standardize(train, train), labels, standardize(train, query), 5);
  Tensor<double> t2 = train, q2 = query;
  const double a[4] = {3.0, -0.5, 100.0, 1e-3}, b[4] = {7.0, 2.0, -40.0, 0.1};
  for (int i = 0; i < 40; ++i)
    for (int c = 0; c < 4; ++c) t2.at(i, c) = a[c] * train.at(i, c) + b[c];
  for (int i = 0; i < 15; ++i)
    for (int c = 0; c < 4; ++c) q2.at(i, c) = a[c] * query.at(i, c) + b[c];
  EXPECT_EQ(knn_classify(standardize(t2, t2), labels, standardize(t2, q2), 5), base);
}

TEST(SimpleNN, OverfitsTwentySamples) {
  const auto x = random_tensor<double>({20, 11}, 1);
  Tensor<double> y({20, 1});
  for (int i = 0; i < 20; ++i) y[i] = i % 4;
  SimpleNNConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 20;
  cfg.lr = 3e-3;
  SimpleNNModel m(TabularTask::classify, cfg);
  m.fit(x, y);
  const auto pred = m.predict(x);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(pred[i], y[i]) << i;
  EXPECT_LT(m.losses().back(), m.losses().front());
}

TEST(SimpleNN, RegressionOutputsCoordinates) {
  const auto x = random_tensor<double>({30, 11}, 1);
  Tensor<double> y({30, 2});
  for (int i = 0; i < 30; ++i) {
    y.at(i, 0) = 150 + 40 * x.at(i, 0);
    y.at(i, 1) = 250 - 30 * x.at(i, 1);
  }
  SimpleNNConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 30;
  SimpleNNModel m(TabularTask::regress, cfg);
  m.fit(x, y);
  const auto pred = m.predict(x);
  ASSERT_EQ(pred.shape(), (std::vector<int>{30, 2}));
  double err = 0;
  for (int i = 0; i < 30; ++i) err += std::hypot(pred.at(i, 0) - y.at(i, 0), pred.at(i, 1) - y.at(i, 1));
  EXPECT_LT(err / 30, 10.0);
}

namespace {

// One receiver only: rows carry no receiver id, so mixing receivers makes
// positions ambiguous from diagnostics alone.
SampleSet eight_positions() {
  SynthConfig cfg;
  cfg.jammer_positions = grid_positions(300, 500, 2, 4, 60, 60);
  cfg.samples_per_position = 120;
  const auto all = synth_generate(cfg, 4);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all.samples[i].receiver_id == 0) keep.push_back(i);
  return all.subset(keep);
}

}  // namespace

TEST(TrainTabular, SimpleNNOnEightPositions) {
  const auto set = eight_positions();
  const auto splits = split(set, {}, 0);
  TabularConfig cfg;
  cfg.simplenn.epochs = 50;
  cfg.simplenn.batch_size = 64;
  const auto r = train_tabular("simplenn", TabularTask::classify, set, splits, cfg);
  EXPECT_GT(r.report.at("accuracy").get<double>(), 0.9) << r.report.dump();
  EXPECT_EQ(r.class_of_position.size(), 8u);
}

TEST(TrainTabular, KnnRegressionReport) {
  const auto set = eight_positions();
  const auto r = train_tabular("knn", TabularTask::regress, set, split(set, {}, 0));
  const auto& test = r.report;
  EXPECT_TRUE(test.contains("mean_err"));
  EXPECT_GE(test.at("frac_within_30cm").get<double>(), 0.0);
  EXPECT_EQ(r.scaler.fit_scope, FitScope::source_train_only);
}

TEST(TrainTabular, ExternalAdapterPlugsIn) {
  register_external_model("constant", [](TabularTask) {
    return std::make_unique<ExternalAdapter>(
        "constant", [](const Tensor<double>&, const Tensor<double>&) {},
        [](const Tensor<double>& x) { return Tensor<double>({x.dim(0), 2}, 100.0); });
  });
  EXPECT_TRUE(has_external_model("constant"));
  const auto set = eight_positions();
  const auto r = train_tabular("constant", TabularTask::regress, set, split(set, {}, 0));
  EXPECT_GT(r.report.at("mean_err").get<double>(), 0.0);
}

TEST(TrainTabular, UnknownModelRejected) {
  const auto set = eight_positions();
  EXPECT_THROW(train_tabular("forest", TabularTask::classify, set, split(set, {}, 0)),
               std::invalid_argument);
}
