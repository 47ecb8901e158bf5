#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "jamloc/tensor.hpp"

namespace jamloc {

struct MetricsReport {
  double rmse_x = 0, rmse_y = 0;
  double mae_x = 0, mae_y = 0;
  double r2_x = 0, r2_y = 0;
  double mean_err = 0, med_err = 0, p90_err = 0;
  double frac_within_30cm = 0;
  double wall_time_min = 0;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

// Stand-in for -infinity when R^2 is undefined (constant truth, nonzero residual).
inline constexpr double kR2Sentinel = -1e30;

// preds, truths: [N, 2] in cm.
MetricsReport localization_metrics(const Tensor<double>& preds, const Tensor<double>& truths);
std::vector<double> euclidean_errors(const Tensor<double>& preds, const Tensor<double>& truths);
nlohmann::json to_json(const MetricsReport& r);

// Percentiles of unsorted data, q in [0, 100].
double percentile_linear(std::vector<double> values, double q);  // type 7
double percentile_lower(std::vector<double> values, double q);   // floor of the type-7 index

struct ClassificationReport {
  double accuracy = 0;
  double f1_macro = 0;
  double f1_weighted = 0;
  double precision_macro = 0;
  double recall_macro = 0;
  double wall_time_min = 0;
  std::size_t n = 0;
};

ClassificationReport classification_metrics(const std::vector<int>& predicted,
                                            const std::vector<int>& truth);
nlohmann::json to_json(const ClassificationReport& r);

// Binary ROC AUC (labels 0/1) via the rank-sum statistic with averaged ties.
double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels);

struct EmdReport {
  std::vector<double> emd;
  std::vector<double> mean_shift;  // |mean_source - mean_target|
  std::vector<int> flagged;        // tap indices with emd >= 0.1 or mean_shift >= 0.1
};

inline constexpr double kEmdFlagThreshold = 0.1;

// Exact 1-D Wasserstein-1 distance between two empirical distributions.
double wasserstein1(std::vector<double> a, std::vector<double> b);
EmdReport per_tap_emd(const Tensor<double>& source, const Tensor<double>& target);

// Plug-in estimate on an equal-frequency bins x bins table, in nats.
double mutual_info(const std::vector<double>& feature, const std::vector<double>& target,
                   int bins = 16);
// Equal-frequency bin index per value; tied values share a bin.
std::vector<int> equal_frequency_bins(const std::vector<double>& values, int bins);

double eta_squared(const std::vector<double>& values, const std::vector<int>& groups);

// measure -> (feature -> score); returns (feature, mean rank) sorted ascending.
std::vector<std::pair<std::string, double>> rank_aggregate(
    const std::map<std::string, std::map<std::string, double>>& tables);

struct KMeansResult {
  std::vector<int> labels;
  Tensor<double> centroids;  // [k, D]
  double inertia = 0;
};

// k-means++ initialisation, best of `restarts` runs by inertia.
KMeansResult kmeans(const Tensor<double>& points, int k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 300);

// Multinomial logistic regression with L2 penalty, trained full-batch.
class SoftmaxRegression {
 public:
  SoftmaxRegression(int classes, double l2 = 1e-3, int iterations = 300, double lr = 0.05)
      : classes_(classes), l2_(l2), iterations_(iterations), lr_(lr) {}
  void fit(const Tensor<double>& x, const std::vector<int>& y);
  Tensor<double> predict_proba(const Tensor<double>& x) const;
  std::vector<int> predict(const Tensor<double>& x) const;

 private:
  int classes_;
  double l2_;
  int iterations_;
  double lr_;
  std::vector<double> mean_, scale_;
  std::vector<double> w_;  // [(D + 1) x classes]
  int dim_ = 0;
};

// Fold index per sample; each class is spread round-robin over the folds
// after a seeded shuffle.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

// One-vs-rest AUC averaged over classes present in `truth`.
double macro_ovr_auc(const Tensor<double>& proba, const std::vector<int>& truth);

struct ProbeResult {
  double roc_auc_ovr = 0;
  double accuracy = 0;
  Tensor<double> centroids;  // [k, 2]
  std::vector<int> zones;
  double majority_prior = 0;
};

ProbeResult zone_probe(const Tensor<double>& embeddings, const Tensor<double>& coords, int k = 5,
                       int folds = 5, std::uint64_t seed = 0);

}  // namespace jamloc
