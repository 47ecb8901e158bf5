#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "jamloc/analysis.hpp"
#include "jamloc/dataset.hpp"
#include "jamloc/preprocess.hpp"
#include "jamloc/tensor.hpp"

namespace jamloc {

enum class TabularTask { classify, regress };
std::string to_string(TabularTask t);
TabularTask tabular_task_from_string(const std::string& s);

// Euclidean k-nearest neighbours. Majority vote ties go to the smallest class
// id; distance ties to the lower training row.
std::vector<int> knn_classify(const Tensor<double>& train_x, const std::vector<int>& train_y,
                              const Tensor<double>& query_x, int k);
Tensor<double> knn_regress(const Tensor<double>& train_x, const Tensor<double>& train_y,
                           const Tensor<double>& query_x, int k);

// Labels are class ids in column 0 for classification, coordinates for
// regression. Predictions use the same layout.
class TabularModel {
 public:
  virtual ~TabularModel() = default;
  virtual std::string name() const = 0;
  virtual void fit(const Tensor<double>& x, const Tensor<double>& y) = 0;
  virtual Tensor<double> predict(const Tensor<double>& x) const = 0;
};

class KnnModel : public TabularModel {
 public:
  KnnModel(TabularTask task, int k) : task_(task), k_(k) {}
  std::string name() const override { return "knn"; }
  void fit(const Tensor<double>& x, const Tensor<double>& y) override;
  Tensor<double> predict(const Tensor<double>& x) const override;

 private:
  TabularTask task_;
  int k_;
  Tensor<double> x_, y_;
};

struct SimpleNNConfig {
  int width = 128;
  int blocks = 2;
  int epochs = 50;
  int batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

class SimpleNNModel : public TabularModel {
 public:
  SimpleNNModel(TabularTask task, SimpleNNConfig cfg);
  ~SimpleNNModel() override;
  std::string name() const override { return "simplenn"; }
  void fit(const Tensor<double>& x, const Tensor<double>& y) override;
  Tensor<double> predict(const Tensor<double>& x) const override;
  // Per-epoch mean training loss.
  const std::vector<double>& losses() const { return losses_; }

 private:
  struct Impl;
  TabularTask task_;
  SimpleNNConfig cfg_;
  std::unique_ptr<Impl> impl_;
  std::vector<double> losses_;
  int classes_ = 0;
  std::vector<double> y_mean_, y_scale_;
};

// Plug-in point for externally implemented models (tree ensembles etc.).
class ExternalAdapter : public TabularModel {
 public:
  using FitFn = std::function<void(const Tensor<double>&, const Tensor<double>&)>;
  using PredictFn = std::function<Tensor<double>(const Tensor<double>&)>;
  ExternalAdapter(std::string name, FitFn fit, PredictFn predict)
      : name_(std::move(name)), fit_(std::move(fit)), predict_(std::move(predict)) {}
  std::string name() const override { return name_; }
  void fit(const Tensor<double>& x, const Tensor<double>& y) override { fit_(x, y); }
  Tensor<double> predict(const Tensor<double>& x) const override { return predict_(x); }

 private:
  std::string name_;
  FitFn fit_;
  PredictFn predict_;
};

using AdapterFactory = std::function<std::unique_ptr<TabularModel>(TabularTask)>;
void register_external_model(const std::string& tag, AdapterFactory factory);
bool has_external_model(const std::string& tag);

struct TabularConfig {
  int knn_k = 5;
  SimpleNNConfig simplenn;
};

struct TabularResult {
  std::unique_ptr<TabularModel> model;
  ScalerParams scaler;               // fitted on the training split only
  std::map<int, int> class_of_position;  // classification: position_id -> class id
  nlohmann::json report;
};

// model tag: "knn", "simplenn" or a registered external tag.
TabularResult train_tabular(const std::string& model, TabularTask task, const SampleSet& data,
                            const Splits& splits, const TabularConfig& cfg = {});

}  // namespace jamloc
