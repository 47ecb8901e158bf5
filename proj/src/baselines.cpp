#include "jamloc/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "jamloc/models.hpp"
#include "jamloc/optim.hpp"

namespace jamloc {

std::string to_string(TabularTask t) { return t == TabularTask::classify ? "classify" : "regress"; }

TabularTask tabular_task_from_string(const std::string& s) {
  if (s == "classify") return TabularTask::classify;
  if (s == "regress") return TabularTask::regress;
  throw std::invalid_argument("unknown task '" + s + "'");
}

// --------------------------------------------------------------------- KNN

namespace {

// Indices of the k nearest training rows for every query row.
std::vector<std::vector<int>> neighbours(const Tensor<double>& train, const Tensor<double>& query,
                                         int k) {
  if (train.rank() != 2 || query.rank() != 2 || train.dim(1) != query.dim(1))
    throw std::invalid_argument("knn: feature widths differ");
  const int n = train.dim(0), d = train.dim(1), q = query.dim(0);
  if (k < 1) throw std::invalid_argument("knn: k must be at least 1");
  if (k > n) throw std::invalid_argument("knn: k exceeds the number of training rows");
  std::vector<std::vector<int>> out(q);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < q; ++i) {
    std::vector<std::pair<double, int>> dist(n);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = query.at(i, c) - train.at(j, c);
        s += t * t;
      }
      dist[j] = {s, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    out[i].resize(k);
    for (int j = 0; j < k; ++j) out[i][j] = dist[j].second;
  }
  return out;
}

}  // namespace

std::vector<int> knn_classify(const Tensor<double>& train_x, const std::vector<int>& train_y,
                              const Tensor<double>& query_x, int k) {
  if (static_cast<int>(train_y.size()) != train_x.dim(0))
    throw std::invalid_argument("knn: label count differs from rows");
  const auto nb = neighbours(train_x, query_x, k);
  std::vector<int> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    std::map<int, int> votes;
    for (int j : nb[i]) ++votes[train_y[j]];
    int best = votes.begin()->first, best_n = 0;
    for (const auto& [c, v] : votes)
      if (v > best_n) best = c, best_n = v;  // map order: smallest id wins ties
    out[i] = best;
  }
  return out;
}

Tensor<double> knn_regress(const Tensor<double>& train_x, const Tensor<double>& train_y,
                           const Tensor<double>& query_x, int k) {
  if (train_y.rank() != 2 || train_y.dim(0) != train_x.dim(0))
    throw std::invalid_argument("knn: target rows differ from feature rows");
  const auto nb = neighbours(train_x, query_x, k);
  const int m = train_y.dim(1);
  Tensor<double> out({static_cast<int>(nb.size()), m});
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (int j : nb[i])
      for (int c = 0; c < m; ++c) out.at(static_cast<int>(i), c) += train_y.at(j, c);
    for (int c = 0; c < m; ++c) out.at(static_cast<int>(i), c) /= k;
  }
  return out;
}

void KnnModel::fit(const Tensor<double>& x, const Tensor<double>& y) {
  x_ = x;
  y_ = y;
}

Tensor<double> KnnModel::predict(const Tensor<double>& x) const {
  if (task_ == TabularTask::regress) return knn_regress(x_, y_, x, k_);
  std::vector<int> labels(y_.dim(0));
  for (int i = 0; i < y_.dim(0); ++i) labels[i] = static_cast<int>(y_.at(i, 0));
  const auto pred = knn_classify(x_, labels, x, k_);
  Tensor<double> out({static_cast<int>(pred.size()), 1});
  for (std::size_t i = 0; i < pred.size(); ++i) out[i] = pred[i];
  return out;
}

// ---------------------------------------------------------------- SimpleNN

struct SimpleNNModel::Impl {
  nn::SimpleNN<double> net;
};

SimpleNNModel::SimpleNNModel(TabularTask task, SimpleNNConfig cfg) : task_(task), cfg_(cfg) {}
SimpleNNModel::~SimpleNNModel() = default;

void SimpleNNModel::fit(const Tensor<double>& x, const Tensor<double>& y) {
  const int n = x.dim(0);
  if (n == 0 || y.dim(0) != n) throw std::invalid_argument("simplenn: bad training data");
  int out_dim;
  if (task_ == TabularTask::classify) {
    classes_ = 0;
    for (int i = 0; i < n; ++i) classes_ = std::max(classes_, static_cast<int>(y.at(i, 0)) + 1);
    out_dim = classes_;
  } else {
    out_dim = y.dim(1);
    // Regression targets are standardised internally.
    y_mean_.assign(out_dim, 0.0);
    y_scale_.assign(out_dim, 0.0);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < out_dim; ++c) y_mean_[c] += y.at(i, c) / n;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < out_dim; ++c)
        y_scale_[c] += (y.at(i, c) - y_mean_[c]) * (y.at(i, c) - y_mean_[c]) / n;
    for (auto& s : y_scale_) s = std::sqrt(std::max(s, 1e-12));
  }
  impl_ = std::make_unique<Impl>(Impl{nn::SimpleNN<double>(x.dim(1), cfg_.width, cfg_.blocks,
                                                            out_dim, cfg_.seed)});
  auto& net = impl_->net;
  nn::Adam<double> opt;
  opt.add_group(net.parameters(), cfg_.lr);
  std::mt19937_64 rng(cfg_.seed + 1);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  losses_.clear();
  const int d = x.dim(1);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (int b = 0; b < n; b += cfg_.batch_size) {
      const int e = std::min(n, b + cfg_.batch_size), m = e - b;
      Tensor<double> xb({m, d});
      for (int i = 0; i < m; ++i)
        std::copy_n(x.data() + static_cast<std::size_t>(order[b + i]) * d, d, xb.data() + i * d);
      opt.zero_grad();
      Tensor<double> out = net.forward(xb);
      Tensor<double> grad(out.shape());
      double loss = 0.0;
      if (task_ == TabularTask::classify) {
        for (int i = 0; i < m; ++i) {
          const int label = static_cast<int>(y.at(order[b + i], 0));
          double mx = out.at(i, 0);
          for (int c = 1; c < out_dim; ++c) mx = std::max(mx, out.at(i, c));
          double s = 0.0;
          for (int c = 0; c < out_dim; ++c) s += std::exp(out.at(i, c) - mx);
          for (int c = 0; c < out_dim; ++c) {
            const double p = std::exp(out.at(i, c) - mx) / s;
            grad.at(i, c) = (p - (c == label)) / m;
          }
          loss -= out.at(i, label) - mx - std::log(s);
        }
      } else {
        for (int i = 0; i < m; ++i)
          for (int c = 0; c < out_dim; ++c) {
            const double t = (y.at(order[b + i], c) - y_mean_[c]) / y_scale_[c];
            const double diff = out.at(i, c) - t;
            loss += diff * diff;
            grad.at(i, c) = 2.0 * diff / m;
          }
      }
      net.backward(grad);
      opt.step();
      total += loss;
    }
    losses_.push_back(total / n);
  }
}

Tensor<double> SimpleNNModel::predict(const Tensor<double>& x) const {
  if (!impl_) throw std::logic_error("simplenn: predict before fit");
  Tensor<double> out = impl_->net.forward(x);
  if (task_ == TabularTask::regress) {
    for (int i = 0; i < out.dim(0); ++i)
      for (int c = 0; c < out.dim(1); ++c) out.at(i, c) = out.at(i, c) * y_scale_[c] + y_mean_[c];
    return out;
  }
  Tensor<double> labels({out.dim(0), 1});
  for (int i = 0; i < out.dim(0); ++i) {
    int best = 0;
    for (int c = 1; c < out.dim(1); ++c)
      if (out.at(i, c) > out.at(i, best)) best = c;
    labels[i] = best;
  }
  return labels;
}

// --------------------------------------------------------------- registry

namespace {
std::map<std::string, AdapterFactory>& registry() {
  static std::map<std::string, AdapterFactory> r;
  return r;
}
}  // namespace

void register_external_model(const std::string& tag, AdapterFactory factory) {
  registry()[tag] = std::move(factory);
}

bool has_external_model(const std::string& tag) { return registry().count(tag) > 0; }

// ---------------------------------------------------------- train_tabular

TabularResult train_tabular(const std::string& model, TabularTask task, const SampleSet& data,
                            const Splits& splits, const TabularConfig& cfg) {
  if (splits.train.empty() || splits.test.empty())
    throw std::invalid_argument("train_tabular: empty train or test split");
  TabularResult res;
  if (model == "knn") res.model = std::make_unique<KnnModel>(task, cfg.knn_k);
  else if (model == "simplenn") res.model = std::make_unique<SimpleNNModel>(task, cfg.simplenn);
  else if (has_external_model(model)) res.model = registry()[model](task);
  else throw std::invalid_argument("unknown model tag '" + model + "'");

  const Tensor<double> train_raw = diagnostics_matrix(data, splits.train);
  res.scaler = fit_scaler(train_raw, FitScope::source_train_only);
  const Tensor<double> x_train = apply_scaler(res.scaler, train_raw);
  const Tensor<double> x_test = apply_scaler(res.scaler, diagnostics_matrix(data, splits.test));

  auto targets = [&](const std::vector<std::size_t>& rows) {
    if (task == TabularTask::regress) {
      Tensor<double> y({static_cast<int>(rows.size()), 2});
      for (std::size_t i = 0; i < rows.size(); ++i) {
        y.at(static_cast<int>(i), 0) = data.samples[rows[i]].x_cm;
        y.at(static_cast<int>(i), 1) = data.samples[rows[i]].y_cm;
      }
      return y;
    }
    Tensor<double> y({static_cast<int>(rows.size()), 1});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int pos = data.samples[rows[i]].position_id;
      auto it = res.class_of_position.find(pos);
      y[i] = it == res.class_of_position.end() ? -1 : it->second;
    }
    return y;
  };
  if (task == TabularTask::classify) {
    for (const auto& s : data.samples) res.class_of_position.emplace(s.position_id, 0);
    int next = 0;
    for (auto& [pos, id] : res.class_of_position) id = next++;
  }

  const auto t0 = std::chrono::steady_clock::now();
  res.model->fit(x_train, targets(splits.train));
  const Tensor<double> pred = res.model->predict(x_test);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  const Tensor<double> truth = targets(splits.test);

  if (task == TabularTask::classify) {
    std::vector<int> p(pred.dim(0)), t(truth.dim(0));
    for (int i = 0; i < pred.dim(0); ++i) p[i] = static_cast<int>(pred[i]), t[i] = static_cast<int>(truth[i]);
    ClassificationReport r = classification_metrics(p, t);
    r.wall_time_min = minutes;
    res.report = to_json(r);
  } else {
    MetricsReport r = localization_metrics(pred, truth);
    r.wall_time_min = minutes;
    res.report = to_json(r);
  }
  res.report["model"] = res.model->name();
  res.report["task"] = to_string(task);
  return res;
}

}  // namespace jamloc
