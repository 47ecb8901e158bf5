#include "jamloc/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace jamloc {

using nlohmann::json;

// ----------------------------------------------------------- localization

std::vector<double> euclidean_errors(const Tensor<double>& preds, const Tensor<double>& truths) {
  if (preds.rank() != 2 || preds.dim(1) != 2 || preds.shape() != truths.shape())
    throw std::invalid_argument("localization metrics expect matching [N, 2] inputs");
  std::vector<double> err(preds.dim(0));
  for (int i = 0; i < preds.dim(0); ++i)
    err[i] = std::hypot(preds.at(i, 0) - truths.at(i, 0), preds.at(i, 1) - truths.at(i, 1));
  return err;
}

double percentile_linear(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile of empty data");
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * q / 100.0;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

double percentile_lower(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile of empty data");
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(std::floor((v.size() - 1) * q / 100.0))];
}

MetricsReport localization_metrics(const Tensor<double>& preds, const Tensor<double>& truths) {
  const auto err = euclidean_errors(preds, truths);
  if (err.empty()) throw std::invalid_argument("localization metrics: no samples");
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (!std::isfinite(preds[i]) || !std::isfinite(truths[i]))
      throw std::invalid_argument("localization metrics: non-finite input");
  MetricsReport r;
  const double n = static_cast<double>(err.size());
  r.n = err.size();
  r.mean_err = std::accumulate(err.begin(), err.end(), 0.0) / n;
  r.med_err = percentile_lower(err, 50.0);
  r.p90_err = percentile_linear(err, 90.0);
  r.frac_within_30cm =
      static_cast<double>(std::count_if(err.begin(), err.end(), [](double e) { return e <= 30.0; })) / n;

  double* rmse[2] = {&r.rmse_x, &r.rmse_y};
  double* mae[2] = {&r.mae_x, &r.mae_y};
  double* r2[2] = {&r.r2_x, &r.r2_y};
  for (int a = 0; a < 2; ++a) {
    double mean = 0.0;
    for (int i = 0; i < preds.dim(0); ++i) mean += truths.at(i, a);
    mean /= n;
    double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
    for (int i = 0; i < preds.dim(0); ++i) {
      const double d = preds.at(i, a) - truths.at(i, a);
      ss_res += d * d;
      abs_sum += std::abs(d);
      ss_tot += (truths.at(i, a) - mean) * (truths.at(i, a) - mean);
    }
    *rmse[a] = std::sqrt(ss_res / n);
    *mae[a] = abs_sum / n;
    if (ss_tot > 0.0) {
      *r2[a] = 1.0 - ss_res / ss_tot;
    } else if (ss_res == 0.0) {
      *r2[a] = 0.0;
    } else {
      *r2[a] = kR2Sentinel;
      r.warnings.push_back(std::string("R2 undefined on axis ") + (a ? "y" : "x") +
                           ": constant truth");
    }
  }
  return r;
}

json to_json(const MetricsReport& r) {
  return {{"rmse_x", r.rmse_x},     {"rmse_y", r.rmse_y},
          {"mae_x", r.mae_x},       {"mae_y", r.mae_y},
          {"r2_x", r.r2_x},         {"r2_y", r.r2_y},
          {"mean_err", r.mean_err}, {"med_err", r.med_err},
          {"p90_err", r.p90_err},   {"frac_within_30cm", r.frac_within_30cm},
          {"wall_time_min", r.wall_time_min}, {"n", r.n},
          {"warnings", r.warnings}};
}

// ---------------------------------------------------------- classification

ClassificationReport classification_metrics(const std::vector<int>& pred,
                                            const std::vector<int>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("classification metrics: size mismatch or empty");
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(pred.begin(), pred.end());
  ClassificationReport r;
  r.n = pred.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  r.accuracy = static_cast<double>(correct) / r.n;
  double f1_sum = 0, f1_w = 0, p_sum = 0, rec_sum = 0;
  for (int c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      tp += pred[i] == c && truth[i] == c;
      fp += pred[i] == c && truth[i] != c;
      fn += pred[i] != c && truth[i] == c;
      support += truth[i] == c;
    }
    const double p = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double rc = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
    f1_sum += f1;
    p_sum += p;
    rec_sum += rc;
    f1_w += f1 * support;
  }
  const double k = static_cast<double>(classes.size());
  r.f1_macro = f1_sum / k;
  r.precision_macro = p_sum / k;
  r.recall_macro = rec_sum / k;
  r.f1_weighted = f1_w / r.n;
  return r;
}

json to_json(const ClassificationReport& r) {
  return {{"accuracy", r.accuracy},           {"f1_macro", r.f1_macro},
          {"f1_weighted", r.f1_weighted},     {"precision", r.precision_macro},
          {"recall", r.recall_macro},         {"wall_time_min", r.wall_time_min},
          {"n", r.n}};
}

double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (i + 1 + j) / 2.0;  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t)
      if (labels[idx[t]] > 0.5) rank_sum += avg_rank;
    i = j;
  }
  for (double l : labels) (l > 0.5 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc_auc needs both classes");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

// ------------------------------------------------------------------- shift

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty column");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Integrate |F_a - F_b| over the merged support.
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double x = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) next = a[i];
    else next = b[j];
    total += std::abs(i / na - j / nb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
  }
  return total;
}

EmdReport per_tap_emd(const Tensor<double>& source, const Tensor<double>& target) {
  if (source.rank() != 2 || target.rank() != 2 || source.dim(1) != target.dim(1))
    throw std::invalid_argument("per_tap_emd: column counts differ");
  if (source.dim(0) == 0 || target.dim(0) == 0)
    throw std::invalid_argument("per_tap_emd: empty columns");
  const int t = source.dim(1);
  EmdReport r;
  r.emd.resize(t);
  r.mean_shift.resize(t);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < t; ++c) {
    std::vector<double> a(source.dim(0)), b(target.dim(0));
    for (int i = 0; i < source.dim(0); ++i) a[i] = source.at(i, c);
    for (int i = 0; i < target.dim(0); ++i) b[i] = target.at(i, c);
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    r.mean_shift[c] = std::abs(ma - mb);
    r.emd[c] = wasserstein1(std::move(a), std::move(b));
  }
  for (int c = 0; c < t; ++c)
    if (r.emd[c] >= kEmdFlagThreshold || r.mean_shift[c] >= kEmdFlagThreshold)
      r.flagged.push_back(c);
  return r;
}

// -------------------------------------------------------------- importance

std::vector<int> equal_frequency_bins(const std::vector<double>& v, int bins) {
  if (bins < 1) throw std::invalid_argument("bins must be positive");
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<int> out(n);
  std::size_t first = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == 0 || v[idx[r]] != v[idx[r - 1]]) first = r;
    out[idx[r]] = static_cast<int>(first * bins / n);
  }
  return out;
}

double mutual_info(const std::vector<double>& feature, const std::vector<double>& target,
                   int bins) {
  if (feature.size() != target.size()) throw std::invalid_argument("mutual_info: size mismatch");
  if (feature.size() < static_cast<std::size_t>(4 * bins))
    throw std::invalid_argument("mutual_info needs at least 4 samples per bin");
  const auto bx = equal_frequency_bins(feature, bins);
  const auto by = equal_frequency_bins(target, bins);
  const double n = feature.size();
  std::vector<double> joint(bins * bins, 0.0), px(bins, 0.0), py(bins, 0.0);
  for (std::size_t i = 0; i < feature.size(); ++i) {
    joint[bx[i] * bins + by[i]] += 1.0;
    px[bx[i]] += 1.0;
    py[by[i]] += 1.0;
  }
  double mi = 0.0;
  for (int a = 0; a < bins; ++a)
    for (int b = 0; b < bins; ++b) {
      const double c = joint[a * bins + b];
      if (c > 0) mi += c / n * std::log(c * n / (px[a] * py[b]));
    }
  return std::max(0.0, mi);
}

double eta_squared(const std::vector<double>& values, const std::vector<int>& groups) {
  if (values.size() != groups.size() || values.empty())
    throw std::invalid_argument("eta_squared: size mismatch");
  std::map<int, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sums[groups[i]].first += values[i];
    sums[groups[i]].second += 1;
  }
  if (sums.size() < 2) throw std::invalid_argument("eta_squared needs at least two groups");
  const double grand = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss_tot = 0.0, ss_b = 0.0;
  for (double v : values) ss_tot += (v - grand) * (v - grand);
  for (const auto& [g, s] : sums) {
    const double m = s.first / s.second;
    ss_b += s.second * (m - grand) * (m - grand);
  }
  if (ss_tot <= 0.0) return 0.0;
  return std::clamp(ss_b / ss_tot, 0.0, 1.0);
}

std::vector<std::pair<std::string, double>> rank_aggregate(
    const std::map<std::string, std::map<std::string, double>>& tables) {
  if (tables.empty()) throw std::invalid_argument("rank_aggregate: no measures");
  std::set<std::string> features;
  for (const auto& [f, _] : tables.begin()->second) features.insert(f);
  std::map<std::string, double> total;
  for (const auto& [measure, scores] : tables) {
    std::set<std::string> here;
    for (const auto& [f, _] : scores) here.insert(f);
    if (here != features)
      throw std::invalid_argument("rank_aggregate: measure '" + measure +
                                  "' covers a different feature set");
    std::vector<std::pair<std::string, double>> v(scores.begin(), scores.end());
    std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < v.size();) {
      std::size_t j = i;
      while (j < v.size() && v[j].second == v[i].second) ++j;
      const double avg = (i + 1 + j) / 2.0;
      for (std::size_t t = i; t < j; ++t) total[v[t].first] += avg;
      i = j;
    }
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [f, s] : total) out.emplace_back(f, s / tables.size());
  std::stable_sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.second < b.second; });
  return out;
}

// ------------------------------------------------------------------- probe

namespace {

double sq_dist(const Tensor<double>& p, int i, const Tensor<double>& c, int j) {
  double d = 0.0;
  for (int k = 0; k < p.dim(1); ++k) {
    const double t = p.at(i, k) - c.at(j, k);
    d += t * t;
  }
  return d;
}

KMeansResult kmeans_once(const Tensor<double>& pts, int k, std::mt19937_64& rng, int max_iter) {
  const int n = pts.dim(0), d = pts.dim(1);
  Tensor<double> cent({k, d});
  std::uniform_int_distribution<int> pick(0, n - 1);
  const int first = pick(rng);
  for (int c = 0; c < d; ++c) cent.at(0, c) = pts.at(first, c);
  std::vector<double> dmin(n, std::numeric_limits<double>::infinity());
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      dmin[i] = std::min(dmin[i], sq_dist(pts, i, cent, j - 1));
      total += dmin[i];
    }
    int chosen = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        r -= dmin[chosen];
        if (r <= 0) break;
      }
    }
    for (int c = 0; c < d; ++c) cent.at(j, c) = pts.at(chosen, c);
  }

  KMeansResult res;
  res.labels.assign(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(pts, i, cent, 0);
      for (int j = 1; j < k; ++j) {
        const double dj = sq_dist(pts, i, cent, j);
        if (dj < bd) bd = dj, best = j;
      }
      changed = changed || res.labels[i] != best;
      res.labels[i] = best;
    }
    Tensor<double> next({k, d});
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      ++count[res.labels[i]];
      for (int c = 0; c < d; ++c) next.at(res.labels[i], c) += pts.at(i, c);
    }
    bool empty = false;
    for (int j = 0; j < k; ++j) {
      if (count[j] == 0) {
        empty = true;
        continue;
      }
      for (int c = 0; c < d; ++c) next.at(j, c) /= count[j];
    }
    if (empty) {
      res.inertia = std::numeric_limits<double>::infinity();
      return res;  // degenerate: caller restarts
    }
    cent = next;
    if (!changed && it > 0) break;
  }
  res.centroids = cent;
  for (int i = 0; i < n; ++i) res.inertia += sq_dist(pts, i, cent, res.labels[i]);
  return res;
}

}  // namespace

KMeansResult kmeans(const Tensor<double>& pts, int k, std::uint64_t seed, int restarts,
                    int max_iter) {
  if (pts.rank() != 2 || k < 1) throw std::invalid_argument("kmeans: bad input");
  std::set<std::vector<double>> distinct;
  for (int i = 0; i < pts.dim(0); ++i)
    distinct.insert(std::vector<double>(pts.data() + i * pts.dim(1),
                                        pts.data() + (i + 1) * pts.dim(1)));
  if (static_cast<int>(distinct.size()) < k)
    throw std::invalid_argument("kmeans: fewer than k distinct points");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  int attempts = 0;
  for (int r = 0; r < restarts || (std::isinf(best.inertia) && attempts < 100 * restarts);
       ++r, ++attempts) {
    KMeansResult cur = kmeans_once(pts, k, rng, max_iter);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  if (std::isinf(best.inertia)) throw std::runtime_error("kmeans: every restart degenerated");
  return best;
}

void SoftmaxRegression::fit(const Tensor<double>& x, const std::vector<int>& y) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int n = x.dim(0), d = x.dim(1);
  if (static_cast<int>(y.size()) != n || n == 0) throw std::invalid_argument("softmax: bad data");
  dim_ = d;
  mean_.assign(d, 0.0);
  scale_.assign(d, 0.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) mean_[c] += x.at(i, c) / n;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) scale_[c] += (x.at(i, c) - mean_[c]) * (x.at(i, c) - mean_[c]) / n;
  for (auto& s : scale_) s = s > 1e-12 ? 1.0 / std::sqrt(s) : 0.0;

  Mat xs(n, d + 1);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) xs(i, c) = (x.at(i, c) - mean_[c]) * scale_[c];
    xs(i, d) = 1.0;
  }
  Mat onehot = Mat::Zero(n, classes_);
  for (int i = 0; i < n; ++i) onehot(i, y[i]) = 1.0;

  Mat w = Mat::Zero(d + 1, classes_), m = w, v = w;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= iterations_; ++t) {
    Mat z = xs * w;
    for (int i = 0; i < n; ++i) {
      const double mx = z.row(i).maxCoeff();
      z.row(i) = (z.row(i).array() - mx).exp().matrix();
      z.row(i) /= z.row(i).sum();
    }
    Mat g = xs.transpose() * (z - onehot) / n;
    g.topRows(d) += l2_ * w.topRows(d);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseProduct(g);
    const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
    w.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
  w_.assign(w.data(), w.data() + w.size());
}

Tensor<double> SoftmaxRegression::predict_proba(const Tensor<double>& x) const {
  if (x.dim(1) != dim_) throw std::invalid_argument("softmax: feature width mismatch");
  const int n = x.dim(0);
  Tensor<double> p({n, classes_});
  std::vector<double> feat(dim_ + 1);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < dim_; ++c) feat[c] = (x.at(i, c) - mean_[c]) * scale_[c];
    feat[dim_] = 1.0;
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < classes_; ++k) {
      double z = 0.0;
      for (int c = 0; c <= dim_; ++c) z += feat[c] * w_[c * classes_ + k];
      p.at(i, k) = z;
      mx = std::max(mx, z);
    }
    double s = 0.0;
    for (int k = 0; k < classes_; ++k) s += (p.at(i, k) = std::exp(p.at(i, k) - mx));
    for (int k = 0; k < classes_; ++k) p.at(i, k) /= s;
  }
  return p;
}

std::vector<int> SoftmaxRegression::predict(const Tensor<double>& x) const {
  const Tensor<double> p = predict_proba(x);
  std::vector<int> out(p.dim(0));
  for (int i = 0; i < p.dim(0); ++i) {
    int best = 0;
    for (int k = 1; k < classes_; ++k)
      if (p.at(i, k) > p.at(i, best)) best = k;
    out[i] = best;
  }
  return out;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least two folds");
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<int> fold(labels.size());
  int offset = 0;
  for (auto& [c, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j)
      fold[idx[j]] = static_cast<int>((j + offset) % folds);
    offset = static_cast<int>((offset + idx.size()) % folds);
  }
  return fold;
}

double macro_ovr_auc(const Tensor<double>& proba, const std::vector<int>& truth) {
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < proba.dim(1); ++k) {
    std::vector<double> s(truth.size()), l(truth.size());
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      s[i] = proba.at(static_cast<int>(i), k);
      l[i] = truth[i] == k;
      (truth[i] == k ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    sum += roc_auc(s, l);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("macro AUC needs at least two classes");
  return sum / used;
}

ProbeResult zone_probe(const Tensor<double>& emb, const Tensor<double>& coords, int k, int folds,
                       std::uint64_t seed) {
  if (emb.rank() != 2 || coords.rank() != 2 || emb.dim(0) != coords.dim(0))
    throw std::invalid_argument("zone_probe: embeddings and coordinates differ in length");
  const int n = emb.dim(0);
  if (n < k * folds) throw std::invalid_argument("zone_probe: need at least k * folds samples");
  KMeansResult km = kmeans(coords, k, seed, 10);

  ProbeResult r;
  r.zones = km.labels;
  r.centroids = km.centroids;
  std::vector<int> count(k, 0);
  for (int z : r.zones) ++count[z];
  r.majority_prior = static_cast<double>(*std::max_element(count.begin(), count.end())) / n;

  const auto fold = stratified_folds(r.zones, folds, seed + 1);
  Tensor<double> proba({n, k});
  std::vector<int> pred(n);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (int i = 0; i < n; ++i) (fold[i] == f ? te : tr).push_back(i);
    if (te.empty()) continue;
    auto gather = [&](const std::vector<std::size_t>& rows) {
      Tensor<double> out({static_cast<int>(rows.size()), emb.dim(1)});
      for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(emb.data() + rows[i] * emb.dim(1), emb.dim(1), out.data() + i * emb.dim(1));
      return out;
    };
    std::vector<int> ytr;
    for (auto i : tr) ytr.push_back(r.zones[i]);
    SoftmaxRegression clf(k);
    clf.fit(gather(tr), ytr);
    const Tensor<double> p = clf.predict_proba(gather(te));
    for (std::size_t i = 0; i < te.size(); ++i) {
      int best = 0;
      for (int c = 0; c < k; ++c) {
        proba.at(static_cast<int>(te[i]), c) = p.at(static_cast<int>(i), c);
        if (p.at(static_cast<int>(i), c) > p.at(static_cast<int>(i), best)) best = c;
      }
      pred[te[i]] = best;
    }
  }
  int correct = 0;
  for (int i = 0; i < n; ++i) correct += pred[i] == r.zones[i];
  r.accuracy = static_cast<double>(correct) / n;
  r.roc_auc_ovr = macro_ovr_auc(proba, r.zones);
  return r;
}

}  // namespace jamloc
