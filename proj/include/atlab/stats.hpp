#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "atlab/rng.hpp"
#include "atlab/util.hpp"

namespace atlab {

struct BatchStats {
  double mean = 0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  int batches = 0;
};

// Batch-means error bars; no error bar below 16 batches.
inline BatchStats batch_means(const std::vector<double>& series, int nb = 16) {
  BatchStats s;
  if (series.empty()) return s;
  KahanSum total;
  for (double v : series) total.add(v);
  s.mean = total.value() / static_cast<double>(series.size());
  size_t len = series.size() / static_cast<size_t>(nb);
  if (len == 0) return s;
  std::vector<double> bm(nb);
  for (int b = 0; b < nb; ++b) {
    KahanSum acc;
    for (size_t i = 0; i < len; ++i) acc.add(series[b * len + i]);
    bm[b] = acc.value() / static_cast<double>(len);
  }
  double mean_bm = 0;
  for (double v : bm) mean_bm += v;
  mean_bm /= nb;
  double var = 0;
  for (double v : bm) var += (v - mean_bm) * (v - mean_bm);
  var /= (nb - 1);
  s.batches = nb;
  s.stderr_ = std::sqrt(var / nb);
  return s;
}

// Batched estimate of the variance of a series (per-batch sample variances,
// averaged with an error bar).
inline BatchStats batch_variance(const std::vector<double>& series, int nb = 16) {
  BatchStats s;
  size_t len = series.size() / static_cast<size_t>(nb);
  if (len < 2) return s;
  std::vector<double> bv(nb);
  for (int b = 0; b < nb; ++b) {
    double m = 0;
    for (size_t i = 0; i < len; ++i) m += series[b * len + i];
    m /= static_cast<double>(len);
    double v = 0;
    for (size_t i = 0; i < len; ++i) v += (series[b * len + i] - m) * (series[b * len + i] - m);
    bv[b] = v / static_cast<double>(len - 1);
  }
  double mean_bv = 0;
  for (double v : bv) mean_bv += v;
  mean_bv /= nb;
  double var = 0;
  for (double v : bv) var += (v - mean_bv) * (v - mean_bv);
  var /= (nb - 1);
  s.mean = mean_bv;
  s.stderr_ = std::sqrt(var / nb);
  s.batches = nb;
  return s;
}

// First upward grid crossing of a threshold, linearly interpolated. NaN if the
// curve never crosses.
inline double crossing_estimate(const std::vector<double>& xs, const std::vector<double>& ys, double threshold) {
  for (size_t i = 1; i < xs.size(); ++i) {
    if ((ys[i - 1] < threshold) != (ys[i] < threshold)) {
      double t = (threshold - ys[i - 1]) / (ys[i] - ys[i - 1]);
      return xs[i - 1] + t * (xs[i] - xs[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct CrossingCI {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
};

// Parametric bootstrap over the per-point error bars (Gaussian replicas),
// percentile 2.5/97.5 interval; deterministic from the seed.
inline CrossingCI bootstrap_crossing(const std::vector<double>& xs, const std::vector<double>& ys,
                                     const std::vector<double>& errs, double threshold, uint64_t seed,
                                     int replicas = 400) {
  CrossingCI ci;
  ci.estimate = crossing_estimate(xs, ys, threshold);
  std::vector<double> cr;
  std::vector<double> rep(ys.size());
  for (int b = 0; b < replicas; ++b) {
    for (size_t i = 0; i < ys.size(); ++i) {
      double u1 = rng::uniform(seed, rng::kBootstrap, b, i, 0);
      double u2 = rng::uniform(seed, rng::kBootstrap, b, i, 1);
      double g = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300))) * std::cos(6.283185307179586 * u2);
      double e = std::isnan(errs[i]) ? 0.0 : errs[i];
      rep[i] = ys[i] + e * g;
    }
    double c = crossing_estimate(xs, rep, threshold);
    if (!std::isnan(c)) cr.push_back(c);
  }
  if (cr.size() >= 20) {
    std::sort(cr.begin(), cr.end());
    ci.lo = cr[static_cast<size_t>(0.025 * (cr.size() - 1))];
    ci.hi = cr[static_cast<size_t>(0.975 * (cr.size() - 1))];
  }
  return ci;
}

// Named time series with batch-means error bars.
struct ObservableSeries {
  std::map<std::string, std::vector<double>> series;
  void add(const std::string& name, double v) { series[name].push_back(v); }
  void append(const ObservableSeries& other) {
    for (auto& [k, v] : other.series) {
      auto& dst = series[k];
      dst.insert(dst.end(), v.begin(), v.end());
    }
  }
  BatchStats stats(const std::string& name, int nb = 16) const {
    auto it = series.find(name);
    if (it == series.end()) throw std::invalid_argument("observable series: unknown name " + name);
    return batch_means(it->second, nb);
  }
  BatchStats variance_stats(const std::string& name, int nb = 16) const {
    auto it = series.find(name);
    if (it == series.end()) throw std::invalid_argument("observable series: unknown name " + name);
    return batch_variance(it->second, nb);
  }
};

}  // namespace atlab
