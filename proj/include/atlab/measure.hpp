#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "atlab/util.hpp"

namespace atlab {

// A fully enumerated probability law: canonical ascending keys, normalized
// probabilities, and the log of the normalization constant. Keys from
// different state-space descriptors never compare.
struct EnumeratedMeasure {
  std::string space;
  std::vector<uint64_t> keys;
  std::vector<double> prob;
  double log_z = -std::numeric_limits<double>::infinity();

  size_t size() const { return keys.size(); }

  double probability_of(uint64_t key) const {
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return 0.0;
    return prob[static_cast<size_t>(it - keys.begin())];
  }

  template <typename Fn>
  double expectation(Fn&& fn) const {
    KahanSum acc;
    for (size_t i = 0; i < keys.size(); ++i) acc.add(prob[i] * fn(keys[i]));
    return acc.value();
  }

  template <typename Fn>
  EnumeratedMeasure marginal(Fn&& project, const std::string& new_space) const {
    std::unordered_map<uint64_t, double> acc;
    for (size_t i = 0; i < keys.size(); ++i) acc[project(keys[i])] += prob[i];
    EnumeratedMeasure m;
    m.space = new_space;
    m.keys.reserve(acc.size());
    for (auto& [k, _] : acc) m.keys.push_back(k);
    std::sort(m.keys.begin(), m.keys.end());
    m.prob.resize(m.keys.size());
    for (size_t i = 0; i < m.keys.size(); ++i) m.prob[i] = acc[m.keys[i]];
    m.log_z = log_z;
    return m;
  }
};

inline double total_variation(const EnumeratedMeasure& a, const EnumeratedMeasure& b) {
  if (a.space != b.space) throw std::invalid_argument("total_variation: state spaces differ (" + a.space + " vs " + b.space + ")");
  KahanSum acc;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a.keys[i] < b.keys[j])) {
      acc.add(a.prob[i++]);
    } else if (i >= a.size() || b.keys[j] < a.keys[i]) {
      acc.add(b.prob[j++]);
    } else {
      acc.add(std::abs(a.prob[i++] - b.prob[j++]));
    }
  }
  return 0.5 * acc.value();
}

// Two-pass builder: collects (key, log-weight), exponentiates against the
// running max, and normalizes with compensated summation.
class MeasureBuilder {
 public:
  explicit MeasureBuilder(std::string space) : space_(std::move(space)) {}

  void add_log(uint64_t key, double log_weight) {
    if (log_weight == -std::numeric_limits<double>::infinity()) return;
    entries_.emplace_back(key, log_weight);
    max_log_ = std::max(max_log_, log_weight);
  }

  EnumeratedMeasure finish() {
    if (entries_.empty()) throw std::runtime_error("measure: no states with positive weight");
    std::sort(entries_.begin(), entries_.end());
    // Merge duplicate keys in linear space relative to the max.
    EnumeratedMeasure m;
    m.space = space_;
    KahanSum z;
    for (size_t i = 0; i < entries_.size();) {
      uint64_t k = entries_[i].first;
      KahanSum w;
      for (; i < entries_.size() && entries_[i].first == k; ++i) w.add(std::exp(entries_[i].second - max_log_));
      m.keys.push_back(k);
      m.prob.push_back(w.value());
      z.add(w.value());
    }
    double zv = z.value();
    if (!(zv > 0)) throw std::runtime_error("measure: normalization constant is not positive");
    for (double& p : m.prob) p /= zv;
    m.log_z = max_log_ + std::log(zv);
    return m;
  }

 private:
  std::string space_;
  std::vector<std::pair<uint64_t, double>> entries_;
  double max_log_ = -std::numeric_limits<double>::infinity();
};

// Dense linear-space accumulator over a contiguous key range [0, 2^bits); used
// by the hot enumeration loops where weights stay in double range (guarded by
// the callers' coupling-magnitude checks).
class DenseAccumulator {
 public:
  DenseAccumulator(std::string space, size_t n) : space_(std::move(space)), w_(n, 0.0) {}
  void add(size_t key, double weight) { w_[key] += weight; }
  double& at(size_t key) { return w_[key]; }
  size_t size() const { return w_.size(); }

  EnumeratedMeasure finish(double log_scale = 0.0) const {
    EnumeratedMeasure m;
    m.space = space_;
    KahanSum z;
    for (double x : w_) z.add(x);
    double zv = z.value();
    if (!(zv > 0) || !std::isfinite(zv)) throw std::runtime_error("measure: bad normalization (overflow or empty)");
    for (size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] != 0.0) {
        m.keys.push_back(i);
        m.prob.push_back(w_[i] / zv);
      }
    }
    m.log_z = std::log(zv) + log_scale;
    return m;
  }

 private:
  std::string space_;
  std::vector<double> w_;
};

// Empirical law from MCMC samples, comparable against enumerated laws.
struct EmpiricalCounter {
  std::string space;
  std::unordered_map<uint64_t, uint64_t> counts;
  uint64_t total = 0;

  explicit EmpiricalCounter(std::string sp) : space(std::move(sp)) {}
  void add(uint64_t key) {
    ++counts[key];
    ++total;
  }
  EnumeratedMeasure to_measure() const {
    EnumeratedMeasure m;
    m.space = space;
    m.keys.reserve(counts.size());
    for (auto& [k, _] : counts) m.keys.push_back(k);
    std::sort(m.keys.begin(), m.keys.end());
    m.prob.resize(m.keys.size());
    for (size_t i = 0; i < m.keys.size(); ++i) m.prob[i] = static_cast<double>(counts.at(m.keys[i])) / static_cast<double>(total);
    m.log_z = 0.0;
    return m;
  }
};

}  // namespace atlab
