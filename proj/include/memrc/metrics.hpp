#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "memrc/common.hpp"

namespace memrc::harness {

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw InputError("metric inputs must be non-empty");
  if (a != b) throw InputError(fmt::format("metric inputs differ in length ({} vs {})", a, b));
}

inline double accuracy(std::span<const int> preds, std::span<const int> labels) {
  check_lengths(preds.size(), labels.size());
  std::size_t hit = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) hit += preds[k] == labels[k];
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

/// counts[i][j] = number of samples with true class i predicted as j.
inline std::vector<std::vector<std::size_t>> confusion(std::span<const int> preds, std::span<const int> labels,
                                                       int n_classes) {
  check_lengths(preds.size(), labels.size());
  std::vector<std::vector<std::size_t>> m(static_cast<std::size_t>(n_classes),
                                          std::vector<std::size_t>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (labels[k] < 0 || labels[k] >= n_classes || preds[k] < 0 || preds[k] >= n_classes)
      throw InputError("class index outside the confusion matrix");
    ++m[static_cast<std::size_t>(labels[k])][static_cast<std::size_t>(preds[k])];
  }
  return m;
}

inline double rmse(std::span<const double> pred, std::span<const double> target) {
  check_lengths(pred.size(), target.size());
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) s += (pred[k] - target[k]) * (pred[k] - target[k]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

/// RMSE over the population standard deviation of the target.
inline double nrmse(std::span<const double> pred, std::span<const double> target) {
  const double e = rmse(pred, target);
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double var = 0.0;
  for (double t : target) var += (t - mean) * (t - mean);
  const double sd = std::sqrt(var / static_cast<double>(target.size()));
  if (sd == 0.0) throw InputError("NRMSE undefined for a constant target");
  return e / sd;
}

/// RMSE over the target's max - min.
inline double nrmse_range(std::span<const double> pred, std::span<const double> target) {
  const double e = rmse(pred, target);
  const auto [lo, hi] = std::minmax_element(target.begin(), target.end());
  if (*hi == *lo) throw InputError("NRMSE undefined for a constant target");
  return e / (*hi - *lo);
}

inline CsvWriter confusion_csv(const std::vector<std::vector<std::size_t>>& m) {
  std::vector<std::string> header{"true_label"};
  for (std::size_t j = 0; j < m.size(); ++j) header.push_back(fmt::format("pred_{}", j));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < m.size(); ++i) {
    csv.cell(i);
    for (auto c : m[i]) csv.cell(c);
    csv.end_row();
  }
  return csv;
}

}  // namespace memrc::harness
