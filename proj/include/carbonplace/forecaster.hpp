#pragma once

#include <string>
#include <vector>

#include "carbonplace/common.hpp"

namespace carbonplace {

constexpr std::size_t kLags = 12;

// Traffic on the 5-min grid; values[i] is the rate at start + i * 5 min.
struct TrafficTrace {
  Timestamp start = 0;
  std::vector<double> values;

  Timestamp time_at(std::size_t i) const { return start + static_cast<Timestamp>(i) * kTick; }
  Timestamp end() const { return time_at(values.size()); }
  // Index of the sample at t; throws outside the trace or off-grid.
  std::size_t index_at(Timestamp t) const;
};

TrafficTrace parse_traffic_csv(const std::string& text);
TrafficTrace load_traffic(const std::string& path);
std::string traffic_to_csv(const TrafficTrace& trace);

struct GbdtConfig {
  int n_trees = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  bool calendar_features = true;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;  // leaf output, already scaled by the learning rate
  int left = -1;
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const double* x) const;
  int depth() const;
};

struct GbdtModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  int max_depth = 4;
  int n_trees = 0;
  double base_prediction = 0.0;
  bool calendar_features = true;

  double predict_one(const std::vector<double>& features) const;
};

// lags ordered oldest first; `target` is the timestamp being predicted.
std::vector<double> make_features(const double* lags, Timestamp target, bool calendar);

GbdtModel train(const TrafficTrace& trace, const GbdtConfig& config = {});
double training_mse(const GbdtModel& model, const TrafficTrace& trace);

// `last` is the timestamp of the newest history value.
std::vector<double> predict_window(const GbdtModel& model, const std::vector<double>& history, Timestamp last);
double hour_estimate(const std::vector<double>& window);
std::vector<double> naive_persistence(const std::vector<double>& history);
// Recursive mean of the trailing 12 values.
std::vector<double> lag_mean_forecast(const std::vector<double>& history);

struct ForecastScore {
  std::string model;
  double mae = 0.0;
  double mean_inference_us = 0.0;
  std::size_t windows = 0;
};

// Trains on the first `train_fraction` of the trace and scores 12-step
// windows started at every held-out position.
std::vector<ForecastScore> evaluate_forecasters(const TrafficTrace& trace, double train_fraction,
                                                const GbdtConfig& config = {});

}  // namespace carbonplace
