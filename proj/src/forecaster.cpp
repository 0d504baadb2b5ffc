#include "carbonplace/forecaster.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "carbonplace/infra.hpp"

namespace carbonplace {

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct Dataset {
  std::vector<std::vector<double>> x;  // x[feature][row]
  std::vector<double> y;
};

Dataset make_dataset(const TrafficTrace& trace, bool calendar) {
  Dataset d;
  std::size_t n = trace.values.size();
  for (std::size_t i = kLags; i < n; ++i) {
    auto f = make_features(&trace.values[i - kLags], trace.time_at(i), calendar);
    if (d.x.empty()) d.x.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) d.x[k].push_back(f[k]);
    d.y.push_back(trace.values[i]);
  }
  return d;
}

struct SplitScan {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  double left_sum = 0.0, left_n = 0.0;  // running state during a feature sweep
  double last_value = 0.0;
  bool seen = false;
};

// Level-wise exact greedy tree on residuals, using presorted feature columns.
RegressionTree fit_tree(const Dataset& d, const std::vector<std::vector<std::uint32_t>>& order,
                        const std::vector<double>& residual, const GbdtConfig& cfg) {
  RegressionTree tree;
  std::size_t rows = residual.size();
  std::vector<int> node_of(rows, 0);
  std::vector<double> sum(1, std::accumulate(residual.begin(), residual.end(), 0.0));
  std::vector<double> cnt(1, static_cast<double>(rows));
  tree.nodes.push_back({});
  std::vector<int> frontier{0};
  double min_leaf = cfg.min_samples_leaf;

  for (int depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) slot[static_cast<std::size_t>(frontier[k])] = static_cast<int>(k);
    std::vector<SplitScan> best(frontier.size());
    for (std::size_t f = 0; f < d.x.size(); ++f) {
      std::vector<SplitScan> run(frontier.size());
      const auto& col = d.x[f];
      for (std::uint32_t i : order[f]) {
        int s = slot[static_cast<std::size_t>(node_of[i])];
        if (s < 0) continue;
        auto& st = run[static_cast<std::size_t>(s)];
        double v = col[i];
        if (st.seen && v > st.last_value) {
          int node = frontier[static_cast<std::size_t>(s)];
          double n = cnt[static_cast<std::size_t>(node)], total = sum[static_cast<std::size_t>(node)];
          double rn = n - st.left_n;
          if (st.left_n >= min_leaf && rn >= min_leaf) {
            double rs = total - st.left_sum;
            double g = st.left_sum * st.left_sum / st.left_n + rs * rs / rn - total * total / n;
            auto& b = best[static_cast<std::size_t>(s)];
            if (g > b.gain + 1e-12) {
              b.gain = g;
              b.feature = static_cast<int>(f);
              b.threshold = 0.5 * (st.last_value + v);
            }
          }
        }
        st.seen = true;
        st.last_value = v;
        st.left_sum += residual[i];
        st.left_n += 1.0;
      }
    }
    std::vector<int> next;
    std::vector<int> left_of(tree.nodes.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (best[k].feature < 0) continue;
      int node = frontier[k];
      int l = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      sum.resize(tree.nodes.size(), 0.0);
      cnt.resize(tree.nodes.size(), 0.0);
      auto& nd = tree.nodes[static_cast<std::size_t>(node)];
      nd.feature = best[k].feature;
      nd.threshold = best[k].threshold;
      nd.left = l;
      nd.right = l + 1;
      left_of.resize(tree.nodes.size(), -1);
      left_of[static_cast<std::size_t>(node)] = l;
      next.push_back(l);
      next.push_back(l + 1);
    }
    if (next.empty()) break;
    for (std::size_t i = 0; i < rows; ++i) {
      auto node = static_cast<std::size_t>(node_of[i]);
      if (node >= left_of.size() || left_of[node] < 0) continue;
      const auto& nd = tree.nodes[node];
      int child = d.x[static_cast<std::size_t>(nd.feature)][i] < nd.threshold ? nd.left : nd.right;
      node_of[i] = child;
      sum[static_cast<std::size_t>(child)] += residual[i];
      cnt[static_cast<std::size_t>(child)] += 1.0;
    }
    frontier = std::move(next);
  }
  for (std::size_t k = 0; k < tree.nodes.size(); ++k)
    if (tree.nodes[k].feature < 0 && cnt[k] > 0) tree.nodes[k].value = cfg.learning_rate * sum[k] / cnt[k];
  return tree;
}

}  // namespace

std::size_t TrafficTrace::index_at(Timestamp t) const {
  if (t < start || t >= end() || (t - start) % kTick != 0)
    throw ValidationError("timestamp " + format_timestamp(t) + " not on traffic trace grid");
  return static_cast<std::size_t>((t - start) / kTick);
}

TrafficTrace parse_traffic_csv(const std::string& text) {
  TrafficTrace tr;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  Timestamp prev = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f[0] == "timestamp") continue;
    if (f.size() != 2) throw ValidationError("traffic.csv line " + std::to_string(lineno) + ": expected 2 fields");
    Timestamp t = parse_timestamp(f[0]);
    double v = 0.0;
    auto res = std::from_chars(f[1].data(), f[1].data() + f[1].size(), v);
    if (res.ec != std::errc() || res.ptr != f[1].data() + f[1].size() || v < 0 || !std::isfinite(v))
      throw ValidationError("traffic.csv line " + std::to_string(lineno) + ": bad rate '" + f[1] + "'");
    if (tr.values.empty()) {
      if (t % kTick != 0) throw ValidationError("traffic trace not on the 5-min grid");
      tr.start = t;
    } else if (t != prev + kTick) {
      throw ValidationError("traffic.csv line " + std::to_string(lineno) + ": gap or disorder in 5-min grid");
    }
    prev = t;
    tr.values.push_back(v);
  }
  if (tr.values.empty()) throw ValidationError("traffic trace is empty");
  return tr;
}

TrafficTrace load_traffic(const std::string& path) { return parse_traffic_csv(read_file(path)); }

std::string traffic_to_csv(const TrafficTrace& trace) {
  std::string out = "timestamp,requests_per_sec\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i)
    out += format_timestamp(trace.time_at(i)) + "," + format_double(trace.values[i]) + "\n";
  return out;
}

double RegressionTree::predict(const double* x) const {
  std::size_t k = 0;
  while (nodes[k].feature >= 0)
    k = static_cast<std::size_t>(x[nodes[k].feature] < nodes[k].threshold ? nodes[k].left : nodes[k].right);
  return nodes[k].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].feature < 0) continue;
    d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
    d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
    best = std::max(best, d[k] + 1);
  }
  return best;
}

double GbdtModel::predict_one(const std::vector<double>& features) const {
  double y = base_prediction;
  for (const auto& t : trees) y += t.predict(features.data());
  return y;
}

std::vector<double> make_features(const double* lags, Timestamp target, bool calendar) {
  std::vector<double> f(lags, lags + kLags);
  if (calendar) {
    Timestamp sod = ((target % kDay) + kDay) % kDay;
    double phase = kTwoPi * static_cast<double>(sod) / static_cast<double>(kDay);
    f.push_back(std::sin(phase));
    f.push_back(std::cos(phase));
    // 1970-01-01 was a Thursday; 0 = Monday.
    Timestamp days = (target - sod) / kDay;
    f.push_back(static_cast<double>(((days + 3) % 7 + 7) % 7));
  }
  return f;
}

GbdtModel train(const TrafficTrace& trace, const GbdtConfig& config) {
  if (trace.values.size() < kLags + 1) throw ValidationError("traffic trace too short to train (need >= 13 samples)");
  if (config.n_trees < 0 || config.max_depth < 0 || config.learning_rate <= 0 || config.learning_rate > 1 ||
      config.min_samples_leaf < 1)
    throw ValidationError("invalid forecaster configuration");
  Dataset d = make_dataset(trace, config.calendar_features);
  GbdtModel model;
  model.learning_rate = config.learning_rate;
  model.max_depth = config.max_depth;
  model.calendar_features = config.calendar_features;
  model.base_prediction = std::accumulate(d.y.begin(), d.y.end(), 0.0) / static_cast<double>(d.y.size());

  std::vector<std::vector<std::uint32_t>> order(d.x.size());
  for (std::size_t f = 0; f < d.x.size(); ++f) {
    order[f].resize(d.y.size());
    std::iota(order[f].begin(), order[f].end(), 0U);
    const auto& col = d.x[f];
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
  std::vector<double> pred(d.y.size(), model.base_prediction), residual(d.y.size());
  std::vector<double> row(d.x.size());
  for (int t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < d.y.size(); ++i) residual[i] = d.y[i] - pred[i];
    RegressionTree tree = fit_tree(d, order, residual, config);
    for (std::size_t i = 0; i < d.y.size(); ++i) {
      for (std::size_t f = 0; f < d.x.size(); ++f) row[f] = d.x[f][i];
      pred[i] += tree.predict(row.data());
    }
    model.trees.push_back(std::move(tree));
  }
  model.n_trees = static_cast<int>(model.trees.size());
  return model;
}

double training_mse(const GbdtModel& model, const TrafficTrace& trace) {
  double se = 0.0;
  std::size_t n = 0;
  for (std::size_t i = kLags; i < trace.values.size(); ++i) {
    double e = model.predict_one(make_features(&trace.values[i - kLags], trace.time_at(i), model.calendar_features)) -
               trace.values[i];
    se += e * e;
    ++n;
  }
  return se / static_cast<double>(n);
}

std::vector<double> predict_window(const GbdtModel& model, const std::vector<double>& history, Timestamp last) {
  if (history.size() != kLags) throw ValidationError("predict_window needs exactly 12 history values");
  std::vector<double> lags = history, out;
  for (std::size_t step = 1; step <= kLags; ++step) {
    Timestamp target = last + static_cast<Timestamp>(step) * kTick;
    double y = std::max(0.0, model.predict_one(make_features(lags.data() + lags.size() - kLags, target,
                                                             model.calendar_features)));
    out.push_back(y);
    lags.push_back(y);
  }
  return out;
}

double hour_estimate(const std::vector<double>& window) {
  if (window.empty()) throw ValidationError("empty forecast window");
  return *std::max_element(window.begin(), window.end());
}

std::vector<double> naive_persistence(const std::vector<double>& history) {
  if (history.empty()) throw ValidationError("naive persistence needs at least one value");
  return std::vector<double>(kLags, history.back());
}

std::vector<double> lag_mean_forecast(const std::vector<double>& history) {
  if (history.empty()) throw ValidationError("lag-mean forecast needs history");
  std::vector<double> lags = history, out;
  for (std::size_t step = 0; step < kLags; ++step) {
    std::size_t n = std::min(kLags, lags.size());
    double y = std::accumulate(lags.end() - static_cast<std::ptrdiff_t>(n), lags.end(), 0.0) / static_cast<double>(n);
    out.push_back(y);
    lags.push_back(y);
  }
  return out;
}

std::vector<ForecastScore> evaluate_forecasters(const TrafficTrace& trace, double train_fraction,
                                                const GbdtConfig& config) {
  if (train_fraction <= 0 || train_fraction >= 1) throw ValidationError("train fraction must be in (0, 1)");
  auto split = static_cast<std::size_t>(static_cast<double>(trace.values.size()) * train_fraction);
  if (split < kLags + 1 || trace.values.size() - split < kLags + 1)
    throw ValidationError("trace too short for the requested split");
  TrafficTrace head{trace.start, std::vector<double>(trace.values.begin(), trace.values.begin() + static_cast<std::ptrdiff_t>(split))};
  GbdtModel model = train(head, config);

  std::vector<ForecastScore> scores{{"gbdt"}, {"persistence"}, {"lag-mean"}};
  std::vector<double> elapsed(3, 0.0);
  std::size_t points = 0;
  using clock = std::chrono::steady_clock;
  for (std::size_t i = split; i + kLags <= trace.values.size(); ++i) {
    std::vector<double> hist(trace.values.begin() + static_cast<std::ptrdiff_t>(i - kLags),
                             trace.values.begin() + static_cast<std::ptrdiff_t>(i));
    for (std::size_t m = 0; m < 3; ++m) {
      auto t0 = clock::now();
      std::vector<double> w = m == 0   ? predict_window(model, hist, trace.time_at(i - 1))
                              : m == 1 ? naive_persistence(hist)
                                       : lag_mean_forecast(hist);
      elapsed[m] += std::chrono::duration<double, std::micro>(clock::now() - t0).count();
      for (std::size_t k = 0; k < kLags; ++k) scores[m].mae += std::abs(w[k] - trace.values[i + k]);
      scores[m].windows += 1;
    }
    points += kLags;
  }
  for (std::size_t m = 0; m < 3; ++m) {
    scores[m].mae /= static_cast<double>(points);
    scores[m].mean_inference_us = elapsed[m] / static_cast<double>(scores[m].windows);
  }
  return scores;
}

}  // namespace carbonplace
