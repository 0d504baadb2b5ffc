#include "carbonplace/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace carbonplace {

namespace {

Decision from_result(const OptResult& r) {
  Decision d;
  d.placement = r.placement;
  d.solve_time = r.solve_time;
  d.evaluations = r.evaluations;
  d.search_space_log10 = r.search_space_log10;
  d.retained = r.retained;
  return d;
}

Decision all_in_base(const DecisionContext& ctx, bool infeasible) {
  Decision d;
  d.placement.base_region = ctx.opt.base_region;
  d.infeasible = infeasible;
  return d;
}

class OptimizerStrategy : public Strategy {
 public:
  OptimizerStrategy(std::string name, bool vanilla, bool exhaustive)
      : name_(std::move(name)), vanilla_(vanilla), exhaustive_(exhaustive) {}
  std::string name() const override { return name_; }
  Decision decide(const DecisionContext& ctx) override {
    OptContext opt = vanilla_ ? vanilla_context(ctx.opt) : ctx.opt;
    try {
      return from_result(exhaustive_ ? brute_force_optimize(opt) : optimize(opt));
    } catch (const InfeasibleError&) {
      return all_in_base(ctx, true);
    }
  }

 private:
  std::string name_;
  bool vanilla_;
  bool exhaustive_;
};

class StaticStrategy : public Strategy {
 public:
  std::string name() const override { return "static"; }
  Decision decide(const DecisionContext& ctx) override { return all_in_base(ctx, false); }
};

class SamplingStrategy : public Strategy {
 public:
  explicit SamplingStrategy(SamplingConfig cfg) : cfg_(cfg) {
    if (cfg_.samples < 1 || cfg_.hysteresis < 0) throw ValidationError("invalid sampling configuration");
  }
  std::string name() const override { return "sampling"; }

  Decision decide(const DecisionContext& ctx) override {
    auto t0 = std::chrono::steady_clock::now();
    const OptContext& opt = ctx.opt;
    const AppDag& dag = *opt.dag;
    PlacementModel model(opt, opt.candidates, opt.candidates.size());
    std::vector<std::uint16_t> base(dag.size(), static_cast<std::uint16_t>(model.base()));
    Evaluation base_eval = model.evaluate(base);

    auto shape = canonical_shape(opt.infra->pricing, opt.base_region);
    std::vector<double> weight;
    for (const auto& r : opt.candidates) {
      double w = opt.ci_now.at(r) * reference_price(opt.infra->pricing, r, shape);
      weight.push_back(1.0 / std::max(w, 1e-9));
    }
    std::partial_sum(weight.begin(), weight.end(), weight.begin());
    std::mt19937_64 rng(opt.ga.seed);
    auto pick = [&](std::mt19937_64& g) {
      double u = static_cast<double>(g() >> 11) * 0x1.0p-53 * weight.back();
      return static_cast<std::size_t>(std::upper_bound(weight.begin(), weight.end() - 1, u) - weight.begin());
    };

    auto score = [&](const std::vector<std::uint16_t>& reg) {
      Evaluation e = model.evaluate(reg);
      if (e.latency_ms > opt.slo_ms) return std::numeric_limits<double>::infinity();
      return objective(e, base_eval, opt.weights).objective;
    };
    Decision d;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::uint16_t> best_reg = base;
    std::vector<std::uint16_t> reg = base;
    for (int s = 0; s < cfg_.samples; ++s) {
      for (std::size_t i = 0; i < dag.size(); ++i)
        reg[i] = dag.node(i).structurally_pinned ? static_cast<std::uint16_t>(model.base())
                                                 : static_cast<std::uint16_t>(pick(rng));
      double f = score(reg);
      if (f < best) {
        best = f;
        best_reg = reg;
      }
    }
    d.evaluations = cfg_.samples + 1;
    double cur = score(model.expand(ctx.current));
    d.retained = opt.candidates;
    d.search_space_log10 = search_space_log10(
        static_cast<std::size_t>(std::count_if(dag.nodes().begin(), dag.nodes().end(),
                                               [](const Microservice& m) { return !m.structurally_pinned; })),
        opt.candidates.size());
    bool adopt = std::isfinite(best) && (!std::isfinite(cur) || best < cur * (1.0 - cfg_.hysteresis));
    if (adopt) {
      d.placement.base_region = opt.base_region;
      for (std::size_t i = 0; i < dag.size(); ++i)
        if (!dag.node(i).structurally_pinned) d.placement.assign[dag.node(i).id] = model.regions()[best_reg[i]];
    } else if (std::isfinite(cur)) {
      d.placement = ctx.current;
    } else {
      d.placement.base_region = opt.base_region;
      d.infeasible = base_eval.latency_ms > opt.slo_ms;
    }
    d.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return d;
  }

 private:
  SamplingConfig cfg_;
};

}  // namespace

OptContext vanilla_context(OptContext ctx) {
  ctx.region_filter = false;
  ctx.pin.enabled = false;
  ctx.ga.seed_greenest = false;
  return ctx;
}

std::unique_ptr<Strategy> aceso_strategy() { return std::make_unique<OptimizerStrategy>("aceso", false, false); }
std::unique_ptr<Strategy> static_strategy() { return std::make_unique<StaticStrategy>(); }
std::unique_ptr<Strategy> vanilla_ga_strategy() { return std::make_unique<OptimizerStrategy>("vanilla-ga", true, false); }
std::unique_ptr<Strategy> stochastic_sampling_strategy(const SamplingConfig& config) {
  return std::make_unique<SamplingStrategy>(config);
}
std::unique_ptr<Strategy> brute_force_strategy() { return std::make_unique<OptimizerStrategy>("brute-force", false, true); }

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names{"aceso", "static", "vanilla-ga", "sampling", "brute-force"};
  return names;
}

std::unique_ptr<Strategy> make_strategy(const std::string& name) {
  if (name == "aceso") return aceso_strategy();
  if (name == "static") return static_strategy();
  if (name == "vanilla-ga") return vanilla_ga_strategy();
  if (name == "sampling") return stochastic_sampling_strategy();
  if (name == "brute-force") return brute_force_strategy();
  throw ValidationError("unknown strategy '" + name + "'");
}

}  // namespace carbonplace
