#include "carbonplace/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace carbonplace {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double unit(SplitMix64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
std::size_t below(SplitMix64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double norm_ref(double v) { return v > 0 ? v : 1.0; }

}  // namespace

const std::string& Placement::region_of(int id) const {
  auto it = assign.find(id);
  return it == assign.end() ? base_region : it->second;
}

void GaConfig::validate() const {
  if (population < 2) throw ValidationError("ga.population must be >= 2");
  if (elitism < 0 || elitism >= population) throw ValidationError("ga.elitism must be in [0, population)");
  if (mutation_rate > 1.0) throw ValidationError("ga.mutation_rate must be <= 1");
  if (crossover_rate < 0 || crossover_rate > 1) throw ValidationError("ga.crossover_rate must be in [0, 1]");
  if (max_generations < 0 || patience < 1 || tournament < 1 || threads < 1)
    throw ValidationError("invalid GA termination or selection settings");
  if (time_budget <= 0) throw ValidationError("ga.time_budget must be positive");
}

std::vector<Metrics> profiles_for(const AppDag& dag, const std::map<std::string, Metrics>& reps) {
  std::vector<Metrics> out;
  out.reserve(dag.size());
  for (const auto& n : dag.nodes()) {
    auto it = reps.find(n.profile_key);
    if (it == reps.end()) throw ValidationError("no profile for service " + n.name + " (key " + n.profile_key + ")");
    out.push_back(it->second);
  }
  return out;
}

PlacementModel::PlacementModel(const OptContext& ctx, const std::vector<std::string>& regions,
                               std::size_t storage_regions)
    : dag_(ctx.dag), regions_(regions) {
  const Infra& infra = *ctx.infra;
  const AppDag& dag = *ctx.dag;
  if (ctx.profiles.size() != dag.size()) throw ValidationError("profiles do not cover every service");
  std::size_t n = dag.size(), r = regions_.size();
  base_ = region_index(ctx.base_region);
  lat_.resize(n);
  carbon_.resize(n * r);
  price_.resize(n * r);
  rtt_.resize(r * r);
  egress_.resize(r * r);
  std::vector<std::size_t> rix(r);
  for (std::size_t a = 0; a < r; ++a) rix[a] = infra.rtt.index_of(regions_[a]);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) {
      rtt_[a * r + b] = infra.rtt.at(rix[a], rix[b]);
      egress_[a * r + b] = infra.pricing.egress_price(regions_[a], regions_[b]);
    }
  for (std::size_t i = 0; i < n; ++i) {
    const Metrics& m = ctx.profiles[i];
    lat_[i] = m.latency_ms;
    for (std::size_t a = 0; a < r; ++a) {
      auto ci = ctx.ci_now.find(regions_[a]);
      if (ci == ctx.ci_now.end()) throw ValidationError("no carbon intensity for region " + regions_[a]);
      carbon_[i * r + a] = ci->second * m.energy_j * static_cast<double>(kHour / kTick) / kJoulesPerKwh;
      price_[i * r + a] =
          smallest_instance(infra.pricing, regions_[a], std::max(m.cpu_cores, 1e-9), std::max(m.mem_gb, 1e-9)).price;
    }
  }
  double gb_per_call_hour = ctx.request_payload_gb * ctx.traffic * static_cast<double>(kHour);
  for (const auto& e : dag.call_edges())
    edges_.push_back({dag.index_of(e.caller), dag.index_of(e.callee), gb_per_call_hour * e.calls});
  storage_ = infra.pricing.storage_price * ctx.image_gb * static_cast<double>(n) * static_cast<double>(storage_regions) /
             kHoursPerMonth;
}

std::size_t PlacementModel::region_index(const std::string& r) const {
  auto it = std::find(regions_.begin(), regions_.end(), r);
  if (it == regions_.end()) throw ValidationError("region " + r + " not in the decision's region set");
  return static_cast<std::size_t>(it - regions_.begin());
}

double PlacementModel::latency(const std::vector<std::uint16_t>& reg) const {
  const AppDag& dag = *dag_;
  std::size_t r = regions_.size();
  thread_local std::vector<double> done;
  done.assign(dag.size(), 0.0);
  for (std::size_t v : dag.topo_order()) {
    double start = 0.0;
    for (const auto& p : dag.preds(v))
      start = std::max(start, done[p.node] + p.calls * rtt_[reg[p.node] * r + reg[v]]);
    done[v] = start + lat_[v];
  }
  std::size_t last = dag.sinks().front();
  for (std::size_t s : dag.sinks())
    if (done[s] > done[last]) last = s;
  return done[last] + rtt_[reg[dag.owner(last)] * r + base_];
}

Evaluation PlacementModel::evaluate(const std::vector<std::uint16_t>& reg) const {
  Evaluation e;
  std::size_t r = regions_.size();
  e.latency_ms = latency(reg);
  for (std::size_t i = 0; i < reg.size(); ++i) {
    e.carbon += carbon_[i * r + reg[i]];
    e.compute_cost += price_[i * r + reg[i]];
  }
  for (const auto& ed : edges_)
    if (reg[ed.u] != reg[ed.v]) e.egress_cost += ed.usd_per_crossing_hour * egress_[reg[ed.u] * r + reg[ed.v]];
  e.storage_cost = storage_;
  return e;
}

std::vector<std::uint16_t> PlacementModel::expand(const Placement& p) const {
  std::vector<std::uint16_t> reg(dag_->size(), static_cast<std::uint16_t>(base_));
  if (p.base_region != regions_[base_]) throw ValidationError("placement base region mismatch");
  for (const auto& [id, region] : p.assign) {
    std::size_t idx = dag_->index_of(id);
    if (dag_->node(idx).structurally_pinned) throw ValidationError("pinned service " + dag_->node(idx).name + " assigned");
    reg[idx] = static_cast<std::uint16_t>(region_index(region));
  }
  return reg;
}

ObjectiveValue objective(const Evaluation& e, const Evaluation& base, const Weights& w) {
  ObjectiveValue v;
  v.carbon_term = e.carbon / norm_ref(base.carbon);
  v.cost_term = e.cost() / norm_ref(base.cost());
  v.objective = w.w_carbon * v.carbon_term + w.w_cost * v.cost_term;
  return v;
}

json to_json(const Placement& p) {
  json a = json::object();
  for (const auto& [id, r] : p.assign) a[std::to_string(id)] = r;
  return {{"base_region", p.base_region}, {"assign", a}};
}

json to_json(const OptResult& r) {
  return {{"placement", to_json(r.placement)},
          {"objective", r.objective},
          {"carbon", r.carbon},
          {"cost", r.cost},
          {"latency", r.latency},
          {"solve_time", r.solve_time},
          {"evaluations", r.evaluations},
          {"search_space_log10", r.search_space_log10},
          {"generations", r.generations},
          {"retained", r.retained},
          {"movable", r.movable},
          {"warnings", r.warnings}};
}

std::vector<std::string> region_filter(const std::string& base, const std::vector<std::string>& candidates,
                                       const std::map<std::string, double>& ci_now,
                                       const std::map<std::string, double>& prices, bool conservative) {
  if (std::find(candidates.begin(), candidates.end(), base) == candidates.end())
    throw ValidationError("base region " + base + " not among candidates");
  auto get = [](const std::map<std::string, double>& m, const std::string& r, const char* what) {
    auto it = m.find(r);
    if (it == m.end()) throw ValidationError(std::string("region filter: missing ") + what + " for " + r);
    return it->second;
  };
  double cb = get(ci_now, base, "carbon intensity"), pb = get(prices, base, "price");
  std::vector<std::string> kept;
  bool double_improver = false;
  for (const auto& c : candidates) {
    double ci = get(ci_now, c, "carbon intensity"), p = get(prices, c, "price");
    if (c == base) {
      kept.push_back(c);
      continue;
    }
    if (ci >= cb && p >= pb && (ci > cb || p > pb)) continue;
    if (ci < cb && p < pb) double_improver = true;
    kept.push_back(c);
  }
  if (!conservative || !double_improver) return kept;
  std::vector<std::string> out;
  for (const auto& c : kept) {
    double ci = ci_now.at(c), p = prices.at(c);
    bool only_one = (ci < cb) != (p < pb);
    if (c == base || !only_one) out.push_back(c);
  }
  return out;
}

std::set<int> pin_services(const AppDag& dag, const ActivationSchedule& schedule, double base_latency, double slo,
                           const PinPolicy& policy) {
  if (slo <= 0) throw ValidationError("slo must be positive");
  if (policy.enabled && (policy.theta < 0.8 || policy.theta > 0.9)) throw ValidationError("theta must be in [0.8, 0.9]");
  std::set<int> movable;
  for (const auto& n : dag.nodes())
    if (!n.structurally_pinned) movable.insert(n.id);
  if (!policy.enabled || base_latency < policy.theta * slo) return movable;
  std::size_t stages = schedule.stages.size();
  std::size_t cap = (stages + 1) / 2;
  double slack_ratio = base_latency / slo;
  for (std::size_t k = 0; k < cap && slack_ratio >= policy.theta; ++k)
    for (int id : schedule.stages[stages - 1 - k]) movable.erase(id);
  return movable;
}

double search_space_log10(std::size_t movable, std::size_t retained) {
  if (movable == 0 || retained <= 1) return 0.0;
  return static_cast<double>(movable) * std::log10(static_cast<double>(retained));
}

bool carbon_trigger(double recent_trend, double forecast, double threshold) {
  if (recent_trend == 0.0) return forecast > 0.0;
  return std::abs(forecast - recent_trend) / recent_trend > threshold;
}

bool workload_trigger(std::size_t current_bucket, std::size_t forecast_bucket) { return current_bucket != forecast_bucket; }

SearchSpace search_space(const OptContext& ctx) {
  if (!ctx.dag || !ctx.infra) throw ValidationError("optimizer context lacks application or infrastructure");
  SearchSpace ss;
  if (ctx.region_filter) {
    auto shape = canonical_shape(ctx.infra->pricing, ctx.base_region);
    std::map<std::string, double> prices;
    for (const auto& r : ctx.candidates) prices[r] = reference_price(ctx.infra->pricing, r, shape);
    bool both = ctx.weights.w_carbon > 0 && ctx.weights.w_cost > 0;
    ss.retained = region_filter(ctx.base_region, ctx.candidates, ctx.ci_now, prices, both);
  } else {
    ss.retained = ctx.candidates;
    if (std::find(ss.retained.begin(), ss.retained.end(), ctx.base_region) == ss.retained.end())
      throw ValidationError("base region " + ctx.base_region + " not among candidates");
  }
  PlacementModel base_model(ctx, {ctx.base_region}, 1);
  ss.base_latency = base_model.latency(std::vector<std::uint16_t>(ctx.dag->size(), 0));
  PinPolicy pin = ctx.pin;
  auto mv = pin_services(*ctx.dag, ctx.schedule, ss.base_latency, ctx.slo_ms, pin);
  ss.movable.assign(mv.begin(), mv.end());
  return ss;
}

Evaluation evaluate_placement(const OptContext& ctx, const Placement& p) {
  std::vector<std::string> regions = ctx.candidates;
  for (const auto& [id, r] : p.assign)
    if (std::find(regions.begin(), regions.end(), r) == regions.end()) regions.push_back(r);
  PlacementModel model(ctx, regions, 1);
  return model.evaluate(model.expand(p));
}

bool feasible(const OptContext& ctx, const Placement& p) { return evaluate_placement(ctx, p).latency_ms <= ctx.slo_ms; }

namespace {

struct Prepared {
  SearchSpace ss;
  PlacementModel model;
  std::vector<std::size_t> genes;  // node index per gene
  Evaluation base_eval;
  std::vector<std::uint16_t> base_assign;
};

Prepared prepare(const OptContext& ctx) {
  SearchSpace ss = search_space(ctx);
  PlacementModel model(ctx, ss.retained, ss.retained.size());
  std::vector<std::size_t> genes;
  for (int id : ss.movable) genes.push_back(ctx.dag->index_of(id));
  std::vector<std::uint16_t> base_assign(ctx.dag->size(), static_cast<std::uint16_t>(model.base()));
  Evaluation base_eval = model.evaluate(base_assign);
  if (base_eval.latency_ms > ctx.slo_ms)
    throw InfeasibleError("no feasible placement: all-in-base latency " + format_double(base_eval.latency_ms) +
                          " ms exceeds slo " + format_double(ctx.slo_ms) + " ms");
  return {std::move(ss), std::move(model), std::move(genes), base_eval, std::move(base_assign)};
}

OptResult finish(const OptContext& ctx, const Prepared& pr, const std::vector<std::uint16_t>& genome) {
  OptResult res;
  std::vector<std::uint16_t> full = pr.base_assign;
  for (std::size_t g = 0; g < pr.genes.size(); ++g) full[pr.genes[g]] = genome[g];
  Evaluation e = pr.model.evaluate(full);
  res.placement.base_region = ctx.base_region;
  for (std::size_t g = 0; g < pr.genes.size(); ++g)
    res.placement.assign[ctx.dag->node(pr.genes[g]).id] = pr.model.regions()[genome[g]];
  ObjectiveValue ov = objective(e, pr.base_eval, ctx.weights);
  res.objective = ov.objective;
  res.carbon = e.carbon;
  res.cost = e.cost();
  res.latency = e.latency_ms;
  res.retained = pr.ss.retained;
  res.movable = pr.ss.movable;
  res.search_space_log10 = search_space_log10(pr.genes.size(), pr.ss.retained.size());
  if (ctx.weights.w_carbon == 0 && ctx.weights.w_cost == 0)
    res.warnings.push_back("both objective weights are zero; every placement scores 0");
  return res;
}

}  // namespace

OptResult optimize(const OptContext& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  const GaConfig& cfg = ctx.ga;
  cfg.validate();
  Prepared pr = prepare(ctx);
  std::size_t m = pr.genes.size(), r = pr.ss.retained.size();
  auto base_allele = static_cast<std::uint16_t>(pr.model.base());
  if (m == 0 || r == 1) {
    OptResult res = finish(ctx, pr, std::vector<std::uint16_t>(m, base_allele));
    res.evaluations = 1;
    res.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

  using Genome = std::vector<std::uint16_t>;
  auto fitness_of = [&](const Genome& g) {
    thread_local Genome full;
    full = pr.base_assign;
    for (std::size_t k = 0; k < m; ++k) full[pr.genes[k]] = g[k];
    Evaluation e = pr.model.evaluate(full);
    if (e.latency_ms > ctx.slo_ms) return kInf;
    return objective(e, pr.base_eval, ctx.weights).objective;
  };
  std::int64_t evaluations = 0;
  auto evaluate_all = [&](const std::vector<Genome>& pop, std::vector<double>& fit, std::size_t from) {
    std::size_t count = pop.size() - from;
    evaluations += static_cast<std::int64_t>(count);
    auto workers = static_cast<std::size_t>(std::min<int>(cfg.threads, static_cast<int>(count)));
    if (workers <= 1) {
      for (std::size_t i = from; i < pop.size(); ++i) fit[i] = fitness_of(pop[i]);
      return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = from + w; i < pop.size(); i += workers) fit[i] = fitness_of(pop[i]);
      });
    for (auto& t : pool) t.join();
  };

  auto pop_size = static_cast<std::size_t>(cfg.population);
  std::vector<Genome> pop(pop_size, Genome(m, base_allele));
  std::size_t greenest = pr.model.base();
  for (std::size_t a = 0; a < r; ++a)
    if (ctx.ci_now.at(pr.model.regions()[a]) < ctx.ci_now.at(pr.model.regions()[greenest])) greenest = a;
  std::size_t first_random = 1;
  if (cfg.seed_greenest) {
    pop[1].assign(m, static_cast<std::uint16_t>(greenest));
    first_random = 2;
  }
  for (std::size_t i = first_random; i < pop_size; ++i) {
    SplitMix64 rng(mix_seed(mix_seed(cfg.seed, 0), i));
    for (auto& g : pop[i]) g = static_cast<std::uint16_t>(below(rng, r));
  }
  std::vector<double> fit(pop_size);
  evaluate_all(pop, fit, 0);

  double mutation = cfg.mutation_rate < 0 ? 1.0 / static_cast<double>(m) : cfg.mutation_rate;
  std::vector<std::size_t> rank(pop_size);
  auto order = [&] {
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });
  };
  order();
  Genome best = pop[rank[0]];
  double best_fit = fit[rank[0]];
  int stale = 0, gen = 0;
  auto elite = static_cast<std::size_t>(cfg.elitism);
  for (gen = 1; gen <= cfg.max_generations; ++gen) {
    std::vector<Genome> next(pop_size);
    for (std::size_t i = 0; i < elite; ++i) next[i] = pop[rank[i]];
    for (std::size_t j = elite; j < pop_size; ++j) {
      SplitMix64 rng(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(gen)), j));
      auto pick = [&] {
        std::size_t w = below(rng, pop_size);
        for (int t = 1; t < cfg.tournament; ++t) {
          std::size_t c = below(rng, pop_size);
          if (fit[c] < fit[w] || (fit[c] == fit[w] && c < w)) w = c;
        }
        return w;
      };
      std::size_t a = pick(), b = pick();
      Genome child = pop[a];
      if (unit(rng) < cfg.crossover_rate)
        for (std::size_t k = 0; k < m; ++k)
          if (rng() & 1ULL) child[k] = pop[b][k];
      for (std::size_t k = 0; k < m; ++k)
        if (unit(rng) < mutation) {
          auto shift = static_cast<std::uint16_t>(1 + below(rng, r - 1));
          child[k] = static_cast<std::uint16_t>((child[k] + shift) % r);
        }
      next[j] = std::move(child);
    }
    std::vector<double> next_fit(pop_size);
    for (std::size_t i = 0; i < elite; ++i) next_fit[i] = fit[rank[i]];
    pop = std::move(next);
    fit = std::move(next_fit);
    evaluate_all(pop, fit, elite);
    order();
    if (fit[rank[0]] < best_fit - 1e-12 * std::max(1.0, std::abs(best_fit))) {
      best_fit = fit[rank[0]];
      best = pop[rank[0]];
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > cfg.time_budget) break;
  }
  OptResult res = finish(ctx, pr, best);
  res.evaluations = evaluations;
  res.generations = std::min(gen, cfg.max_generations);
  res.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

OptResult brute_force_optimize(const OptContext& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  Prepared pr = prepare(ctx);
  std::size_t m = pr.genes.size(), r = pr.ss.retained.size();
  if (search_space_log10(m, r) > 7.0 + 1e-9) throw ValidationError("brute force space exceeds 10^7 placements");
  std::vector<std::uint16_t> full = pr.base_assign, cur(m, 0), best(m, static_cast<std::uint16_t>(pr.model.base()));
  double best_fit = kInf;
  std::int64_t evals = 0;
  while (true) {
    for (std::size_t k = 0; k < m; ++k) full[pr.genes[k]] = cur[k];
    Evaluation e = pr.model.evaluate(full);
    ++evals;
    if (e.latency_ms <= ctx.slo_ms) {
      double f = objective(e, pr.base_eval, ctx.weights).objective;
      if (f < best_fit) {
        best_fit = f;
        best = cur;
      }
    }
    std::size_t k = 0;
    while (k < m && ++cur[k] == r) cur[k++] = 0;
    if (k == m) break;
  }
  OptResult res = finish(ctx, pr, best);
  res.evaluations = evals;
  res.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace carbonplace
