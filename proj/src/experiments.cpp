#include "carbonplace/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "carbonplace/baselines.hpp"
#include "carbonplace/gen.hpp"

namespace carbonplace {

namespace {

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= n || error) return;
          i = next++;
        }
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double ratio(double a, double b) { return b > 0 ? a / b : (a > 0 ? INFINITY : 1.0); }

}  // namespace

double mean_e2e(const MetricsLog& log) {
  if (log.ticks.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : log.ticks) s += t.e2e_ms;
  return s / static_cast<double>(log.ticks.size());
}

Comparison compare(const Scenario& sc, const std::vector<std::string>& strategies,
                   const std::vector<std::uint64_t>& seeds, int threads) {
  if (strategies.empty() || seeds.empty()) throw ValidationError("compare needs at least one strategy and seed");
  for (const auto& s : strategies) make_strategy(s);
  std::vector<std::string> cells_strategy;
  for (const auto& s : strategies)
    if (s != "static") cells_strategy.push_back(s);
  cells_strategy.insert(cells_strategy.begin(), "static");

  std::size_t ns = cells_strategy.size();
  std::vector<CompareRow> cells(ns * seeds.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    Scenario local = sc;
    local.seed = seeds[c / ns];
    auto strat = make_strategy(cells_strategy[c % ns]);
    MetricsLog log = run(local, *strat);
    auto st = stability_summary(log);
    CompareRow& r = cells[c];
    r.strategy = log.strategy;
    r.seed = local.seed;
    r.carbon_g = log.total_carbon();
    r.cost_usd = log.total_cost();
    r.mean_latency_ms = log.mean_latency();
    r.mean_e2e_ms = mean_e2e(log);
    r.violation_rate = log.violation_rate();
    r.solve_time_s = log.total_solve_time;
    r.changes_per_day = st.changes_per_day;
    r.changes = st.changes;
    r.adaptation_rate = st.adaptation_rate ? *st.adaptation_rate : -1.0;
    r.region_share.assign(log.regions.size(), 0.0);
    for (const auto& t : log.ticks)
      for (std::size_t k = 0; k < t.snapshot.size(); ++k)
        r.region_share[k] += t.snapshot[k] / static_cast<double>(sc.app.size() * log.ticks.size());
  });

  Comparison out;
  out.regions = sc.regions_allowed;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const CompareRow& ref = cells[s * ns];
    for (const auto& name : strategies) {
      std::size_t k = name == "static" ? 0 : 1 + static_cast<std::size_t>(
          std::find(cells_strategy.begin() + 1, cells_strategy.end(), name) - (cells_strategy.begin() + 1));
      CompareRow r = cells[s * ns + k];
      r.carbon_norm = ratio(r.carbon_g, ref.carbon_g);
      r.cost_norm = ratio(r.cost_usd, ref.cost_usd);
      r.latency_norm = ratio(r.mean_latency_ms, ref.mean_latency_ms);
      r.solve_time_norm = ratio(r.solve_time_s, ref.solve_time_s);
      if (name == "static") r.carbon_norm = r.cost_norm = r.latency_norm = r.solve_time_norm = 1.0;
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

std::string comparison_csv(const Comparison& c) {
  std::string out =
      "strategy,seed,carbon_g,cost_usd,mean_latency_ms,mean_e2e_ms,slo_violation_rate,solve_time_s,carbon_norm,"
      "cost_norm,latency_norm,solve_time_norm,changes,changes_per_day,adaptation_rate\n";
  for (const auto& r : c.rows) {
    out += r.strategy + "," + std::to_string(r.seed) + "," + format_double(r.carbon_g) + "," +
           format_double(r.cost_usd) + "," + format_double(r.mean_latency_ms) + "," + format_double(r.mean_e2e_ms) +
           "," + format_double(r.violation_rate) + "," + format_double(r.solve_time_s) + "," +
           format_double(r.carbon_norm) + "," + format_double(r.cost_norm) + "," + format_double(r.latency_norm) +
           "," + (std::isfinite(r.solve_time_norm) ? format_double(r.solve_time_norm) : "") + "," +
           std::to_string(r.changes) + "," +
           format_double(r.changes_per_day) + "," + (r.adaptation_rate < 0 ? "" : format_double(r.adaptation_rate)) +
           "\n";
  }
  return out;
}

std::string region_distribution_csv(const Comparison& c) {
  std::string out = "strategy,seed";
  for (const auto& r : c.regions) out += "," + r;
  out += "\n";
  for (const auto& r : c.rows) {
    out += r.strategy + "," + std::to_string(r.seed);
    for (double v : r.region_share) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

OptContext initial_context(const Scenario& sc) {
  validate_scenario(sc);
  OptContext ctx;
  ctx.dag = &sc.app;
  ctx.schedule = activation_stages(sc.app);
  double load = sc.traffic.values[sc.traffic.index_at(sc.start)];
  ctx.profiles = profiles_for(sc.app, lookup(sc.profiles, load));
  ctx.infra = &sc.infra;
  for (const auto& r : sc.regions_allowed) ctx.ci_now[r] = ci_at(sc.infra.carbon.at(r), sc.start);
  ctx.base_region = sc.base_region;
  ctx.candidates = sc.regions_allowed;
  ctx.weights = sc.weights;
  ctx.slo_ms = effective_slo(sc);
  ctx.pin = sc.pin;
  ctx.ga = sc.ga;
  ctx.ga.seed = mix_seed(sc.seed, 0);
  ctx.traffic = load;
  ctx.request_payload_gb = sc.request_payload_gb;
  ctx.image_gb = sc.image_gb;
  ctx.region_filter = sc.region_filter;
  return ctx;
}

void require_feasible_start(const Scenario& sc) {
  OptContext ctx = initial_context(sc);
  double latency = evaluate_placement(ctx, Placement{{}, sc.base_region}).latency_ms;
  if (latency > ctx.slo_ms)
    throw InfeasibleError("all-in-base latency " + format_double(latency) + " ms exceeds the effective SLO " +
                          format_double(ctx.slo_ms) + " ms at the scenario start");
}

std::vector<AblationRow> ablate(const Scenario& sc) {
  OptContext base = initial_context(sc);
  struct Variant {
    const char* name;
    bool filter;
    bool pin;
  };
  const Variant variants[] = {{"both", true, true}, {"no-filtering", false, true}, {"no-pinning", true, false},
                              {"neither", false, false}};
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    OptContext ctx = base;
    ctx.region_filter = v.filter;
    ctx.pin.enabled = v.pin;
    SearchSpace space = search_space(ctx);
    AblationRow r;
    r.variant = v.name;
    r.retained = space.retained.size();
    r.movable = space.movable.size();
    r.search_space_log10 = search_space_log10(r.movable, r.retained);
    OptResult res = optimize(ctx);
    r.solve_time_s = res.solve_time;
    r.objective = res.objective;
    r.evaluations = res.evaluations;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,retained_regions,movable_services,search_space_log10,solve_time_s,objective,evaluations\n";
  for (const auto& r : rows)
    out += r.variant + "," + std::to_string(r.retained) + "," + std::to_string(r.movable) + "," +
           format_double(r.search_space_log10) + "," + format_double(r.solve_time_s) + "," +
           format_double(r.objective) + "," + std::to_string(r.evaluations) + "\n";
  return out;
}

std::vector<ScaleRow> scale(const Infra& infra, const ScaleConfig& cfg) {
  const std::string base_region = "eu-central-1";
  if (!infra.has_region(base_region)) throw ValidationError("scale fixture lacks " + base_region);
  constexpr double kReference = 300.0;
  std::vector<ScaleRow> rows;
  for (int n : cfg.counts)
    for (int s = 0; s < cfg.seeds; ++s) {
      std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(s));
      DagGenConfig dc;
      dc.compute = n;
      dc.seed = seed;
      AppDag dag = random_layered_dag(dc);
      auto perf = random_service_perf(dag, seed);
      std::map<std::string, Metrics> reps;
      for (const auto& [k, p] : perf) reps[k] = perf_at(p, kReference, kReference);
      for (const auto& set : cfg.region_sets) {
        OptContext ctx;
        ctx.dag = &dag;
        ctx.schedule = activation_stages(dag);
        ctx.profiles = profiles_for(dag, reps);
        ctx.infra = &infra;
        ctx.candidates = region_set(infra, set);
        for (const auto& r : ctx.candidates) ctx.ci_now[r] = infra.carbon.at(r).values.front();
        ctx.base_region = base_region;
        ctx.ga = cfg.ga;
        ctx.ga.seed = seed;
        ctx.traffic = kReference;
        ctx.request_payload_gb = 5e-7;
        ctx.image_gb = 0.5;
        ctx.slo_ms = 1e9;
        double base_latency = search_space(ctx).base_latency;
        for (const auto& level : cfg.slo_levels) {
          double frac = level == "relaxed" ? 0.5 : level == "medium" ? 0.8 : level == "strict" ? 0.9 : -1.0;
          if (frac < 0) throw ValidationError("unknown slo level '" + level + "'");
          ctx.slo_ms = base_latency / frac;
          OptResult res = optimize(ctx);
          ScaleRow r;
          r.services = n;
          r.region_set = set;
          r.slo_level = level;
          r.seed = static_cast<std::uint64_t>(s);
          r.movable = res.movable.size();
          r.retained = res.retained.size();
          r.slo_ms = ctx.slo_ms;
          r.base_latency_ms = base_latency;
          r.search_space_log10 = res.search_space_log10;
          r.generations = res.generations;
          r.evaluations = res.evaluations;
          r.solve_time_s = res.solve_time;
          rows.push_back(r);
        }
      }
    }
  return rows;
}

std::string scale_csv(const std::vector<ScaleRow>& rows) {
  std::string out =
      "services,region_set,slo_level,seed,movable,retained,slo_ms,base_latency_ms,search_space_log10,generations,"
      "evaluations,solve_time_s\n";
  for (const auto& r : rows)
    out += std::to_string(r.services) + "," + r.region_set + "," + r.slo_level + "," + std::to_string(r.seed) + "," +
           std::to_string(r.movable) + "," + std::to_string(r.retained) + "," + format_double(r.slo_ms) + "," +
           format_double(r.base_latency_ms) + "," + format_double(r.search_space_log10) + "," +
           std::to_string(r.generations) + "," + std::to_string(r.evaluations) + "," +
           format_double(r.solve_time_s) + "\n";
  return out;
}

double fitted_exponent(const std::vector<double>& services, const std::vector<double>& seconds) {
  if (services.size() != seconds.size() || services.size() < 2) throw ValidationError("need at least two points");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < services.size(); ++i) {
    x.push_back(std::log(services[i]));
    y.push_back(std::log(std::max(seconds[i], 1e-9)));
  }
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::string forecast_csv(const std::vector<ForecastScore>& scores) {
  std::string out = "model,mae,mean_inference_us,sub_millisecond,windows\n";
  for (const auto& s : scores)
    out += s.model + "," + format_double(s.mae) + "," + format_double(s.mean_inference_us) + "," +
           (s.mean_inference_us < 1000.0 ? "1" : "0") + "," + std::to_string(s.windows) + "\n";
  return out;
}

}  // namespace carbonplace
