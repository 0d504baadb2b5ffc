#include "carbonplace/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include <boost/math/distributions/normal.hpp>

namespace carbonplace {

using nlohmann::json;

namespace {

std::vector<std::size_t> region_indices(const AppDag& dag, const Placement& p, const RttMatrix& rtt) {
  std::vector<std::size_t> reg(dag.size());
  for (std::size_t i = 0; i < dag.size(); ++i) reg[i] = rtt.index_of(p.region_of(dag.node(i).id));
  return reg;
}

RepMode parse_mode(const std::string& s) {
  if (s == "mean_plus_sigma") return RepMode::kMeanPlusSigma;
  if (s == "p85") return RepMode::kP85;
  throw ValidationError("unknown profile mode '" + s + "'");
}

std::size_t movable_count(const AppDag& dag) {
  return static_cast<std::size_t>(
      std::count_if(dag.nodes().begin(), dag.nodes().end(), [](const Microservice& m) { return !m.structurally_pinned; }));
}

double moved_fraction(const AppDag& dag, const Placement& a, const Placement& b) {
  std::size_t total = movable_count(dag), moved = 0;
  if (total == 0) return 0.0;
  for (const auto& n : dag.nodes())
    if (!n.structurally_pinned && a.region_of(n.id) != b.region_of(n.id)) ++moved;
  return static_cast<double>(moved) / static_cast<double>(total);
}

// Canonical form: movable services listed explicitly, base assignments included.
Placement canonical(const AppDag& dag, const Placement& p) {
  Placement out{{}, p.base_region};
  for (const auto& n : dag.nodes())
    if (!n.structurally_pinned) out.assign[n.id] = p.region_of(n.id);
  return out;
}

}  // namespace

void apply_config(Scenario& sc, const json& c) {
  try {
    if (c.contains("id")) sc.id = c["id"].get<std::string>();
    if (c.contains("base_region")) sc.base_region = c["base_region"].get<std::string>();
    if (c.contains("regions_allowed")) sc.regions_allowed = c["regions_allowed"].get<std::vector<std::string>>();
    if (c.contains("slo_ms")) sc.slo_ms = c["slo_ms"].get<double>();
    if (c.contains("slo_percentile")) sc.slo_percentile = c["slo_percentile"].get<double>();
    if (c.contains("w_carbon")) sc.weights.w_carbon = c["w_carbon"].get<double>();
    if (c.contains("w_cost")) sc.weights.w_cost = c["w_cost"].get<double>();
    if (c.contains("theta")) sc.pin.theta = c["theta"].get<double>();
    if (c.contains("pinning")) sc.pin.enabled = c["pinning"].get<bool>();
    if (c.contains("region_filter")) sc.region_filter = c["region_filter"].get<bool>();
    if (c.contains("start")) sc.start = parse_timestamp(c["start"].get<std::string>());
    if (c.contains("end")) sc.end = parse_timestamp(c["end"].get<std::string>());
    if (c.contains("jitter_sigma")) sc.jitter_sigma = c["jitter_sigma"].get<double>();
    if (c.contains("migration_delay")) sc.migration_delay = c["migration_delay"].get<int>();
    if (c.contains("request_payload_gb")) sc.request_payload_gb = c["request_payload_gb"].get<double>();
    if (c.contains("image_gb")) sc.image_gb = c["image_gb"].get<double>();
    if (c.contains("violation_draws")) sc.violation_draws = c["violation_draws"].get<int>();
    if (c.contains("seed")) sc.seed = c["seed"].get<std::uint64_t>();
    if (c.contains("ci_forecast")) {
      auto s = c["ci_forecast"].get<std::string>();
      if (s == "lookahead")
        sc.ci_forecast = CiForecast::kLookahead;
      else if (s == "persistence")
        sc.ci_forecast = CiForecast::kPersistence;
      else
        throw ValidationError("unknown ci_forecast '" + s + "'");
    }
    if (c.contains("forecaster")) {
      const auto& f = c["forecaster"];
      sc.use_forecaster = f.value("enabled", sc.use_forecaster);
      sc.forecaster.n_trees = f.value("n_trees", sc.forecaster.n_trees);
      sc.forecaster.max_depth = f.value("max_depth", sc.forecaster.max_depth);
      sc.forecaster.learning_rate = f.value("learning_rate", sc.forecaster.learning_rate);
      sc.forecaster.min_samples_leaf = f.value("min_samples_leaf", sc.forecaster.min_samples_leaf);
      sc.forecaster.calendar_features = f.value("calendar", sc.forecaster.calendar_features);
      sc.retrain_hours = f.value("retrain_hours", sc.retrain_hours);
    }
    if (c.contains("ga")) {
      const auto& g = c["ga"];
      sc.ga.population = g.value("population", sc.ga.population);
      sc.ga.max_generations = g.value("max_generations", sc.ga.max_generations);
      sc.ga.mutation_rate = g.value("mutation_rate", sc.ga.mutation_rate);
      sc.ga.crossover_rate = g.value("crossover_rate", sc.ga.crossover_rate);
      sc.ga.elitism = g.value("elitism", sc.ga.elitism);
      sc.ga.patience = g.value("patience", sc.ga.patience);
      sc.ga.time_budget = g.value("time_budget", sc.ga.time_budget);
      sc.ga.tournament = g.value("tournament", sc.ga.tournament);
      sc.ga.threads = g.value("threads", sc.ga.threads);
      if (g.contains("seed")) sc.ga.seed = g["seed"].get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  namespace fs = std::filesystem;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  fs::path dir = fs::path(path).parent_path();
  auto file = [&](const char* key) {
    if (!j.contains(key)) throw ValidationError(path + ": missing '" + key + "'");
    return (dir / j[key].get<std::string>()).string();
  };
  Scenario sc;
  sc.id = fs::path(path).stem().string();
  sc.app = load_app(file("app"));
  sc.infra = load_infra(file("infra"));
  sc.traffic = load_traffic(file("traffic"));
  BucketParams bp;
  bp.mode = parse_mode(j.value("profile_mode", std::string("mean_plus_sigma")));
  bp.n_min = j.value("bucket_n_min", bp.n_min);
  sc.profiles = build_buckets(load_profile(file("profile")), bp);
  apply_config(sc, j);
  if (sc.regions_allowed.empty()) {
    const auto& group = sc.infra.region(sc.base_region).sovereignty_group;
    for (const auto& r : sc.infra.regions)
      if (r.sovereignty_group == group) sc.regions_allowed.push_back(r.id);
  }
  validate_scenario(sc);
  return sc;
}

void validate_scenario(const Scenario& sc) {
  if (!sc.infra.has_region(sc.base_region)) throw ValidationError("unknown base region " + sc.base_region);
  if (std::find(sc.regions_allowed.begin(), sc.regions_allowed.end(), sc.base_region) == sc.regions_allowed.end())
    throw ValidationError("base region not among allowed regions");
  for (const auto& r : sc.regions_allowed)
    if (!sc.infra.has_region(r)) throw ValidationError("allowed region " + r + " unknown to the infrastructure");
  if (sc.end <= sc.start) throw ValidationError("empty horizon");
  if (sc.start % kHour != 0 || sc.end % kTick != 0) throw ValidationError("horizon must start on the hour");
  if (sc.traffic.start > sc.start - static_cast<Timestamp>(kLags) * kTick || sc.traffic.end() < sc.end)
    throw ValidationError("traffic trace does not cover the horizon plus one hour of history");
  for (const auto& r : sc.regions_allowed) {
    const auto& tr = sc.infra.carbon.at(r);
    if (tr.start > sc.start || tr.end() < sc.end) throw ValidationError("carbon trace of " + r + " does not cover the horizon");
  }
  if (sc.slo_ms <= 0) throw ValidationError("slo_ms must be positive");
  if (sc.slo_percentile < 0 || sc.slo_percentile >= 1) throw ValidationError("slo_percentile must be in [0, 1)");
  if (sc.weights.w_carbon < 0 || sc.weights.w_carbon > 1 || sc.weights.w_cost < 0 || sc.weights.w_cost > 1)
    throw ValidationError("weights must lie in [0, 1]");
  if (sc.violation_draws < 1000) throw ValidationError("violation_draws must be >= 1000");
  if (sc.migration_delay < 0 || sc.jitter_sigma < 0) throw ValidationError("negative migration delay or jitter");
  sc.ga.validate();
  for (const auto& n : sc.app.nodes())
    if (!sc.profiles.buckets.front().per_ms.count(n.profile_key))
      throw ValidationError("profile has no rows for service " + n.name);
}

double effective_slo(const Scenario& sc) {
  if (sc.slo_percentile <= 0.0 || sc.jitter_sigma <= 0.0) return sc.slo_ms;
  double z = boost::math::quantile(boost::math::normal(), sc.slo_percentile);
  return sc.slo_ms * std::exp(-z * sc.jitter_sigma);
}

double e2e_latency(const AppDag& dag, const Placement& p, const std::vector<Metrics>& profiles, const RttMatrix& rtt) {
  if (profiles.size() != dag.size()) throw ValidationError("profiles do not cover every service");
  auto reg = region_indices(dag, p, rtt);
  std::size_t base = rtt.index_of(p.base_region);
  std::vector<double> done(dag.size(), 0.0);
  for (std::size_t v : dag.topo_order()) {
    double start = 0.0;
    for (const auto& u : dag.preds(v)) start = std::max(start, done[u.node] + u.calls * rtt.at(reg[u.node], reg[v]));
    done[v] = start + profiles[v].latency_ms;
  }
  std::size_t last = dag.sinks().front();
  for (std::size_t s : dag.sinks())
    if (done[s] > done[last]) last = s;
  return done[last] + rtt.at(reg[dag.owner(last)], base);
}

double e2e_latency(const AppDag& dag, const Placement& p, const BucketTable& table, double traffic, const RttMatrix& rtt) {
  return e2e_latency(dag, p, profiles_for(dag, lookup(table, traffic)), rtt);
}

ViolationStats jittered_latency(double e2e_ms, double slo, double jitter_sigma, int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw ValidationError("n_draws must be positive");
  std::mt19937_64 rng(seed);
  ViolationStats st;
  int over = 0;
  for (int i = 0; i < n_draws; ++i) {
    // Box-Muller on a 53-bit uniform keeps draws identical across standard libraries.
    double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    double lat = e2e_ms * std::exp(jitter_sigma * z);
    st.mean_latency += lat;
    over += lat > slo;
  }
  st.mean_latency /= n_draws;
  st.violation_frac = static_cast<double>(over) / n_draws;
  return st;
}

double violation_rate(double e2e_ms, double slo, double jitter_sigma, int n_draws, std::uint64_t seed) {
  return jittered_latency(e2e_ms, slo, jitter_sigma, n_draws, seed).violation_frac;
}

double carbon_step(const AppDag& dag, const Placement& p, const std::vector<Metrics>& profiles,
                   const std::map<std::string, double>& ci_at_t, Timestamp dt) {
  double g = 0.0;
  double scale = static_cast<double>(dt) / static_cast<double>(kTick);
  for (std::size_t i = 0; i < dag.size(); ++i) {
    auto it = ci_at_t.find(p.region_of(dag.node(i).id));
    if (it == ci_at_t.end()) throw ValidationError("no carbon intensity for " + p.region_of(dag.node(i).id));
    g += profiles[i].energy_j * scale / kJoulesPerKwh * it->second;
  }
  return g;
}

CostBreakdown cost_step(const AppDag& dag, const Placement& p, const std::vector<Metrics>& profiles,
                        const PricingCatalog& catalog, const CostInputs& in, Timestamp dt) {
  CostBreakdown c;
  double hours = static_cast<double>(dt) / static_cast<double>(kHour);
  for (std::size_t i = 0; i < dag.size(); ++i)
    c.compute += smallest_instance(catalog, p.region_of(dag.node(i).id), std::max(profiles[i].cpu_cores, 1e-9),
                                   std::max(profiles[i].mem_gb, 1e-9))
                     .price *
                 hours;
  c.storage = catalog.storage_price * in.image_gb * static_cast<double>(dag.size()) *
              static_cast<double>(in.replicated_regions) * hours / kHoursPerMonth;
  double requests = in.traffic * static_cast<double>(dt);
  for (const auto& e : dag.call_edges()) {
    const auto& a = p.region_of(e.caller);
    const auto& b = p.region_of(e.callee);
    if (a != b) c.egress += catalog.egress_price(a, b) * in.request_payload_gb * requests * e.calls;
  }
  return c;
}

double MetricsLog::total_carbon() const {
  return std::accumulate(ticks.begin(), ticks.end(), 0.0, [](double s, const TickRecord& t) { return s + t.carbon_g; });
}
double MetricsLog::total_cost() const {
  return std::accumulate(ticks.begin(), ticks.end(), 0.0, [](double s, const TickRecord& t) { return s + t.cost_usd; });
}
double MetricsLog::mean_latency() const {
  if (ticks.empty()) return 0.0;
  return std::accumulate(ticks.begin(), ticks.end(), 0.0,
                         [](double s, const TickRecord& t) { return s + t.mean_latency_ms; }) /
         static_cast<double>(ticks.size());
}
double MetricsLog::violation_rate() const {
  if (ticks.empty()) return 0.0;
  return std::accumulate(ticks.begin(), ticks.end(), 0.0,
                         [](double s, const TickRecord& t) { return s + t.slo_violation_frac; }) /
         static_cast<double>(ticks.size());
}

StabilitySummary stability_summary(const MetricsLog& log) {
  StabilitySummary s;
  s.triggers = static_cast<int>(log.triggers.size());
  double moved = 0.0;
  for (const auto& t : log.triggers)
    if (t.changed) {
      ++s.changes;
      moved += t.moved_frac;
    }
  if (s.triggers > 0) s.adaptation_rate = static_cast<double>(s.changes) / s.triggers;
  if (s.changes > 0) s.avg_ms_moved_frac = moved / s.changes;
  if (log.horizon_days > 0) s.changes_per_day = s.changes / log.horizon_days;
  return s;
}

MetricsLog run(const Scenario& sc, Strategy& strategy) {
  validate_scenario(sc);
  strategy.configure(sc);
  const AppDag& dag = sc.app;
  MetricsLog log;
  log.scenario = sc.id;
  log.strategy = strategy.name();
  log.seed = sc.seed;
  log.regions = sc.regions_allowed;
  log.horizon_days = static_cast<double>(sc.end - sc.start) / static_cast<double>(kDay);
  log.movable_total = movable_count(dag);

  ActivationSchedule schedule = activation_stages(dag);
  double slo_eff = effective_slo(sc);
  std::size_t first = sc.traffic.index_at(sc.start);

  std::optional<GbdtModel> model;
  auto retrain = [&](std::size_t upto) {
    TrafficTrace hist{sc.traffic.start, std::vector<double>(sc.traffic.values.begin(),
                                                            sc.traffic.values.begin() + static_cast<std::ptrdiff_t>(upto))};
    model = train(hist, sc.forecaster);
  };
  if (sc.use_forecaster) retrain(first);

  auto history = [&](std::size_t i) {
    return std::vector<double>(sc.traffic.values.begin() + static_cast<std::ptrdiff_t>(i - kLags),
                               sc.traffic.values.begin() + static_cast<std::ptrdiff_t>(i));
  };
  auto estimate = [&](std::size_t i) {
    if (!sc.use_forecaster) return sc.traffic.values[i];
    return hour_estimate(predict_window(*model, history(i), sc.traffic.time_at(i - 1)));
  };
  auto ci_forecast = [&](Timestamp t) {
    std::map<std::string, double> ci;
    for (const auto& r : sc.regions_allowed) {
      const auto& tr = sc.infra.carbon.at(r);
      Timestamp q = sc.ci_forecast == CiForecast::kLookahead ? t : std::max(tr.start, t - kHour);
      ci[r] = ci_at(tr, q);
    }
    return ci;
  };

  std::set<std::string> replicated{sc.base_region};
  int decisions = 0;
  auto decide = [&](Timestamp t, double load, const Placement& current, bool& infeasible) {
    DecisionContext dc;
    dc.opt.dag = &dag;
    dc.opt.schedule = schedule;
    dc.opt.profiles = profiles_for(dag, lookup(sc.profiles, load));
    dc.opt.infra = &sc.infra;
    dc.opt.ci_now = ci_forecast(t);
    dc.opt.base_region = sc.base_region;
    dc.opt.candidates = sc.regions_allowed;
    dc.opt.weights = sc.weights;
    dc.opt.slo_ms = slo_eff;
    dc.opt.pin = sc.pin;
    dc.opt.ga = sc.ga;
    dc.opt.ga.seed = mix_seed(sc.seed, static_cast<std::uint64_t>(decisions));
    dc.opt.traffic = load;
    dc.opt.request_payload_gb = sc.request_payload_gb;
    dc.opt.image_gb = sc.image_gb;
    dc.opt.region_filter = sc.region_filter;
    dc.current = current;
    dc.time = t;
    dc.index = decisions++;
    Decision d = strategy.decide(dc);
    for (const auto& [id, r] : d.placement.assign)
      if (dag.node(dag.index_of(id)).structurally_pinned)
        throw ValidationError("strategy " + strategy.name() + " assigned pinned service " + dag.node(dag.index_of(id)).name);
    infeasible = d.infeasible;
    replicated.insert(d.retained.begin(), d.retained.end());
    for (const auto& [id, r] : d.placement.assign) replicated.insert(r);
    log.total_solve_time += d.solve_time;
    log.total_evaluations += d.evaluations;
    d.placement = canonical(dag, d.placement);
    return d;
  };

  // Initial placement from the first hour's estimate.
  double load0 = estimate(first);
  bool infeasible0 = false;
  Decision d0 = decide(sc.start, load0, canonical(dag, Placement{{}, sc.base_region}), infeasible0);
  Placement current = d0.placement;
  std::optional<Placement> pending;
  Timestamp apply_at = 0;
  std::size_t current_bucket = bucket_index(sc.profiles, load0);
  log.events.push_back({{"type", "initial"},
                        {"t", format_timestamp(sc.start)},
                        {"load_estimate", load0},
                        {"bucket", current_bucket},
                        {"infeasible", infeasible0},
                        {"evaluations", d0.evaluations},
                        {"solve_time_s", d0.solve_time},
                        {"placement", to_json(current)}});
  Timestamp last_retrain = sc.start;

  std::map<std::string, std::size_t> region_pos;
  for (std::size_t k = 0; k < sc.regions_allowed.size(); ++k) region_pos[sc.regions_allowed[k]] = k;

  for (Timestamp t = sc.start; t < sc.end; t += kTick) {
    std::size_t i = sc.traffic.index_at(t);
    double x = sc.traffic.values[i];
    TickRecord rec;
    rec.t = t;
    rec.traffic = x;

    if (pending && t >= apply_at) {
      current = *pending;
      pending.reset();
      log.events.push_back({{"type", "apply"}, {"t", format_timestamp(t)}, {"placement", to_json(current)}});
    }

    bool hourly = t > sc.start && (t - sc.start) % kHour == 0;
    if (hourly && sc.use_forecaster && sc.retrain_hours > 0 && t - last_retrain >= sc.retrain_hours * kHour) {
      retrain(i);
      last_retrain = t;
      log.events.push_back({{"type", "retrain"}, {"t", format_timestamp(t)}, {"samples", i}});
    }
    bool check_workload = sc.use_forecaster ? hourly : t > sc.start;
    if (hourly || check_workload) {
      TriggerEvent ev;
      ev.t = t;
      if (hourly) {
        std::set<std::string> watch{sc.base_region};
        const Placement& ref = pending ? *pending : current;
        for (const auto& [id, r] : ref.assign) watch.insert(r);
        for (const auto& r : watch) {
          const auto& tr = sc.infra.carbon.at(r);
          double sum = 0.0;
          int n = 0;
          for (Timestamp h = t - 6 * kHour; h < t; h += kHour)
            if (h >= tr.start) {
              sum += ci_at(tr, h);
              ++n;
            }
          if (n == 0) continue;
          Timestamp q = sc.ci_forecast == CiForecast::kLookahead ? t : t - kHour;
          if (carbon_trigger(sum / n, ci_at(tr, q))) ev.carbon_regions.push_back(r);
        }
        ev.carbon = !ev.carbon_regions.empty();
      }
      double load = check_workload ? estimate(i) : 0.0;
      if (check_workload) {
        ev.load_estimate = load;
        ev.bucket_from = current_bucket;
        ev.bucket_to = bucket_index(sc.profiles, load);
        ev.workload = workload_trigger(ev.bucket_from, ev.bucket_to);
      }
      if (ev.carbon || ev.workload) {
        if (!check_workload) {
          load = estimate(i);
          ev.load_estimate = load;
          ev.bucket_from = ev.bucket_to = current_bucket;
        }
        const Placement& ref = pending ? *pending : current;
        Decision d = decide(t, load, ref, ev.infeasible);
        current_bucket = bucket_index(sc.profiles, load);
        ev.bucket_to = current_bucket;
        ev.solve_time = d.solve_time;
        ev.evaluations = d.evaluations;
        ev.search_space_log10 = d.search_space_log10;
        ev.changed = !(d.placement == ref);
        ev.moved_frac = moved_fraction(dag, ref, d.placement);
        if (ev.changed) {
          if (sc.migration_delay == 0) {
            current = d.placement;
            pending.reset();
          } else {
            pending = d.placement;
            apply_at = t + sc.migration_delay * kTick;
          }
        }
        rec.carbon_trigger = ev.carbon;
        rec.workload_trigger = ev.workload;
        json e = {{"type", "trigger"},
                  {"t", format_timestamp(t)},
                  {"carbon", ev.carbon},
                  {"carbon_regions", ev.carbon_regions},
                  {"workload", ev.workload},
                  {"load_estimate", ev.load_estimate},
                  {"bucket_from", ev.bucket_from},
                  {"bucket_to", ev.bucket_to},
                  {"changed", ev.changed},
                  {"moved_frac", ev.moved_frac},
                  {"infeasible", ev.infeasible},
                  {"evaluations", ev.evaluations},
                  {"search_space_log10", ev.search_space_log10},
                  {"solve_time_s", ev.solve_time}};
        if (ev.changed) e["placement"] = to_json(d.placement);
        log.events.push_back(std::move(e));
        log.triggers.push_back(std::move(ev));
      }
    }

    auto profiles = profiles_for(dag, lookup(sc.profiles, x));
    std::map<std::string, double> ci;
    for (const auto& r : sc.regions_allowed) ci[r] = ci_at(sc.infra.carbon.at(r), t);
    CostInputs in{x, sc.request_payload_gb, sc.image_gb, replicated.size()};
    rec.carbon_g = carbon_step(dag, current, profiles, ci);
    rec.cost = cost_step(dag, current, profiles, sc.infra.pricing, in);
    rec.cost_usd = rec.cost.total();
    if (pending) {
      // Make-before-break: new instances run alongside the old ones until cutover.
      rec.migrating = true;
      double hours = static_cast<double>(kTick) / static_cast<double>(kHour);
      for (std::size_t k = 0; k < dag.size(); ++k) {
        int id = dag.node(k).id;
        const auto& to = pending->region_of(id);
        if (to == current.region_of(id)) continue;
        rec.migration_usd += smallest_instance(sc.infra.pricing, to, std::max(profiles[k].cpu_cores, 1e-9),
                                               std::max(profiles[k].mem_gb, 1e-9))
                                 .price *
                             hours;
      }
      rec.cost_usd += rec.migration_usd;
    }
    rec.e2e_ms = e2e_latency(dag, current, profiles, sc.infra.rtt);
    auto vs = jittered_latency(rec.e2e_ms, sc.slo_ms, sc.jitter_sigma, sc.violation_draws,
                               mix_seed(sc.seed ^ 0x5151515151515151ULL, i));
    rec.mean_latency_ms = vs.mean_latency;
    rec.slo_violation_frac = vs.violation_frac;
    rec.snapshot.assign(sc.regions_allowed.size(), 0);
    for (const auto& n : dag.nodes()) rec.snapshot[region_pos.at(current.region_of(n.id))] += 1;
    log.ticks.push_back(std::move(rec));
  }
  return log;
}

std::string metrics_csv(const MetricsLog& log) {
  std::string out = "timestamp,traffic,carbon_g,cost_usd,compute_usd,storage_usd,egress_usd,migration_usd,e2e_ms,"
                    "mean_latency_ms,slo_violation_frac,carbon_trigger,workload_trigger,migrating";
  for (const auto& r : log.regions) out += ",n_" + r;
  out += "\n";
  for (const auto& t : log.ticks) {
    out += format_timestamp(t.t) + "," + format_double(t.traffic) + "," + format_double(t.carbon_g) + "," +
           format_double(t.cost_usd) + "," + format_double(t.cost.compute) + "," + format_double(t.cost.storage) + "," +
           format_double(t.cost.egress) + "," + format_double(t.migration_usd) + "," + format_double(t.e2e_ms) + "," + format_double(t.mean_latency_ms) + "," +
           format_double(t.slo_violation_frac) + "," + (t.carbon_trigger ? "1" : "0") + "," +
           (t.workload_trigger ? "1" : "0") + "," + (t.migrating ? "1" : "0");
    for (int c : t.snapshot) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

std::string events_jsonl(const MetricsLog& log) {
  std::string out;
  for (const auto& e : log.events) out += e.dump() + "\n";
  return out;
}

json summary_json(const MetricsLog& log) {
  auto st = stability_summary(log);
  json j = {{"scenario", log.scenario},
            {"strategy", log.strategy},
            {"seed", log.seed},
            {"horizon_days", log.horizon_days},
            {"ticks", log.ticks.size()},
            {"total_carbon_g", log.total_carbon()},
            {"total_cost_usd", log.total_cost()},
            {"mean_latency_ms", log.mean_latency()},
            {"slo_violation_rate", log.violation_rate()},
            {"triggers", st.triggers},
            {"changes", st.changes},
            {"avg_ms_moved_frac", st.avg_ms_moved_frac},
            {"placement_changes_per_day", st.changes_per_day},
            {"total_evaluations", log.total_evaluations}};
  j["adaptation_rate"] = st.adaptation_rate ? json(*st.adaptation_rate) : json(nullptr);
  return j;
}

}  // namespace carbonplace
