#include "carbonplace/app_model.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "carbonplace/common.hpp"

namespace carbonplace {

using nlohmann::json;

std::string to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::kFrontend:
      return "frontend";
    case ServiceKind::kDatabase:
      return "database";
    case ServiceKind::kCompute:
      return "compute";
  }
  return "compute";
}

ServiceKind parse_service_kind(const std::string& s) {
  if (s == "frontend") return ServiceKind::kFrontend;
  if (s == "database") return ServiceKind::kDatabase;
  if (s == "compute") return ServiceKind::kCompute;
  throw ValidationError("unknown service kind '" + s + "'");
}

AppDag AppDag::build(std::vector<Microservice> nodes, std::vector<Edge> call_edges,
                     std::vector<std::pair<int, int>> order_edges, int frontend_id) {
  AppDag g;
  std::sort(nodes.begin(), nodes.end(), [](const Microservice& a, const Microservice& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id < 0) throw ValidationError("negative service id");
    if (!g.index_.emplace(nodes[i].id, i).second)
      throw ValidationError("duplicate service id " + std::to_string(nodes[i].id));
    if (nodes[i].kind != ServiceKind::kCompute) nodes[i].structurally_pinned = true;
    if (nodes[i].profile_key.empty()) nodes[i].profile_key = nodes[i].name;
  }
  if (nodes.empty()) throw ValidationError("application has no services");
  int frontends = 0;
  for (const auto& n : nodes) frontends += n.kind == ServiceKind::kFrontend;
  if (frontends != 1) throw ValidationError("expected exactly one frontend, found " + std::to_string(frontends));
  auto fit = g.index_.find(frontend_id);
  if (fit == g.index_.end() || nodes[fit->second].kind != ServiceKind::kFrontend)
    throw ValidationError("frontend id does not name the frontend service");

  std::size_t n = nodes.size();
  g.preds_.assign(n, {});
  g.succs_.assign(n, {});
  auto idx = [&](int id) {
    auto it = g.index_.find(id);
    if (it == g.index_.end()) throw ValidationError("dangling edge endpoint " + std::to_string(id));
    return it->second;
  };
  auto add = [&](int u, int v, int calls, bool is_call) {
    std::size_t a = idx(u), b = idx(v);
    if (calls < 1) throw ValidationError("edge call multiplicity must be >= 1");
    if (nodes[a].kind == ServiceKind::kDatabase && nodes[b].kind != ServiceKind::kDatabase)
      throw ValidationError("database " + nodes[a].name + " has an outgoing edge to a compute node");
    if (nodes[b].kind == ServiceKind::kFrontend) throw ValidationError("frontend has an incoming edge");
    g.succs_[a].push_back({b, calls, is_call});
    g.preds_[b].push_back({a, calls, is_call});
  };
  for (const auto& e : call_edges) add(e.caller, e.callee, e.calls, true);
  for (const auto& [u, v] : order_edges) add(u, v, 1, false);
  auto by_node = [](const Adjacent& a, const Adjacent& b) { return a.node < b.node; };
  for (std::size_t i = 0; i < n; ++i) {
    std::stable_sort(g.preds_[i].begin(), g.preds_[i].end(), by_node);
    std::stable_sort(g.succs_[i].begin(), g.succs_[i].end(), by_node);
  }

  // Kahn's algorithm, smallest index first for a deterministic order.
  std::vector<int> indeg(n, 0);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = static_cast<int>(g.preds_[i].size());
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    std::size_t u = *ready.begin();
    ready.erase(ready.begin());
    g.topo_.push_back(u);
    for (const auto& s : g.succs_[u])
      if (--indeg[s.node] == 0) ready.insert(s.node);
  }
  if (g.topo_.size() != n) throw ValidationError("cycle detected in application graph");

  std::vector<bool> seen(n, false);
  std::deque<std::size_t> q{fit->second};
  seen[fit->second] = true;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop_front();
    for (const auto& s : g.succs_[u])
      if (!seen[s.node]) {
        seen[s.node] = true;
        q.push_back(s.node);
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ValidationError("service " + nodes[i].name + " unreachable from frontend");

  g.owner_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.owner_[i] = i;
    if (nodes[i].kind == ServiceKind::kDatabase) {
      for (const auto& p : g.preds_[i])
        if (p.is_call && nodes[p.node].kind != ServiceKind::kDatabase) {
          g.owner_[i] = p.node;
          break;
        }
    }
    if (g.succs_[i].empty()) g.sinks_.push_back(i);
  }
  g.nodes_ = std::move(nodes);
  g.calls_ = std::move(call_edges);
  g.order_ = std::move(order_edges);
  g.frontend_ = frontend_id;
  return g;
}

std::size_t AppDag::index_of(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown service id " + std::to_string(id));
  return it->second;
}

AppDag parse_app(const json& j) {
  try {
    std::vector<Microservice> nodes;
    for (const auto& s : j.at("services")) {
      Microservice m;
      m.id = s.at("id").get<int>();
      m.name = s.value("name", "s" + std::to_string(m.id));
      m.kind = parse_service_kind(s.value("kind", "compute"));
      m.profile_key = s.value("profile_key", m.name);
      m.structurally_pinned = m.kind != ServiceKind::kCompute;
      nodes.push_back(std::move(m));
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) throw ValidationError("edge must be [caller, callee(, calls)]");
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<int>() : 1});
    }
    std::vector<std::pair<int, int>> order;
    if (j.contains("order"))
      for (const auto& e : j.at("order")) {
        if (!e.is_array() || e.size() != 2) throw ValidationError("order edge must be [before, after]");
        order.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
    return AppDag::build(std::move(nodes), std::move(edges), std::move(order), j.at("frontend").get<int>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("application file: ") + e.what());
  }
}

AppDag load_app(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return parse_app(j);
}

json app_to_json(const AppDag& dag) {
  json j;
  j["services"] = json::array();
  for (const auto& m : dag.nodes())
    j["services"].push_back({{"id", m.id}, {"name", m.name}, {"kind", to_string(m.kind)}, {"profile_key", m.profile_key}});
  j["edges"] = json::array();
  for (const auto& e : dag.call_edges()) {
    if (e.calls == 1)
      j["edges"].push_back({e.caller, e.callee});
    else
      j["edges"].push_back({e.caller, e.callee, e.calls});
  }
  if (!dag.order_edges().empty()) {
    j["order"] = json::array();
    for (const auto& [u, v] : dag.order_edges()) j["order"].push_back({u, v});
  }
  j["frontend"] = dag.frontend_id();
  return j;
}

ActivationSchedule activation_stages(const AppDag& dag) {
  std::size_t n = dag.size();
  std::vector<int> level(n, 0);
  for (std::size_t u : dag.topo_order()) {
    if (dag.node(u).kind == ServiceKind::kDatabase) continue;
    int lv = 0;
    for (const auto& p : dag.preds(u))
      if (dag.node(p.node).kind != ServiceKind::kDatabase) lv = std::max(lv, level[p.node] + 1);
    level[u] = lv;
  }
  for (std::size_t u : dag.topo_order()) {
    if (dag.node(u).kind != ServiceKind::kDatabase) continue;
    int lv = 0;
    for (const auto& p : dag.preds(u)) lv = std::max(lv, level[p.node]);
    level[u] = lv;
  }
  ActivationSchedule s;
  int top = *std::max_element(level.begin(), level.end());
  s.stages.assign(static_cast<std::size_t>(top) + 1, {});
  for (std::size_t i = 0; i < n; ++i) {
    s.stages[static_cast<std::size_t>(level[i])].push_back(dag.node(i).id);
    s.stage_of[dag.node(i).id] = level[i];
  }
  return s;
}

CriticalPath structural_critical_path(const AppDag& dag, const std::map<int, double>& node_weights) {
  std::size_t n = dag.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = node_weights.find(dag.node(i).id);
    if (it == node_weights.end()) throw ValidationError("missing weight for service " + dag.node(i).name);
    w[i] = it->second;
  }
  // best[v]: heaviest v-to-sink path, lexicographically smallest on ties.
  std::vector<double> len(n, 0.0);
  std::vector<std::vector<int>> path(n);
  const auto& topo = dag.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    std::size_t v = *it;
    std::ptrdiff_t best = -1;
    for (const auto& s : dag.succs(v)) {
      if (best < 0 || len[s.node] > len[static_cast<std::size_t>(best)] ||
          (len[s.node] == len[static_cast<std::size_t>(best)] && path[s.node] < path[static_cast<std::size_t>(best)]))
        best = static_cast<std::ptrdiff_t>(s.node);
    }
    path[v] = {dag.node(v).id};
    len[v] = w[v];
    if (best >= 0) {
      const auto& tail = path[static_cast<std::size_t>(best)];
      path[v].insert(path[v].end(), tail.begin(), tail.end());
      len[v] += len[static_cast<std::size_t>(best)];
    }
  }
  std::size_t root = dag.index_of(dag.frontend_id());
  return {path[root], len[root]};
}

SubtreeSpec subtree(const AppDag& dag, int root_id) {
  std::size_t root = dag.index_of(root_id);
  if (dag.node(root).structurally_pinned)
    throw ValidationError("subtree root " + dag.node(root).name + " is structurally pinned");
  SubtreeSpec spec{root_id, {}};
  std::vector<bool> seen(dag.size(), false);
  std::vector<std::size_t> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    std::size_t u = stack.back();
    stack.pop_back();
    if (!dag.node(u).structurally_pinned) spec.member_ids.insert(dag.node(u).id);
    for (const auto& s : dag.succs(u))
      if (s.is_call && !seen[s.node]) {
        seen[s.node] = true;
        stack.push_back(s.node);
      }
  }
  return spec;
}

}  // namespace carbonplace
