#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace carbonplace {

enum class ServiceKind { kFrontend, kDatabase, kCompute };

std::string to_string(ServiceKind kind);
ServiceKind parse_service_kind(const std::string& s);

struct Microservice {
  int id = 0;
  std::string name;
  ServiceKind kind = ServiceKind::kCompute;
  bool structurally_pinned = false;
  std::string profile_key;
};

// A call edge; `calls` is the number of sequential round trips per request.
struct Edge {
  int caller = 0;
  int callee = 0;
  int calls = 1;
};

struct Adjacent {
  std::size_t node;
  int calls;
  bool is_call;
};

// Immutable, validated application graph. Nodes are stored sorted by id and
// addressed internally by their position ("index").
class AppDag {
 public:
  AppDag() = default;

  // Order edges are orchestration-only dependencies: they constrain activation
  // order and latency but carry no payload and do not define subtrees.
  static AppDag build(std::vector<Microservice> nodes, std::vector<Edge> call_edges,
                      std::vector<std::pair<int, int>> order_edges, int frontend_id);

  const std::vector<Microservice>& nodes() const { return nodes_; }
  const std::vector<Edge>& call_edges() const { return calls_; }
  const std::vector<std::pair<int, int>>& order_edges() const { return order_; }
  int frontend_id() const { return frontend_; }
  std::size_t size() const { return nodes_.size(); }

  std::size_t index_of(int id) const;
  bool contains(int id) const { return index_.count(id) > 0; }
  const Microservice& node(std::size_t idx) const { return nodes_[idx]; }
  const std::vector<Adjacent>& preds(std::size_t idx) const { return preds_[idx]; }
  const std::vector<Adjacent>& succs(std::size_t idx) const { return succs_[idx]; }
  const std::vector<std::size_t>& topo_order() const { return topo_; }
  // Sinks sorted by id.
  const std::vector<std::size_t>& sinks() const { return sinks_; }
  // Node whose region the response leaves from: databases answer through
  // their calling service (smallest caller id), everything else is its own owner.
  std::size_t owner(std::size_t idx) const { return owner_[idx]; }

 private:
  std::vector<Microservice> nodes_;
  std::vector<Edge> calls_;
  std::vector<std::pair<int, int>> order_;
  int frontend_ = 0;
  std::map<int, std::size_t> index_;
  std::vector<std::vector<Adjacent>> preds_;
  std::vector<std::vector<Adjacent>> succs_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> sinks_;
  std::vector<std::size_t> owner_;
};

struct ActivationSchedule {
  std::vector<std::vector<int>> stages;
  std::map<int, int> stage_of;
};

struct SubtreeSpec {
  int root_id = 0;
  std::set<int> member_ids;
};

struct CriticalPath {
  std::vector<int> path;
  double length = 0.0;
};

AppDag parse_app(const nlohmann::json& j);
AppDag load_app(const std::string& path);
nlohmann::json app_to_json(const AppDag& dag);

// Longest-path levelization over non-database nodes; a database joins the
// stage of its latest caller.
ActivationSchedule activation_stages(const AppDag& dag);

CriticalPath structural_critical_path(const AppDag& dag, const std::map<int, double>& node_weights);

SubtreeSpec subtree(const AppDag& dag, int root_id);

}  // namespace carbonplace
