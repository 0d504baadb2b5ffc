#include "carbonplace/infra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace carbonplace {

using nlohmann::json;

namespace {

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError(what + ": not a number '" + s + "'");
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ci_at(const CarbonTrace& trace, Timestamp t) {
  if (t < trace.start || t >= trace.end())
    throw ValidationError("timestamp " + format_timestamp(t) + " outside carbon trace of " + trace.region_id);
  return trace.values[static_cast<std::size_t>((t - trace.start) / kHour)];
}

double PricingCatalog::egress_price(const std::string& from, const std::string& to) const {
  if (from == to) return 0.0;
  auto it = egress.find(from);
  if (it != egress.end()) {
    auto jt = it->second.find(to);
    if (jt != it->second.end()) return jt->second;
  }
  throw ValidationError("no egress price " + from + " -> " + to);
}

InstanceChoice smallest_instance(const PricingCatalog& catalog, const std::string& region, double cpu, double mem) {
  auto it = catalog.instances.find(region);
  if (it == catalog.instances.end()) throw ValidationError("no instances priced in region " + region);
  for (const auto& inst : it->second)
    if (inst.vcpu >= cpu && inst.mem_gb >= mem) return {inst.type_name, inst.price};
  throw ValidationError("no instance in " + region + " fits " + format_double(cpu) + " cores / " + format_double(mem) +
                        " GB");
}

InstanceType canonical_shape(const PricingCatalog& catalog, const std::string& region) {
  auto it = catalog.instances.find(region);
  if (it == catalog.instances.end() || it->second.empty())
    throw ValidationError("no instances priced in region " + region);
  return it->second[(it->second.size() - 1) / 2];
}

double reference_price(const PricingCatalog& catalog, const std::string& region, const InstanceType& shape) {
  return smallest_instance(catalog, region, shape.vcpu, shape.mem_gb).price;
}

RttMatrix::RttMatrix(std::vector<std::string> regions, std::vector<double> values)
    : regions_(std::move(regions)), ms_(std::move(values)) {
  std::size_t n = regions_.size();
  if (ms_.size() != n * n) throw ValidationError("rtt matrix is not square");
  for (std::size_t i = 0; i < n; ++i)
    if (!index_.emplace(regions_[i], i).second) throw ValidationError("duplicate region in rtt matrix: " + regions_[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (at(i, j) < 0) throw ValidationError("negative rtt " + regions_[i] + " -> " + regions_[j]);
      if (at(i, i) > at(i, j)) throw ValidationError("rtt diagonal of " + regions_[i] + " exceeds an off-diagonal entry");
    }
}

std::size_t RttMatrix::index_of(const std::string& region) const {
  auto it = index_.find(region);
  if (it == index_.end()) throw ValidationError("unknown region " + region);
  return it->second;
}

double rtt(const RttMatrix& matrix, const std::string& r1, const std::string& r2) {
  return matrix.at(matrix.index_of(r1), matrix.index_of(r2));
}

const Region& Infra::region(const std::string& id) const {
  for (const auto& r : regions)
    if (r.id == id) return r;
  throw ValidationError("unknown region " + id);
}

bool Infra::has_region(const std::string& id) const {
  return std::any_of(regions.begin(), regions.end(), [&](const Region& r) { return r.id == id; });
}

CarbonTrace parse_carbon_csv(const std::string& region_id, const std::string& text) {
  CarbonTrace tr;
  tr.region_id = region_id;
  auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("carbon trace for " + region_id + " is empty");
  std::size_t first = 0;
  if (split_csv_line(lines[0])[0] == "timestamp_utc") first = 1;
  Timestamp prev = 0;
  for (std::size_t i = first; i < lines.size(); ++i) {
    auto f = split_csv_line(lines[i]);
    if (f.size() != 2) throw ValidationError("carbon/" + region_id + ".csv line " + std::to_string(i + 1) + ": expected 2 fields");
    Timestamp t = parse_timestamp(f[0]);
    double ci = parse_number(f[1], "carbon/" + region_id + ".csv");
    if (ci < 0) throw ValidationError("negative carbon intensity in " + region_id);
    if (i == first) {
      if (t % kHour != 0) throw ValidationError("carbon trace of " + region_id + " not on the hour grid");
      tr.start = t;
    } else if (t != prev + kHour) {
      throw ValidationError("carbon trace of " + region_id + " has a gap or disorder at " + f[0]);
    }
    prev = t;
    tr.values.push_back(ci);
  }
  if (tr.values.empty()) throw ValidationError("carbon trace for " + region_id + " is empty");
  return tr;
}

std::string carbon_to_csv(const CarbonTrace& trace) {
  std::string out = "timestamp_utc,ci_g_per_kwh\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i)
    out += format_timestamp(trace.start + static_cast<Timestamp>(i) * kHour) + "," + format_double(trace.values[i]) + "\n";
  return out;
}

PricingCatalog parse_pricing(const json& j) {
  PricingCatalog c;
  try {
    c.storage_price = j.at("storage_price").get<double>();
    if (c.storage_price < 0) throw ValidationError("negative storage price");
    for (const auto& [region, list] : j.at("instances").items()) {
      auto& v = c.instances[region];
      for (const auto& inst : list) {
        InstanceType t{inst.at("type").get<std::string>(), inst.at("vcpu").get<double>(), inst.at("mem_gb").get<double>(),
                       inst.at("price").get<double>()};
        if (t.vcpu < 0 || t.mem_gb < 0 || t.price < 0) throw ValidationError("negative instance field in " + region);
        v.push_back(std::move(t));
      }
      std::stable_sort(v.begin(), v.end(), [](const InstanceType& a, const InstanceType& b) {
        if (a.vcpu != b.vcpu) return a.vcpu < b.vcpu;
        if (a.mem_gb != b.mem_gb) return a.mem_gb < b.mem_gb;
        return a.price < b.price;
      });
    }
    for (const auto& [from, row] : j.at("egress").items())
      for (const auto& [to, price] : row.items()) {
        double p = price.get<double>();
        if (p < 0) throw ValidationError("negative egress price " + from + " -> " + to);
        if (from == to) {
          if (p != 0.0) throw ValidationError("intra-region egress must be 0 for " + from);
          continue;
        }
        c.egress[from][to] = p;
      }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("pricing: ") + e.what());
  }
  return c;
}

json pricing_to_json(const PricingCatalog& c) {
  json j;
  j["storage_price"] = c.storage_price;
  j["instances"] = json::object();
  for (const auto& [region, list] : c.instances) {
    json arr = json::array();
    for (const auto& t : list) arr.push_back({{"type", t.type_name}, {"vcpu", t.vcpu}, {"mem_gb", t.mem_gb}, {"price", t.price}});
    j["instances"][region] = arr;
  }
  j["egress"] = json::object();
  for (const auto& [from, row] : c.egress)
    for (const auto& [to, p] : row) j["egress"][from][to] = p;
  return j;
}

RttMatrix parse_rtt_csv(const std::string& text) {
  auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("rtt.csv is empty");
  auto header = split_csv_line(lines[0]);
  std::vector<std::string> regions(header.begin() + 1, header.end());
  if (lines.size() != regions.size() + 1) throw ValidationError("rtt.csv is not square");
  std::vector<double> values;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    auto f = split_csv_line(lines[i + 1]);
    if (f.size() != regions.size() + 1 || f[0] != regions[i])
      throw ValidationError("rtt.csv row " + std::to_string(i + 1) + " does not match header");
    for (std::size_t k = 1; k < f.size(); ++k) values.push_back(parse_number(f[k], "rtt.csv"));
  }
  return RttMatrix(std::move(regions), std::move(values));
}

std::string rtt_to_csv(const RttMatrix& m) {
  std::string out;
  for (const auto& r : m.regions()) out += "," + r;
  out += "\n";
  for (std::size_t i = 0; i < m.regions().size(); ++i) {
    out += m.regions()[i];
    for (std::size_t j = 0; j < m.regions().size(); ++j) out += "," + format_double(m.at(i, j));
    out += "\n";
  }
  return out;
}

std::vector<Region> parse_regions(const json& j) {
  std::vector<Region> out;
  try {
    for (const auto& r : j) {
      Region reg{r.at("id").get<std::string>(), r.value("name", r.at("id").get<std::string>()),
                 r.value("group", std::string())};
      if (reg.sovereignty_group.empty()) throw ValidationError("region " + reg.id + " has no sovereignty group");
      for (const auto& o : out)
        if (o.id == reg.id) throw ValidationError("duplicate region " + reg.id);
      out.push_back(std::move(reg));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("regions: ") + e.what());
  }
  return out;
}

json regions_to_json(const std::vector<Region>& regions) {
  json j = json::array();
  for (const auto& r : regions) j.push_back({{"id", r.id}, {"name", r.display_name}, {"group", r.sovereignty_group}});
  return j;
}

void validate_infra(const Infra& infra) {
  if (infra.regions.empty()) throw ValidationError("infrastructure has no regions");
  for (const auto& r : infra.regions) {
    if (!infra.carbon.count(r.id)) throw ValidationError("missing carbon trace for " + r.id);
    auto it = infra.pricing.instances.find(r.id);
    if (it == infra.pricing.instances.end() || it->second.empty())
      throw ValidationError("missing instance pricing for " + r.id);
    infra.rtt.index_of(r.id);
    for (const auto& o : infra.regions)
      if (o.id != r.id) infra.pricing.egress_price(r.id, o.id);
  }
}

Infra load_infra(const std::string& dir) {
  namespace fs = std::filesystem;
  Infra infra;
  auto parse_json_file = [](const std::string& path) {
    try {
      return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ": " + e.what());
    }
  };
  infra.regions = parse_regions(parse_json_file((fs::path(dir) / "regions.json").string()));
  for (const auto& r : infra.regions) {
    auto path = fs::path(dir) / "carbon" / (r.id + ".csv");
    if (!fs::exists(path)) throw ValidationError("missing carbon trace for " + r.id);
    infra.carbon.emplace(r.id, parse_carbon_csv(r.id, read_file(path.string())));
  }
  infra.pricing = parse_pricing(parse_json_file((fs::path(dir) / "pricing.json").string()));
  infra.rtt = parse_rtt_csv(read_file((fs::path(dir) / "rtt.csv").string()));
  validate_infra(infra);
  return infra;
}

void save_infra(const Infra& infra, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "carbon");
  write_file((fs::path(dir) / "regions.json").string(), regions_to_json(infra.regions).dump(2) + "\n");
  for (const auto& [id, tr] : infra.carbon) write_file((fs::path(dir) / "carbon" / (id + ".csv")).string(), carbon_to_csv(tr));
  write_file((fs::path(dir) / "pricing.json").string(), pricing_to_json(infra.pricing).dump(2) + "\n");
  write_file((fs::path(dir) / "rtt.csv").string(), rtt_to_csv(infra.rtt));
}

}  // namespace carbonplace
