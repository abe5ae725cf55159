#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "spl/instance.hpp"

namespace spl {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

namespace {

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character.
    const std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < offset; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    const auto begin = text.rfind('\n', offset == 0 ? 0 : offset - 1);
    const auto line_start = (begin == std::string::npos || offset == 0) ? 0 : begin + 1;
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string snippet = text.substr(line_start, std::min<std::size_t>(line_end - line_start, 120));
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         e.what() + "\n  | " + snippet,
                     line, column);
  }
}

// Schema helpers. `where` is a JSON-pointer-like path for error messages.

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InstanceError(where + ": expected an object");
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }) ==
        allowed.end())
      throw InstanceError(where + ": unknown field '" + item.key() + "'");
  }
  for (const char* k : allowed)
    if (!j.contains(k)) throw InstanceError(where + ": missing field '" + std::string(k) + "'");
}

const json& array_field(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw InstanceError(where + "/" + key + ": expected an array");
  return v;
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw InstanceError(where + "/" + key + ": expected a string");
  return v.get<std::string>();
}

double number_field(const json& v, const std::string& where) {
  if (!v.is_number()) throw InstanceError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InstanceError(where + ": number is not finite");
  return d;
}

PlpInstance plp_from_json(const json& root) {
  require_object(root, "", {"resources", "agents"});
  PlpInstance inst;
  std::unordered_map<std::string, std::size_t> index;
  const auto& resources = array_field(root, "resources", "");
  for (std::size_t k = 0; k < resources.size(); ++k) {
    const std::string where = "/resources/" + std::to_string(k);
    require_object(resources[k], where, {"id", "capacity"});
    Resource r{string_field(resources[k], "id", where),
               number_field(resources[k].at("capacity"), where + "/capacity")};
    if (!index.emplace(r.id, k).second) throw InstanceError(where + ": duplicate resource id '" + r.id + "'");
    inst.resources.push_back(std::move(r));
  }
  const auto& agents = array_field(root, "agents", "");
  inst.agents.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "/agents/" + std::to_string(i);
    require_object(agents[i], where, {"id", "options"});
    Agent agent{string_field(agents[i], "id", where), {}};
    const auto& options = array_field(agents[i], "options", where);
    for (std::size_t o = 0; o < options.size(); ++o) {
      const std::string ow = where + "/options/" + std::to_string(o);
      require_object(options[o], ow, {"id", "weight", "usage"});
      Option opt{string_field(options[o], "id", ow), number_field(options[o].at("weight"), ow + "/weight"), {}};
      const auto& usage = options[o].at("usage");
      if (!usage.is_object()) throw InstanceError(ow + "/usage: expected an object");
      for (const auto& item : usage.items()) {
        const auto it = index.find(item.key());
        if (it == index.end()) throw InstanceError(ow + "/usage: unknown resource id '" + item.key() + "'");
        opt.usage.push_back({it->second, number_field(item.value(), ow + "/usage/" + item.key())});
      }
      std::sort(opt.usage.begin(), opt.usage.end(),
                [](const Usage& a, const Usage& b) { return a.resource < b.resource; });
      agent.options.push_back(std::move(opt));
    }
    inst.agents.push_back(std::move(agent));
  }
  validate(inst);
  return inst;
}

DaInstance da_from_json(const json& root) {
  require_object(root, "", {"advertisers", "impressions"});
  DaInstance da;
  std::unordered_map<std::string, std::size_t> index;
  const auto& advertisers = array_field(root, "advertisers", "");
  for (std::size_t k = 0; k < advertisers.size(); ++k) {
    const std::string where = "/advertisers/" + std::to_string(k);
    require_object(advertisers[k], where, {"id", "demand"});
    const auto& d = advertisers[k].at("demand");
    if (!d.is_number_integer()) throw InstanceError(where + "/demand: expected an integer");
    Advertiser a{string_field(advertisers[k], "id", where), d.get<std::int64_t>()};
    if (!index.emplace(a.id, k).second) throw InstanceError(where + ": duplicate advertiser id '" + a.id + "'");
    da.advertisers.push_back(std::move(a));
  }
  const auto& impressions = array_field(root, "impressions", "");
  da.impressions.reserve(impressions.size());
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    const std::string where = "/impressions/" + std::to_string(i);
    require_object(impressions[i], where, {"id", "edges"});
    Impression imp{string_field(impressions[i], "id", where), {}};
    const auto& edges = array_field(impressions[i], "edges", where);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::string ew = where + "/edges/" + std::to_string(e);
      require_object(edges[e], ew, {"advertiser", "weight"});
      const auto adv = string_field(edges[e], "advertiser", ew);
      const auto it = index.find(adv);
      if (it == index.end()) throw InstanceError(ew + ": unknown advertiser id '" + adv + "'");
      imp.edges.push_back({it->second, number_field(edges[e].at("weight"), ew + "/weight")});
    }
    da.impressions.push_back(std::move(imp));
  }
  validate(da);
  return da;
}

}  // namespace

std::string to_json_string(const PlpInstance& inst) {
  ordered_json root;
  root["resources"] = ordered_json::array();
  for (const auto& r : inst.resources) root["resources"].push_back({{"id", r.id}, {"capacity", r.capacity}});
  root["agents"] = ordered_json::array();
  for (const auto& agent : inst.agents) {
    ordered_json options = ordered_json::array();
    for (const auto& opt : agent.options) {
      ordered_json usage = ordered_json::object();
      for (const auto& u : opt.usage) usage[inst.resources[u.resource].id] = u.amount;
      options.push_back({{"id", opt.id}, {"weight", opt.weight}, {"usage", std::move(usage)}});
    }
    root["agents"].push_back({{"id", agent.id}, {"options", std::move(options)}});
  }
  return root.dump(1) + "\n";
}

std::string to_json_string(const DaInstance& da) {
  ordered_json root;
  root["advertisers"] = ordered_json::array();
  for (const auto& a : da.advertisers) root["advertisers"].push_back({{"id", a.id}, {"demand", a.demand}});
  root["impressions"] = ordered_json::array();
  for (const auto& imp : da.impressions) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : imp.edges)
      edges.push_back({{"advertiser", da.advertisers[e.advertiser].id}, {"weight", e.weight}});
    root["impressions"].push_back({{"id", imp.id}, {"edges", std::move(edges)}});
  }
  return root.dump(1) + "\n";
}

PlpInstance plp_from_json_string(const std::string& text) { return plp_from_json(parse_text(text)); }

DaInstance da_from_json_string(const std::string& text) { return da_from_json(parse_text(text)); }

AnyInstance any_from_json_string(const std::string& text) {
  const json root = parse_text(text);
  if (root.is_object() && (root.contains("advertisers") || root.contains("impressions")))
    return da_from_json(root);
  return plp_from_json(root);
}

void save(const PlpInstance& inst, const std::filesystem::path& path) { write_file(path, to_json_string(inst)); }

void save(const DaInstance& da, const std::filesystem::path& path) { write_file(path, to_json_string(da)); }

PlpInstance load_plp(const std::filesystem::path& path) { return plp_from_json_string(read_file(path)); }

DaInstance load_da(const std::filesystem::path& path) { return da_from_json_string(read_file(path)); }

AnyInstance load_any(const std::filesystem::path& path) { return any_from_json_string(read_file(path)); }

}  // namespace spl
