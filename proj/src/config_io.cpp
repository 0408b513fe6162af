#include "vadelay/config_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vadelay/errors.hpp"

namespace vadelay {

namespace {

using nlohmann::json;

double require_number(const json& obj, const char* key, const std::string& at) {
  if (!obj.contains(key))
    throw ValidationError("config: " + at + " is missing \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ValidationError("config: " + at + " \"" + key +
                          "\" must be a number");
  return v.get<double>();
}

double optional_number(const json& obj, const char* key, double fallback,
                       const std::string& at) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ValidationError("config: " + at + " \"" + key +
                          "\" must be a number");
  return v.get<double>();
}

}  // namespace

RawIntersection parse_intersection(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ValidationError("config: top level must be an object");
  if (!doc.contains("flows") || !doc["flows"].is_array() ||
      doc["flows"].empty())
    throw ValidationError("config: \"flows\" must be a non-empty array");
  if (!doc.contains("groups") || !doc["groups"].is_array() ||
      doc["groups"].empty())
    throw ValidationError("config: \"groups\" must be a non-empty array");

  RawIntersection raw;
  int fi = 0;
  for (const json& jf : doc["flows"]) {
    std::string at = "flows[" + std::to_string(fi++) + "]";
    if (!jf.is_object())
      throw ValidationError("config: " + at + " must be an object");
    RawFlow f;
    if (!jf.contains("id") || !jf["id"].is_string() ||
        jf["id"].get<std::string>().empty())
      throw ValidationError("config: " + at +
                            " needs a non-empty string \"id\"");
    f.id = jf["id"].get<std::string>();
    bool has_rate = jf.contains("arrival_rate_per_hour");
    bool has_share = jf.contains("relative_load");
    if (has_rate == has_share)
      throw ValidationError("config: " + at +
                            " needs exactly one of \"arrival_rate_per_hour\" "
                            "and \"relative_load\"");
    if (has_rate)
      f.arrival_rate_per_hour = require_number(jf, "arrival_rate_per_hour", at);
    else
      f.relative_load = require_number(jf, "relative_load", at);
    f.saturation_rate_per_hour =
        require_number(jf, "saturation_rate_per_hour", at);
    f.headway_scv = optional_number(jf, "headway_scv", 1.0, at);
    f.interarrival_scv = optional_number(jf, "interarrival_scv", 1.0, at);
    raw.flows.push_back(std::move(f));
  }
  int gi = 0;
  for (const json& jg : doc["groups"]) {
    std::string at = "groups[" + std::to_string(gi++) + "]";
    if (!jg.is_object())
      throw ValidationError("config: " + at + " must be an object");
    RawGroup g;
    if (!jg.contains("flow_ids") || !jg["flow_ids"].is_array() ||
        jg["flow_ids"].empty())
      throw ValidationError("config: " + at +
                            " needs a non-empty \"flow_ids\" array");
    for (const json& id : jg["flow_ids"]) {
      if (!id.is_string())
        throw ValidationError("config: " + at +
                              " \"flow_ids\" entries must be strings");
      g.flow_ids.push_back(id.get<std::string>());
    }
    g.all_red_seconds = optional_number(jg, "all_red_seconds", 0.0, at);
    g.all_red_scv = optional_number(jg, "all_red_scv", 0.0, at);
    if (g.all_red_seconds < 0.0)
      throw ValidationError("config: " + at +
                            " \"all_red_seconds\" must not be negative");
    raw.groups.push_back(std::move(g));
  }
  return raw;
}

RawIntersection load_intersection(const std::string& name_or_path) {
  const auto& reg = detail::preset_registry();
  auto it = reg.find(name_or_path);
  if (it != reg.end()) return parse_intersection(it->second);
  std::ifstream in(name_or_path);
  if (!in) {
    std::string msg =
        "config: \"" + name_or_path + "\" is neither a bundled preset (";
    bool first = true;
    for (const auto& [name, text] : reg) {
      (void)text;
      if (!first) msg += ", ";
      msg += name;
      first = false;
    }
    msg += ") nor a readable file";
    throw ValidationError(msg);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_intersection(ss.str());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::preset_registry()) {
    (void)text;
    names.push_back(name);
  }
  return names;
}

}  // namespace vadelay
