#include "mibo/csi/scenario_json.hpp"

#include <stdexcept>
#include <string>

namespace mibo::csi {
namespace {

using nlohmann::json;

json points_to_json(const std::vector<Point2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Point2> points_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw std::invalid_argument("scenario." + key + " must be a list of [x, y]");
  std::vector<Point2> pts;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) {
      throw std::invalid_argument("scenario." + key + " entries must be [x, y] pairs");
    }
    pts.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return pts;
}

}  // namespace

json scenario_to_json(const SimScenario& sc) {
  json states = json::array();
  for (const auto& s : sc.states) states.push_back({{"name", s.name}, {"gamma", s.gamma}});
  json j;
  j["room_width"] = sc.room_width;
  j["room_height"] = sc.room_height;
  j["tx"] = points_to_json(sc.tx);
  j["rx"] = points_to_json(sc.rx);
  j["subcarriers"] = sc.subcarriers;
  j["carrier_hz"] = sc.carrier_hz;
  j["spacing_hz"] = sc.spacing_hz;
  j["static_gain_ref"] = sc.static_gain_ref;
  j["dynamic_gain_ref"] = sc.dynamic_gain_ref;
  j["noise_variance"] = sc.noise_variance;
  j["static_paths"] = sc.static_paths;
  j["dynamic_paths"] = sc.dynamic_paths;
  j["grid_spacing"] = sc.grid_spacing;
  j["states"] = states;
  return j;
}

SimScenario scenario_from_json(const json& j, const SimScenario& base) {
  if (!j.is_object()) throw std::invalid_argument("scenario section must be an object");
  SimScenario sc = base;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "room_width") sc.room_width = v.get<double>();
      else if (key == "room_height") sc.room_height = v.get<double>();
      else if (key == "tx") sc.tx = points_from_json(v, key);
      else if (key == "rx") sc.rx = points_from_json(v, key);
      else if (key == "subcarriers") sc.subcarriers = v.get<std::size_t>();
      else if (key == "carrier_hz") sc.carrier_hz = v.get<double>();
      else if (key == "spacing_hz") sc.spacing_hz = v.get<double>();
      else if (key == "static_gain_ref") sc.static_gain_ref = v.get<double>();
      else if (key == "dynamic_gain_ref") sc.dynamic_gain_ref = v.get<double>();
      else if (key == "noise_variance") sc.noise_variance = v.get<double>();
      else if (key == "static_paths") sc.static_paths = v.get<std::size_t>();
      else if (key == "dynamic_paths") sc.dynamic_paths = v.get<std::size_t>();
      else if (key == "grid_spacing") sc.grid_spacing = v.get<double>();
      else if (key == "states") {
        sc.states.clear();
        for (const auto& s : v) sc.states.push_back({s.at("name").get<std::string>(), s.at("gamma").get<double>()});
      } else {
        throw std::invalid_argument("unknown key 'scenario." + key + "'");
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument("bad value for 'scenario." + key + "': " + e.what());
    }
  }
  return sc;
}

}  // namespace mibo::csi
