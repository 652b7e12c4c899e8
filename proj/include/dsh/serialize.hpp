#pragma once
// JSON round-tripping for chart and homogeneous points.
//
// Wire format (field names are part of the external interface):
//   ChartPoint        {"chart":"H","surface":"hyperboloid","params":[..4..]}
//                     plus "eps":+1|-1 for the cone H-system only
//   HomogeneousPoint  {"surface":"cone","x":[..5..]}

#include <json.hpp>

#include "dsh/charts.hpp"

namespace dsh {

inline nlohmann::json to_json(const ChartPoint& cp) {
  nlohmann::json j{{"chart", to_string(cp.chart)},
                   {"surface", to_string(cp.surface)},
                   {"params", cp.p}};
  if (cp.chart == ChartId::H && cp.surface == Surface::Cone) j["eps"] = cp.eps;
  return j;
}

inline ChartPoint chart_point_from_json(const nlohmann::json& j) {
  ChartPoint cp;
  cp.chart = chart_from_string(j.at("chart").get<std::string>());
  cp.surface = surface_from_string(j.at("surface").get<std::string>());
  auto params = j.at("params");
  if (!params.is_array() || params.size() != 4)
    throw std::invalid_argument("chart point: params must have 4 entries");
  for (int k = 0; k < 4; ++k) cp.p[k] = params[k].get<double>();
  if (j.contains("eps")) cp.eps = j["eps"].get<int>();
  validate(cp);
  return cp;
}

inline nlohmann::json to_json(const HomogeneousPoint& hp) {
  return nlohmann::json{{"surface", to_string(hp.surface)}, {"x", hp.x}};
}

inline HomogeneousPoint homogeneous_from_json(const nlohmann::json& j) {
  auto xs = j.at("x");
  if (!xs.is_array() || xs.size() != 5)
    throw std::invalid_argument("homogeneous point: x must have 5 entries");
  std::array<double, 5> x{};
  for (int k = 0; k < 5; ++k) x[k] = xs[k].get<double>();
  return make_homogeneous(x, surface_from_string(j.at("surface").get<std::string>()));
}

}  // namespace dsh
