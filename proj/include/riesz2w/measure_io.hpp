#pragma once

// Measure file schema:
//   {"dim": n, "points": [{"x": [x1, ..., xn], "m": mass}, ...]}

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "riesz2w/geometry.hpp"

namespace riesz2w {

inline nlohmann::json to_json(const DiscreteMeasure& mu) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    pts.push_back({{"x", std::vector<double>(mu.point(i).begin(), mu.point(i).end())},
                   {"m", mu.mass(i)}});
  }
  return {{"dim", mu.dim()}, {"points", std::move(pts)}};
}

inline DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  auto where = [](std::size_t i, const char* key) {
    return "points[" + std::to_string(i) + "]." + key + ": ";
  };
  require(j.is_object(), ErrorKind::input, "measure: top level must be an object");
  require(j.contains("dim") && j["dim"].is_number_integer(), ErrorKind::input,
          "measure: \"dim\" must be an integer");
  const int dim = j["dim"].get<int>();
  require(dim >= 1, ErrorKind::input, "measure: \"dim\" must be positive");
  require(j.contains("points") && j["points"].is_array(), ErrorKind::input,
          "measure: \"points\" must be an array");
  const auto& pts = j["points"];
  std::vector<double> coords, masses;
  coords.reserve(pts.size() * dim);
  masses.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    require(p.is_object(), ErrorKind::input, "points[" + std::to_string(i) + "]: must be an object");
    require(p.contains("x") && p["x"].is_array(), ErrorKind::input,
            where(i, "x") + "must be an array");
    require(p["x"].size() == static_cast<std::size_t>(dim), ErrorKind::dimension_mismatch,
            where(i, "x") + "expected " + std::to_string(dim) + " coordinates, got " +
                std::to_string(p["x"].size()));
    for (const auto& c : p["x"]) {
      require(c.is_number(), ErrorKind::input, where(i, "x") + "coordinates must be numbers");
      const double v = c.get<double>();
      require(std::isfinite(v), ErrorKind::input, where(i, "x") + "coordinates must be finite");
      coords.push_back(v);
    }
    require(p.contains("m") && p["m"].is_number(), ErrorKind::input,
            where(i, "m") + "must be a number");
    const double m = p["m"].get<double>();
    require(std::isfinite(m) && m > 0.0, ErrorKind::input, where(i, "m") + "mass must be positive");
    masses.push_back(m);
  }
  return DiscreteMeasure(dim, std::move(coords), std::move(masses));
}

inline DiscreteMeasure parse_measure(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // The message carries "line L, column C".
    fail(ErrorKind::input, std::string("measure: ") + e.what());
  }
  return measure_from_json(j);
}

inline DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::input, "cannot open measure file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_measure(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

inline void save_measure(const DiscreteMeasure& mu, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::input, "cannot write " + path);
  out << to_json(mu).dump(1) << '\n';
}

}  // namespace riesz2w
