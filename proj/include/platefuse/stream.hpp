#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "platefuse/engine.hpp"
#include "platefuse/layout.hpp"

namespace platefuse {

/// Malformed input. `line` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PlateGroup {
  std::string plate_id;
  std::vector<PlateFrame> frames;
};

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct StreamData {
  std::vector<PlateGroup> groups;  // in order of first appearance
  std::vector<LineError> errors;   // lenient mode only
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

inline double number(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw std::invalid_argument(std::string("field '") + key + "' is not finite");
  return d;
}

inline std::string string_field(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

inline Box parse_box(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 4) {
    throw std::invalid_argument(std::string(what) + " must be [x, y, w, h]");
  }
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw std::invalid_argument(std::string(what) + " has a non-numeric entry");
    }
  }
  Box b{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  if (!(b.w > 0.0) || !(b.h > 0.0)) {
    throw std::invalid_argument(std::string(what) + " must have positive width and height");
  }
  return b;
}

inline PlateFrame parse_frame(const json& rec, const Alphabet& alphabet) {
  if (!rec.is_object()) throw std::invalid_argument("record is not an object");
  PlateFrame f;
  f.plate_id = string_field(rec, "plate_id");
  const json& frame = require(rec, "frame");
  if (!frame.is_number_integer()) throw std::invalid_argument("field 'frame' is not an integer");
  f.frame_index = frame.get<std::int64_t>();
  f.plate_box = parse_box(require(rec, "plate_box"), "plate_box");
  if (rec.contains("tilt_hint") && !rec.at("tilt_hint").is_null()) {
    f.tilt_hint = number(rec, "tilt_hint");
  }

  if (rec.contains("vehicles")) {
    const json& vehicles = rec.at("vehicles");
    if (!vehicles.is_array()) throw std::invalid_argument("field 'vehicles' is not an array");
    for (const auto& v : vehicles) {
      VehicleBox vb;
      vb.frame_index = f.frame_index;
      vb.vehicle_id = string_field(v, "id");
      vb.box = parse_box(require(v, "box"), "vehicle box");
      vb.vehicle_class = v.contains("class") ? string_field(v, "class") : std::string();
      f.vehicles.push_back(std::move(vb));
    }
  }

  const json& chars = require(rec, "chars");
  if (!chars.is_array()) throw std::invalid_argument("field 'chars' is not an array");
  for (const auto& c : chars) {
    CharDetection d;
    d.center = {number(c, "cx"), number(c, "cy")};
    d.width = number(c, "w");
    d.height = number(c, "h");
    if (!(d.width > 0.0) || !(d.height > 0.0)) {
      throw std::invalid_argument("character box must have positive width and height");
    }
    const std::string label = string_field(c, "class");
    if (label.size() != 1 || !alphabet.find(label[0])) {
      throw std::invalid_argument("unknown character class '" + label + "'");
    }
    d.cls = *alphabet.find(label[0]);
    d.confidence = number(c, "conf");
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      throw std::invalid_argument("confidence outside [0, 1]");
    }
    f.detections.push_back(d);
  }
  return f;
}

inline json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

}  // namespace detail

/// Parses line-delimited frame records. In strict mode the first bad line
/// throws DataError; otherwise bad lines are skipped and listed in `errors`.
inline StreamData read_stream(std::istream& in, bool strict = true,
                              const Alphabet& alphabet = Alphabet::merged_latin()) {
  StreamData out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      PlateFrame frame = detail::parse_frame(rec, alphabet);
      auto group = std::find_if(out.groups.begin(), out.groups.end(),
                                [&](const auto& g) { return g.plate_id == frame.plate_id; });
      if (group == out.groups.end()) {
        out.groups.push_back({frame.plate_id, {}});
        group = std::prev(out.groups.end());
      } else if (frame.frame_index <= group->frames.back().frame_index) {
        throw std::invalid_argument("frame index not increasing for plate '" + frame.plate_id + "'");
      }
      group->frames.push_back(std::move(frame));
    } catch (const std::exception& e) {
      if (strict) throw DataError(lineno, e.what());
      out.errors.push_back({lineno, e.what()});
    }
  }
  if (in.bad()) throw DataError(0, "read error");
  return out;
}

inline StreamData read_stream(const std::string& path, bool strict = true,
                              const Alphabet& alphabet = Alphabet::merged_latin()) {
  std::ifstream in(path);
  if (!in) throw DataError(0, "cannot open '" + path + "'");
  return read_stream(in, strict, alphabet);
}

inline std::string frame_to_json(const PlateFrame& f,
                                 const Alphabet& alphabet = Alphabet::merged_latin()) {
  using nlohmann::json;
  json rec;
  rec["plate_id"] = f.plate_id;
  rec["frame"] = f.frame_index;
  rec["plate_box"] = detail::box_json(f.plate_box);
  if (f.tilt_hint) rec["tilt_hint"] = *f.tilt_hint;
  json vehicles = json::array();
  for (const auto& v : f.vehicles) {
    vehicles.push_back({{"id", v.vehicle_id}, {"box", detail::box_json(v.box)}, {"class", v.vehicle_class}});
  }
  rec["vehicles"] = std::move(vehicles);
  json chars = json::array();
  for (const auto& d : f.detections) {
    chars.push_back({{"cx", d.center.x},
                     {"cy", d.center.y},
                     {"w", d.width},
                     {"h", d.height},
                     {"class", std::string(1, alphabet.label(d.cls))},
                     {"conf", d.confidence}});
  }
  rec["chars"] = std::move(chars);
  return rec.dump();
}

inline void write_stream(std::ostream& out, std::span<const PlateFrame> frames,
                         const Alphabet& alphabet = Alphabet::merged_latin()) {
  for (const auto& f : frames) out << frame_to_json(f, alphabet) << '\n';
}

inline std::string readout_to_json(const PlateResult& r) {
  using nlohmann::json;
  json rec;
  rec["plate_id"] = r.plate_id;
  rec["text"] = r.readout.text;
  rec["vehicle_id"] = r.vehicle_id ? json(*r.vehicle_id) : json(nullptr);
  json chars = json::array();
  for (const auto& c : r.readout.chars) {
    chars.push_back({{"class", std::string(1, c.label)},
                     {"score", c.score},
                     {"cx", c.mean_position.x},
                     {"cy", c.mean_position.y}});
  }
  rec["chars"] = std::move(chars);
  rec["alpha_final_deg"] = rad_to_deg(r.alpha_final);
  return rec.dump();
}

/// Settings shared by the CLI commands; loadable from a `key = value` file.
struct RunConfig {
  CtmConfig ctm;
  double gamma_tilt_noise = 1.0;
  std::uint64_t seed = 7;
  bool strict = true;
};

namespace detail {

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& v) {
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("expected a number, got '" + v + "'");
  return d;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline EpsilonMode parse_epsilon_mode(const std::string& v) {
  if (v == "absolute") return EpsilonMode::absolute;
  if (v == "relative") return EpsilonMode::relative;
  throw std::invalid_argument("epsilon_mode must be 'absolute' or 'relative'");
}

/// Applies one setting; throws std::invalid_argument on unknown keys or bad values.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "epsilon") {
    cfg.ctm.epsilon = detail::parse_double(value);
    if (!(cfg.ctm.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  } else if (key == "epsilon_mode") {
    cfg.ctm.epsilon_mode = parse_epsilon_mode(value);
  } else if (key == "min_hits") {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size() || v < 1) throw std::invalid_argument("min_hits must be a positive integer");
    cfg.ctm.min_hits = v;
  } else if (key == "layout") {
    cfg.ctm.layout = LayoutSpec::parse(value);
  } else if (key == "enable_rotation") {
    cfg.ctm.enable_rotation = detail::parse_bool(value);
  } else if (key == "gamma_tilt_noise") {
    cfg.gamma_tilt_noise = detail::parse_double(value);
    if (cfg.gamma_tilt_noise < 0.0) throw std::invalid_argument("gamma_tilt_noise must be >= 0");
  } else if (key == "seed") {
    std::size_t used = 0;
    cfg.seed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("seed must be an unsigned integer");
  } else if (key == "strict") {
    cfg.strict = detail::parse_bool(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

/// `key = value` lines; '#' starts a comment.
inline RunConfig read_config(std::istream& in, RunConfig cfg = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(lineno, "expected 'key = value'");
    try {
      apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw DataError(lineno, e.what());
    }
  }
  return cfg;
}

inline RunConfig read_config(const std::string& path, RunConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw DataError(0, "cannot open '" + path + "'");
  return read_config(in, std::move(cfg));
}

}  // namespace platefuse
