#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "platefuse/geometry.hpp"
#include "platefuse/layout.hpp"
#include "platefuse/tracker.hpp"

namespace platefuse {

/// Axis-aligned box, (x, y) top-left, in image pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  Point2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  double area() const { return w * h; }
  bool contains(Point2 p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }

  friend bool operator==(const Box&, const Box&) = default;
};

struct VehicleBox {
  std::int64_t frame_index = 0;
  Box box;
  std::string vehicle_id;
  std::string vehicle_class;

  friend bool operator==(const VehicleBox&, const VehicleBox&) = default;
};

/// All character detections of one plate at one frame. Detection centers are
/// plate-local and unrectified.
struct PlateFrame {
  std::string plate_id;
  std::int64_t frame_index = 0;
  Box plate_box;
  std::optional<double> tilt_hint;  // degrees; simulation ground truth only
  std::vector<VehicleBox> vehicles;
  std::vector<CharDetection> detections;

  /// Rotation pivot: the plate box center in plate-local coordinates.
  Point2 pivot() const { return {0.5 * plate_box.w, 0.5 * plate_box.h}; }

  friend bool operator==(const PlateFrame&, const PlateFrame&) = default;
};

/// Vehicle whose box contains the plate center; the smallest such box wins,
/// then the earliest listed.
inline std::optional<std::string> match_plate_to_vehicle(const Box& plate_box,
                                                         std::span<const VehicleBox> vehicles) {
  const Point2 c = plate_box.center();
  const VehicleBox* best = nullptr;
  for (const auto& v : vehicles) {
    if (!v.box.contains(c)) continue;
    if (!best || v.box.area() < best->box.area()) best = &v;
  }
  if (!best) return std::nullopt;
  return best->vehicle_id;
}

enum class EpsilonMode { absolute, relative };

struct CtmConfig {
  /// Pixels in absolute mode; a multiple of the frame's median character
  /// width in relative mode.
  double epsilon = 0.5;
  EpsilonMode epsilon_mode = EpsilonMode::relative;
  int min_hits = 2;
  LayoutSpec layout = LayoutSpec::brazilian();
  bool enable_rotation = true;
};

/// Matching gate for one frame.
inline double frame_epsilon(std::span<const CharDetection> detections, const CtmConfig& config) {
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (config.epsilon_mode == EpsilonMode::absolute || detections.empty()) return config.epsilon;
  std::vector<double> widths;
  widths.reserve(detections.size());
  for (const auto& d : detections) widths.push_back(d.width);
  const auto mid = widths.begin() + static_cast<std::ptrdiff_t>(widths.size() / 2);
  std::nth_element(widths.begin(), mid, widths.end());
  double median = *mid;
  if (widths.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(widths.begin(), mid));
  }
  return config.epsilon * median;
}

struct FrameTrace {
  double alpha = 0.0;  // rectification applied to this frame, radians
  double beta = 0.0;   // residual measured on the rectified centers
  bool slope_defined = false;
  std::size_t tracks_before = 0;
  std::size_t tracks_after = 0;
  UpdateStats update;
};

/// Streaming readout of a single plate. Frames must arrive in order.
///
/// Each frame is rotated by the current alpha about the plate center, the
/// residual slope of the rotated centers is folded into alpha for the next
/// frame, and the rotated detections update the track set.
class PlateEngine {
 public:
  explicit PlateEngine(CtmConfig config, const Alphabet& alphabet = Alphabet::merged_latin())
      : config_(std::move(config)), alphabet_(&alphabet) {}

  /// Rectification the next frame will receive, radians.
  double alpha() const { return rotation_.alpha; }
  const RotationState& rotation() const { return rotation_; }
  const TrackSet& tracks() const { return tracks_; }
  std::size_t frames_seen() const { return frames_seen_; }

  FrameTrace push(const PlateFrame& frame) {
    if (frames_seen_ > 0 && frame.frame_index <= last_frame_) {
      throw std::invalid_argument("frames out of order for plate " + frame.plate_id);
    }
    if (!(frame.plate_box.w > 0.0) || !(frame.plate_box.h > 0.0)) {
      throw std::invalid_argument("plate box must have positive size");
    }
    for (const auto& d : frame.detections) check_detection(d, alphabet_->size());

    FrameTrace trace;
    trace.alpha = rotation_.alpha;
    std::vector<CharDetection> rectified = frame.detections;
    if (config_.enable_rotation) {
      std::vector<Point2> centers;
      centers.reserve(rectified.size());
      for (const auto& d : rectified) centers.push_back(d.center);
      centers = rectify_points(centers, rotation_.alpha, frame.pivot());
      for (std::size_t i = 0; i < rectified.size(); ++i) rectified[i].center = centers[i];
      if (!centers.empty()) {
        const SlopeEstimate est = estimate_slope(centers);
        trace.slope_defined = est.defined;
        trace.beta = residual_angle(est);
      }
      rotation_ = update_rotation(rotation_, trace.beta);
    }

    trace.tracks_before = tracks_.tracks().size();
    trace.update = tracks_.update(rectified, frame_epsilon(rectified, config_));
    trace.tracks_after = tracks_.tracks().size();

    if (frames_seen_ == 0) split_y_ = frame.pivot().y;
    last_frame_ = frame.frame_index;
    ++frames_seen_;
    return trace;
  }

  PlateReadout finalize() const {
    return platefuse::finalize(tracks_, config_.layout, config_.min_hits, *alphabet_, split_y_);
  }

 private:
  CtmConfig config_;
  const Alphabet* alphabet_;
  RotationState rotation_;
  TrackSet tracks_;
  std::optional<double> split_y_;
  std::int64_t last_frame_ = 0;
  std::size_t frames_seen_ = 0;
};

struct PlateResult {
  std::string plate_id;
  PlateReadout readout;
  double alpha_final = 0.0;  // radians
  std::optional<std::string> vehicle_id;
};

/// Majority vehicle over the frames of one plate; ties go to the vehicle
/// seen first.
inline std::optional<std::string> plate_vehicle(std::span<const PlateFrame> frames) {
  std::vector<std::pair<std::string, std::size_t>> counts;
  for (const auto& f : frames) {
    auto id = match_plate_to_vehicle(f.plate_box, f.vehicles);
    if (!id) continue;
    auto it = std::find_if(counts.begin(), counts.end(), [&](auto& e) { return e.first == *id; });
    if (it == counts.end()) {
      counts.emplace_back(*id, 1);
    } else {
      ++it->second;
    }
  }
  if (counts.empty()) return std::nullopt;
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

/// Reads one plate from its complete frame sequence.
inline PlateResult run_plate(std::span<const PlateFrame> frames, const CtmConfig& config,
                             const Alphabet& alphabet = Alphabet::merged_latin()) {
  if (frames.empty()) throw std::invalid_argument("no frames for plate");
  PlateEngine engine(config, alphabet);
  for (const auto& f : frames) {
    if (f.plate_id != frames.front().plate_id) {
      throw std::invalid_argument("frames belong to different plates");
    }
    engine.push(f);
  }
  return {frames.front().plate_id, engine.finalize(), engine.alpha(), plate_vehicle(frames)};
}

}  // namespace platefuse
