#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "platefuse/assignment.hpp"
#include "platefuse/geometry.hpp"
#include "platefuse/layout.hpp"

namespace platefuse {

/// One character box from the detector, in plate-local pixels.
struct CharDetection {
  Point2 center;
  double width = 0.0;
  double height = 0.0;
  ClassId cls = 0;
  double confidence = 0.0;

  friend bool operator==(const CharDetection&, const CharDetection&) = default;
};

inline void check_detection(const CharDetection& d, std::size_t alphabet_size) {
  if (!is_finite(d.center)) throw std::invalid_argument("invalid coordinate");
  if (!(d.width > 0.0) || !(d.height > 0.0)) {
    throw std::invalid_argument("detection size must be positive");
  }
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw std::invalid_argument("confidence outside [0, 1]");
  }
  if (d.cls < 0 || static_cast<std::size_t>(d.cls) >= alphabet_size) {
    throw std::invalid_argument("class id outside alphabet");
  }
}

/// One physical character followed across frames.
struct Track {
  std::int64_t id = 0;
  Point2 position;
  std::vector<ClassId> cls;
  std::vector<double> conf;
  Point2 position_sum;  // sum of matched detection centers
  std::int64_t created_frame = 0;
  std::int64_t last_matched_frame = 0;

  std::size_t matched_count() const { return cls.size(); }

  Point2 mean_position() const {
    return cls.empty() ? position : position_sum * (1.0 / static_cast<double>(cls.size()));
  }

  void observe(const CharDetection& d, std::int64_t frame) {
    position = d.center;
    cls.push_back(d.cls);
    conf.push_back(d.confidence);
    position_sum = position_sum + d.center;
    last_matched_frame = frame;
  }
};

struct UpdateStats {
  std::size_t matched = 0;
  std::size_t new_tracks = 0;
  std::size_t shifted = 0;
  Point2 shift;  // displacement applied to unmatched tracks
};

/// The per-plate set of character tracks.
class TrackSet {
 public:
  const std::vector<Track>& tracks() const { return tracks_; }
  std::int64_t next_id() const { return next_id_; }
  std::int64_t frame_index() const { return frame_index_; }

  /// Applies one frame of rectified detections.
  ///
  /// Tracks and detections are paired by a gated minimum-distance
  /// assignment. Matched tracks jump to their detection and record its class
  /// and confidence; unmatched detections open new tracks; unmatched tracks
  /// move by the mean displacement of this frame's matched pairs (zero when
  /// nothing matched). Tracks are never removed here.
  UpdateStats update(std::span<const CharDetection> detections, double epsilon) {
    std::vector<Point2> track_pos;
    track_pos.reserve(tracks_.size());
    for (const auto& t : tracks_) track_pos.push_back(t.position);
    std::vector<Point2> det_pos;
    det_pos.reserve(detections.size());
    for (const auto& d : detections) det_pos.push_back(d.center);

    const Assignment match = solve(build_cost_matrix(track_pos, det_pos, epsilon));

    UpdateStats stats;
    Point2 displacement_sum;
    for (auto [r, c] : match.pairs) {
      displacement_sum = displacement_sum + (det_pos[c] - track_pos[r]);
      tracks_[r].observe(detections[c], frame_index_);
    }
    stats.matched = match.pairs.size();
    if (stats.matched > 0) stats.shift = displacement_sum * (1.0 / static_cast<double>(stats.matched));

    for (auto r : match.unmatched_rows) tracks_[r].position = tracks_[r].position + stats.shift;
    stats.shifted = match.unmatched_rows.size();

    for (auto c : match.unmatched_cols) {
      Track t;
      t.id = next_id_++;
      t.created_frame = frame_index_;
      t.observe(detections[c], frame_index_);
      tracks_.push_back(std::move(t));
    }
    stats.new_tracks = match.unmatched_cols.size();

    ++frame_index_;
    return stats;
  }

 private:
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 0;
  std::int64_t frame_index_ = 0;
};

inline TrackSet ctm_update(TrackSet state, std::span<const CharDetection> detections,
                           double epsilon) {
  state.update(detections, epsilon);
  return state;
}

struct ClassScore {
  ClassId cls = 0;
  double score = 0.0;
};

struct VoteResult {
  ClassId cls = 0;
  double score = 0.0;
  std::optional<ClassScore> runner_up;
};

/// Weighted-sum vote: each class scores the sum of the confidences it was
/// observed with, and the highest score wins. Equal scores go to the lower
/// class id.
inline VoteResult vote(const Track& track, std::size_t alphabet_size) {
  if (track.cls.empty()) throw std::invalid_argument("track has no observations");
  std::vector<double> score(alphabet_size, 0.0);
  std::vector<bool> seen(alphabet_size, false);
  for (std::size_t j = 0; j < track.cls.size(); ++j) {
    const auto c = static_cast<std::size_t>(track.cls[j]);
    if (c >= alphabet_size) throw std::invalid_argument("class id outside alphabet");
    score[c] += track.conf[j];
    seen[c] = true;
  }

  std::optional<ClassScore> best, second;
  for (std::size_t c = 0; c < alphabet_size; ++c) {
    if (!seen[c]) continue;
    const ClassScore cand{static_cast<ClassId>(c), score[c]};
    if (!best || cand.score > best->score) {
      second = best;
      best = cand;
    } else if (!second || cand.score > second->score) {
      second = cand;
    }
  }
  return {best->cls, best->score, second};
}

struct CharReadout {
  ClassId cls = 0;
  char label = '?';  // after layout disambiguation
  double score = 0.0;
  std::int64_t track_id = 0;
  Point2 mean_position;
  int row = 0;
};

struct ReadoutDiagnostics {
  std::size_t total_tracks = 0;
  std::size_t dropped_tracks = 0;
  bool empty = false;
  bool length_mismatch = false;
  std::vector<LayoutViolation> violations;
};

struct PlateReadout {
  std::string text;
  std::vector<CharReadout> chars;
  int rows = 1;
  ReadoutDiagnostics diagnostics;
};

/// Turns the final track set into an ordered plate string.
///
/// Tracks seen fewer than `min_hits` times are dropped; `min_hits` is capped
/// at the number of frames applied, so a one-frame stream still reads out.
/// For two-row layouts, tracks whose mean center lies above `row_split_y`
/// (or the midpoint of the surviving tracks' y range when unset) form the
/// first row. Rows read left to right by mean x.
inline PlateReadout finalize(const TrackSet& state, const LayoutSpec& layout, int min_hits,
                             const Alphabet& alphabet = Alphabet::merged_latin(),
                             std::optional<double> row_split_y = std::nullopt) {
  const auto threshold = static_cast<std::size_t>(
      std::clamp<std::int64_t>(min_hits, 1, std::max<std::int64_t>(1, state.frame_index())));

  PlateReadout out;
  out.rows = layout.rows;
  out.diagnostics.total_tracks = state.tracks().size();

  std::vector<const Track*> kept;
  for (const auto& t : state.tracks()) {
    if (t.matched_count() >= threshold) kept.push_back(&t);
  }
  out.diagnostics.dropped_tracks = state.tracks().size() - kept.size();
  if (kept.empty()) {
    out.diagnostics.empty = true;
    out.diagnostics.length_mismatch = layout.length() != 0;
    out.diagnostics.violations = validate("", layout);
    return out;
  }

  double split = 0.0;
  if (layout.rows == 2) {
    if (row_split_y) {
      split = *row_split_y;
    } else {
      auto [lo, hi] = std::minmax_element(kept.begin(), kept.end(), [](auto* a, auto* b) {
        return a->mean_position().y < b->mean_position().y;
      });
      split = 0.5 * ((*lo)->mean_position().y + (*hi)->mean_position().y);
    }
  }

  for (const Track* t : kept) {
    const VoteResult v = vote(*t, alphabet.size());
    CharReadout ch;
    ch.cls = v.cls;
    ch.label = alphabet.label(v.cls);
    ch.score = v.score;
    ch.track_id = t->id;
    ch.mean_position = t->mean_position();
    ch.row = layout.rows == 2 && ch.mean_position.y >= split ? 1 : 0;
    out.chars.push_back(ch);
  }
  std::stable_sort(out.chars.begin(), out.chars.end(), [](const auto& a, const auto& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.mean_position.x != b.mean_position.x) return a.mean_position.x < b.mean_position.x;
    return a.track_id < b.track_id;
  });

  std::string merged;
  for (const auto& ch : out.chars) merged += ch.label;
  Disambiguation resolved = disambiguate(merged, layout);
  out.text = resolved.text;
  for (std::size_t i = 0; i < out.chars.size(); ++i) out.chars[i].label = out.text[i];
  out.diagnostics.length_mismatch = resolved.length_mismatch;
  out.diagnostics.violations = std::move(resolved.violations);
  return out;
}

}  // namespace platefuse
