#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "platefuse/engine.hpp"
#include "platefuse/geometry.hpp"
#include "platefuse/layout.hpp"

namespace platefuse {

/// Look-alike characters a detector plausibly reports instead of the true one.
using ConfusionTable = std::map<char, std::string>;

inline const ConfusionTable& default_confusions() {
  static const ConfusionTable kTable = {
      {'A', "4"},  {'B', "8"},  {'C', "G"},  {'D', "0"},  {'E', "F"},  {'F', "E"},
      {'G', "6C"}, {'H', "MN"}, {'I', "7"},  {'J', "U"},  {'K', "X"},  {'L', "1"},
      {'M', "NH"}, {'N', "MH"}, {'O', "D"},  {'P', "R"},  {'Q', "0"},  {'R', "P"},
      {'S', "5"},  {'T', "1"},  {'U', "VJ"}, {'V', "UY"}, {'W', "V"},  {'X', "K"},
      {'Y', "V"},  {'Z', "2"},  {'0', "DQ"}, {'1', "7T"}, {'2', "Z"},  {'3', "8"},
      {'4', "A"},  {'5', "S6"}, {'6', "G5"}, {'7', "1"},  {'8', "B3"}, {'9', "6"},
  };
  return kTable;
}

/// Synthetic plate scenario. Degradation is applied per character and frame.
///
/// The detector model degrades with the tilt it actually sees: confusion
/// probability and center jitter are both scaled by
/// 1 + gamma_tilt_noise * |tilt - alpha| / 30 degrees, where alpha is the
/// rectification applied to the frame. This is a modeling assumption.
struct ScenarioConfig {
  std::string plate_id = "plate-0";
  std::string plate_text = "ABC1234";
  LayoutSpec layout = LayoutSpec::brazilian();
  int n_frames = 30;
  double tilt_deg = 0.0;
  double jitter_sigma = 0.0;    // pixels
  double miss_prob = 0.0;
  double confusion_prob = 0.0;
  ConfusionTable confusion_table = default_confusions();
  double velocity = 0.5;        // pixels per frame along x
  double gamma_tilt_noise = 1.0;
  std::uint64_t seed = 1;

  // Nominal plate geometry in plate-local pixels.
  double pitch = 18.0;
  double char_width = 14.0;
  double char_height = 24.0;
  double plate_height = 40.0;
  double row_gap = 28.0;  // center-to-center, two-row layouts

  void check() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(miss_prob) || !prob(confusion_prob)) {
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
    if (n_frames < 1) throw std::invalid_argument("n_frames must be at least 1");
    if (plate_text.empty()) throw std::invalid_argument("empty plate text");
    if (!(jitter_sigma >= 0.0) || !std::isfinite(tilt_deg) || !std::isfinite(velocity) ||
        !(gamma_tilt_noise >= 0.0)) {
      throw std::invalid_argument("invalid scenario parameter");
    }
    if (layout.rows == 2 && plate_text.size() < 2) {
      throw std::invalid_argument("two-row plate needs at least two characters");
    }
  }
};

/// Splits the text into reading rows at the layout's row break; texts that
/// do not fit the layout put the first half (rounded down) on top.
inline std::vector<std::string> plate_rows(const std::string& text, const LayoutSpec& layout) {
  if (layout.rows != 2) return {text};
  const std::size_t top = text.size() == layout.length() ? layout.row_break : text.size() / 2;
  return {text.substr(0, top), text.substr(top)};
}

/// Detector stand-in for one plate. `frame(t, alpha)` yields what a
/// detector would report for frame t after the crop was rotated by alpha.
/// Random draws depend only on (seed, t), never on alpha, so two readers
/// with different rectification see the same underlying noise.
class SyntheticPlate {
 public:
  explicit SyntheticPlate(ScenarioConfig config, const Alphabet& alphabet = Alphabet::merged_latin())
      : config_(std::move(config)), alphabet_(&alphabet) {
    config_.check();
    for (char ch : config_.plate_text) alphabet_->id_of(ch);
    const auto rows = plate_rows(config_.plate_text, config_.layout);
    std::size_t widest = 0;
    for (const auto& r : rows) widest = std::max(widest, r.size());
    box_ = {100.0, 300.0, static_cast<double>(widest + 2) * config_.pitch,
            config_.layout.rows == 2 ? config_.plate_height + config_.row_gap
                                     : config_.plate_height};
  }

  const ScenarioConfig& config() const { return config_; }
  Box plate_box() const { return box_; }

  /// Noiseless plate-local center of character i at frame t, before tilt
  /// correction.
  Point2 true_center(std::size_t i, int t) const {
    const auto rows = plate_rows(config_.plate_text, config_.layout);
    std::size_t row = 0, col = i;
    if (rows.size() == 2 && i >= rows[0].size()) {
      row = 1;
      col = i - rows[0].size();
    }
    const double n = static_cast<double>(rows[row].size());
    const double along = (static_cast<double>(col) - 0.5 * (n - 1.0)) * config_.pitch;
    const double across =
        rows.size() == 2 ? (static_cast<double>(row) - 0.5) * config_.row_gap : 0.0;
    const double theta = deg_to_rad(config_.tilt_deg);
    const Point2 pivot{0.5 * box_.w, 0.5 * box_.h};
    const Point2 upright{pivot.x + along, pivot.y + across};
    return rotate_about(upright, theta, pivot) + Point2{config_.velocity * t, 0.0};
  }

  double noise_multiplier(double alpha) const {
    const double residual = std::abs(config_.tilt_deg - rad_to_deg(alpha));
    return 1.0 + config_.gamma_tilt_noise * residual / 30.0;
  }

  PlateFrame frame(int t, double alpha = 0.0) const {
    std::seed_seq seq{static_cast<std::uint32_t>(config_.seed),
                      static_cast<std::uint32_t>(config_.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double mult = noise_multiplier(alpha);
    const double p_confuse = std::min(1.0, config_.confusion_prob * mult);
    const double sigma = config_.jitter_sigma * mult;

    PlateFrame f;
    f.plate_id = config_.plate_id;
    f.frame_index = t;
    f.plate_box = box_;
    f.tilt_hint = config_.tilt_deg;
    f.vehicles.push_back({t,
                          {box_.x - 60.0, box_.y - 160.0, box_.w + 120.0, box_.h + 220.0},
                          "veh-" + config_.plate_id,
                          "car"});

    for (std::size_t i = 0; i < config_.plate_text.size(); ++i) {
      // Fixed number of draws per character keeps streams aligned.
      const double u_miss = unit(rng);
      const double u_confuse = unit(rng);
      const double u_pick = unit(rng);
      const double u_conf = unit(rng);
      const double nx = gauss(rng);
      const double ny = gauss(rng);
      if (u_miss < config_.miss_prob) continue;

      const char truth = config_.plate_text[i];
      CharDetection d;
      d.center = true_center(i, t) + Point2{sigma * nx, sigma * ny};
      d.width = config_.char_width;
      d.height = config_.char_height;
      d.cls = alphabet_->id_of(truth);
      d.confidence = 0.6 + 0.35 * u_conf;
      if (u_confuse < p_confuse) {
        const ClassId wrong = confused_class(truth, u_pick);
        if (wrong != d.cls) {
          d.cls = wrong;
          d.confidence = 0.3 + 0.5 * u_conf;
        }
      }
      f.detections.push_back(d);
    }
    return f;
  }

 private:
  ClassId confused_class(char truth, double u) const {
    const auto it = config_.confusion_table.find(truth);
    const ClassId true_id = alphabet_->id_of(truth);
    if (it != config_.confusion_table.end() && !it->second.empty()) {
      const auto k = std::min(it->second.size() - 1,
                              static_cast<std::size_t>(u * static_cast<double>(it->second.size())));
      return alphabet_->id_of(it->second[k]);
    }
    // Any other class, uniformly.
    const auto n = alphabet_->size() - 1;
    auto k = static_cast<ClassId>(std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n))));
    return k >= true_id ? k + 1 : k;
  }

  ScenarioConfig config_;
  const Alphabet* alphabet_;
  Box box_;
};

struct Scenario {
  std::vector<PlateFrame> frames;
  std::string truth;
};

/// Open-loop stream: every frame as seen without rectification.
inline Scenario simulate(const ScenarioConfig& config,
                         const Alphabet& alphabet = Alphabet::merged_latin()) {
  const SyntheticPlate plate(config, alphabet);
  Scenario out;
  out.truth = config.plate_text;
  out.frames.reserve(static_cast<std::size_t>(config.n_frames));
  for (int t = 0; t < config.n_frames; ++t) out.frames.push_back(plate.frame(t));
  return out;
}

/// Random plate string matching `layout`; '?' slots draw from letters and
/// digits.
template <typename Rng>
std::string random_plate_text(const LayoutSpec& layout, Rng& rng) {
  static constexpr std::string_view kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  static constexpr std::string_view kDigits = "0123456789";
  static constexpr std::string_view kAny = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string out;
  for (auto slot : layout.slots) {
    const std::string_view pool =
        slot == SlotKind::alphabetic ? kLetters : slot == SlotKind::numeric ? kDigits : kAny;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    out += pool[pick(rng)];
  }
  return out;
}

}  // namespace platefuse
