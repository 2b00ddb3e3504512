#include "platefuse/engine.hpp"

#include <gtest/gtest.h>

#include <vector>

namespace platefuse {
namespace {

const Alphabet& kAlpha = Alphabet::merged_latin();
const Box kPlate{100, 300, 162, 40};  // pivot (81, 20)

PlateFrame upright_frame(const std::string& text, std::int64_t t, double tilt_deg = 0.0,
                         double drift = 0.0) {
  PlateFrame f;
  f.plate_id = "p";
  f.frame_index = t;
  f.plate_box = kPlate;
  const Point2 pivot = f.pivot();
  for (std::size_t i = 0; i < text.size(); ++i) {
    const double along = (static_cast<double>(i) - 0.5 * (static_cast<double>(text.size()) - 1)) * 18.0;
    const Point2 c = rotate_about({pivot.x + along, pivot.y}, deg_to_rad(tilt_deg), pivot);
    f.detections.push_back({c + Point2{drift * static_cast<double>(t), 0}, 14, 24,
                            kAlpha.id_of(text[i]), 0.9});
  }
  return f;
}

TEST(MatchPlateToVehicle, Examples) {
  const Box plate{100, 100, 40, 10};  // center (120, 105)
  const std::vector<VehicleBox> one{{0, {50, 50, 200, 100}, "car-1", "car"}};
  EXPECT_EQ(match_plate_to_vehicle(plate, one), "car-1");

  const std::vector<VehicleBox> nested{{0, {0, 0, 400, 400}, "bus", "bus"},
                                       {0, {90, 90, 60, 30}, "moto", "motorbike"}};
  EXPECT_EQ(match_plate_to_vehicle(plate, nested), "moto");

  const std::vector<VehicleBox> away{{0, {300, 300, 50, 50}, "far", "car"}};
  EXPECT_FALSE(match_plate_to_vehicle(plate, away));
  EXPECT_FALSE(match_plate_to_vehicle(plate, {}));
}

TEST(FrameEpsilon, RelativeUsesMedianWidth) {
  CtmConfig cfg;
  std::vector<CharDetection> dets{{{0, 0}, 10, 20, 0, 1}, {{0, 0}, 30, 20, 0, 1}, {{0, 0}, 12, 20, 0, 1}};
  EXPECT_DOUBLE_EQ(frame_epsilon(dets, cfg), 6.0);
  dets.push_back({{0, 0}, 14, 20, 0, 1});
  EXPECT_DOUBLE_EQ(frame_epsilon(dets, cfg), 6.5);
  cfg.epsilon_mode = EpsilonMode::absolute;
  cfg.epsilon = 4.0;
  EXPECT_DOUBLE_EQ(frame_epsilon(dets, cfg), 4.0);
  cfg.epsilon = 0.0;
  EXPECT_THROW(frame_epsilon(dets, cfg), std::invalid_argument);
}

TEST(RunPlate, SingleFrameReadsDirectly) {
  const std::vector<PlateFrame> frames{upright_frame("ABC1234", 0)};
  const auto r = run_plate(frames, CtmConfig{});
  EXPECT_EQ(r.readout.text, "ABC1234");
  EXPECT_EQ(r.plate_id, "p");
  EXPECT_DOUBLE_EQ(r.alpha_final, 0.0);
}

TEST(RunPlate, RecoversFromMinorityConfusion) {
  // Character 3 reads '8' with confidence 0.8 in 12 of 30 frames and '1'
  // with 0.6 otherwise: K_1 = 18 * 0.6 = 10.8 > K_8 = 12 * 0.8 = 9.6.
  std::vector<PlateFrame> frames;
  for (int t = 0; t < 30; ++t) {
    auto f = upright_frame("ABC1234", t);
    f.detections[3].confidence = 0.6;
    if (t % 5 < 2) {
      f.detections[3].cls = kAlpha.id_of('8');
      f.detections[3].confidence = 0.8;
    }
    frames.push_back(f);
  }
  EXPECT_EQ(run_plate(frames, CtmConfig{}).readout.text, "ABC1234");
}

TEST(RunPlate, TiltedStreamReadsLikeRectifiedStream) {
  std::vector<PlateFrame> tilted, rectified;
  for (int t = 0; t < 10; ++t) {
    auto f = upright_frame("AEK0977", t, 15.0, 0.5);
    tilted.push_back(f);
    for (auto& d : f.detections) d.center = rotate_about(d.center, -deg_to_rad(15.0), f.pivot());
    rectified.push_back(f);
  }
  CtmConfig on;
  CtmConfig off;
  off.enable_rotation = false;
  const auto a = run_plate(tilted, on);
  const auto b = run_plate(rectified, off);
  EXPECT_EQ(a.readout.text, "AEK0977");
  EXPECT_EQ(a.readout.text, b.readout.text);
  EXPECT_NEAR(rad_to_deg(a.alpha_final), 15.0, 1e-9);
}

TEST(RunPlate, NoiselessTrackCountEqualsCharacters) {
  for (int frames = 1; frames <= 12; ++frames) {
    std::vector<PlateFrame> stream;
    for (int t = 0; t < frames; ++t) stream.push_back(upright_frame("QRS5678", t, 0.0, 1.5));
    PlateEngine engine(CtmConfig{});
    for (const auto& f : stream) engine.push(f);
    EXPECT_EQ(engine.tracks().tracks().size(), 7u);
    EXPECT_EQ(engine.finalize().text, "QRS5678");
  }
}

TEST(RunPlate, Deterministic) {
  std::vector<PlateFrame> frames;
  for (int t = 0; t < 20; ++t) {
    auto f = upright_frame("XYZ9876", t, 8.0, 0.7);
    if (t % 3 == 0) f.detections.erase(f.detections.begin() + t % 7);
    frames.push_back(f);
  }
  const auto first = run_plate(frames, CtmConfig{});
  for (int i = 0; i < 5; ++i) {
    const auto again = run_plate(frames, CtmConfig{});
    EXPECT_EQ(again.readout.text, first.readout.text);
    EXPECT_EQ(again.alpha_final, first.alpha_final);
    ASSERT_EQ(again.readout.chars.size(), first.readout.chars.size());
    for (std::size_t k = 0; k < first.readout.chars.size(); ++k) {
      EXPECT_EQ(again.readout.chars[k].score, first.readout.chars[k].score);
      EXPECT_EQ(again.readout.chars[k].mean_position, first.readout.chars[k].mean_position);
    }
  }
}

TEST(RunPlate, Errors) {
  EXPECT_THROW(run_plate(std::vector<PlateFrame>{}, CtmConfig{}), std::invalid_argument);
  std::vector<PlateFrame> out_of_order{upright_frame("ABC1234", 3), upright_frame("ABC1234", 2)};
  EXPECT_THROW(run_plate(out_of_order, CtmConfig{}), std::invalid_argument);
  std::vector<PlateFrame> mixed{upright_frame("ABC1234", 0), upright_frame("ABC1234", 1)};
  mixed[1].plate_id = "other";
  EXPECT_THROW(run_plate(mixed, CtmConfig{}), std::invalid_argument);
  auto bad = upright_frame("ABC1234", 0);
  bad.detections[0].confidence = 1.5;
  EXPECT_THROW(run_plate(std::vector{bad}, CtmConfig{}), std::invalid_argument);
}

TEST(RunPlate, PicksMajorityVehicle) {
  std::vector<PlateFrame> frames;
  for (int t = 0; t < 3; ++t) {
    auto f = upright_frame("ABC1234", t);
    f.vehicles.push_back({t, {0, 0, 1000, 1000}, t == 0 ? "a" : "b", "car"});
    frames.push_back(f);
  }
  EXPECT_EQ(run_plate(frames, CtmConfig{}).vehicle_id, "b");
}

TEST(PlateEngine, AlphaConvergesOnStaticTilt) {
  for (double theta : {-30.0, -15.0, -5.0, 5.0, 15.0, 30.0}) {
    PlateEngine engine(CtmConfig{});
    for (int t = 0; t < 8; ++t) {
      engine.push(upright_frame("ABC1234", t, theta, 0.5));
      if (t >= 1) {
        EXPECT_LT(std::abs(rad_to_deg(engine.alpha()) - theta), 0.5);
      }
    }
  }
}

}  // namespace
}  // namespace platefuse
