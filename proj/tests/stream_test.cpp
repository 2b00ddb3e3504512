#include "platefuse/stream.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <json.hpp>

namespace platefuse {
namespace {

std::string record(const std::string& plate, int frame, double conf = 0.9) {
  nlohmann::json r = {{"plate_id", plate},
                      {"frame", frame},
                      {"plate_box", {10, 20, 120, 40}},
                      {"vehicles", nlohmann::json::array({{{"id", "v1"}, {"box", {0, 0, 400, 300}}, {"class", "car"}}})},
                      {"chars", nlohmann::json::array({{{"cx", 12.5}, {"cy", 20}, {"w", 10}, {"h", 20}, {"class", "O"}, {"conf", conf}}})}};
  return r.dump();
}

TEST(ReadStream, GroupsByPlate) {
  std::istringstream one(record("A", 0) + "\n" + record("A", 1) + "\n");
  auto data = read_stream(one);
  ASSERT_EQ(data.groups.size(), 1u);
  EXPECT_EQ(data.groups[0].frames.size(), 2u);
  const auto& f = data.groups[0].frames[0];
  EXPECT_EQ(f.plate_box, (Box{10, 20, 120, 40}));
  ASSERT_EQ(f.vehicles.size(), 1u);
  EXPECT_EQ(f.vehicles[0].vehicle_id, "v1");
  EXPECT_EQ(f.detections[0].cls, Alphabet::merged_latin().id_of('0'));

  std::istringstream mixed(record("A", 0) + "\n\n" + record("B", 0) + "\n" + record("A", 5) + "\n");
  data = read_stream(mixed);
  ASSERT_EQ(data.groups.size(), 2u);
  EXPECT_EQ(data.groups[0].plate_id, "A");
  EXPECT_EQ(data.groups[0].frames[1].frame_index, 5);
  EXPECT_EQ(data.groups[1].plate_id, "B");
}

TEST(ReadStream, StrictAbortsWithLineNumber) {
  std::istringstream in(record("A", 0) + "\n" + record("A", 1, 1.7) + "\n");
  try {
    read_stream(in, true);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("confidence"), std::string::npos);
  }
}

TEST(ReadStream, LenientSkipsBadLines) {
  std::istringstream in(record("A", 0) + "\n{not json\n" + record("A", 1, 1.7) + "\n" +
                        R"({"plate_id":"A","frame":2,"chars":[]})" + "\n" + record("A", 0) + "\n" +
                        record("A", 3) + "\n");
  const auto data = read_stream(in, false);
  ASSERT_EQ(data.groups.size(), 1u);
  EXPECT_EQ(data.groups[0].frames.size(), 2u);
  ASSERT_EQ(data.errors.size(), 4u);
  EXPECT_EQ(data.errors[0].line, 2u);
  EXPECT_EQ(data.errors[1].line, 3u);
  EXPECT_NE(data.errors[2].message.find("plate_box"), std::string::npos);
  EXPECT_NE(data.errors[3].message.find("increasing"), std::string::npos);
}

TEST(ReadStream, SchemaViolations) {
  for (const char* bad : {
           R"({"frame":0,"plate_box":[0,0,1,1],"chars":[]})",
           R"({"plate_id":"A","frame":0.5,"plate_box":[0,0,1,1],"chars":[]})",
           R"({"plate_id":"A","frame":0,"plate_box":[0,0,-1,1],"chars":[]})",
           R"({"plate_id":"A","frame":0,"plate_box":[0,0,1],"chars":[]})",
           R"({"plate_id":"A","frame":0,"plate_box":[0,0,1,1],"chars":[{"cx":0,"cy":0,"w":0,"h":1,"class":"A","conf":0.5}]})",
           R"({"plate_id":"A","frame":0,"plate_box":[0,0,1,1],"chars":[{"cx":0,"cy":0,"w":1,"h":1,"class":"AB","conf":0.5}]})",
           R"({"plate_id":"A","frame":0,"plate_box":[0,0,1,1],"chars":[{"cx":0,"cy":0,"w":1,"h":1,"class":"A"}]})",
           R"({"plate_id":"A","frame":0,"plate_box":[0,0,1,1]})",
           R"([1,2,3])",
       }) {
    std::istringstream in(bad);
    EXPECT_THROW(read_stream(in, true), DataError) << bad;
  }
  EXPECT_THROW(read_stream(std::string("/nonexistent/stream.jsonl")), DataError);
}

PlateFrame random_frame(std::mt19937_64& rng, std::int64_t index) {
  std::uniform_real_distribution<double> coord(-50.0, 250.0);
  std::uniform_real_distribution<double> size(0.5, 40.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 33), count(0, 9);
  PlateFrame f;
  f.plate_id = "plate-" + std::to_string(rng() % 3);
  f.frame_index = index;
  f.plate_box = {coord(rng), coord(rng), size(rng), size(rng)};
  if (unit(rng) < 0.5) f.tilt_hint = coord(rng) / 10;
  for (int i = count(rng) % 3; i > 0; --i) {
    f.vehicles.push_back({index, {coord(rng), coord(rng), size(rng), size(rng)}, "v" + std::to_string(i), "car"});
  }
  for (int i = count(rng); i > 0; --i) {
    f.detections.push_back({{coord(rng), coord(rng)}, size(rng), size(rng), cls(rng), unit(rng)});
  }
  return f;
}

TEST(Stream, WriteThenReadIsIdentity) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PlateFrame> frames;
    for (int i = 0; i < 12; ++i) frames.push_back(random_frame(rng, i));
    std::stringstream io;
    write_stream(io, frames);
    const auto data = read_stream(io);
    std::vector<PlateFrame> back;
    for (const auto& g : data.groups) back.insert(back.end(), g.frames.begin(), g.frames.end());
    std::sort(back.begin(), back.end(), [](auto& a, auto& b) { return a.frame_index < b.frame_index; });
    EXPECT_EQ(back, frames);
  }
}

TEST(Readout, JsonShape) {
  PlateResult r;
  r.plate_id = "p7";
  r.readout.text = "AB";
  r.readout.chars = {{0, 'A', 1.5, 3, {10, 20}, 0}, {1, 'B', 0.75, 4, {30, 20}, 0}};
  r.alpha_final = deg_to_rad(12.0);
  auto j = nlohmann::json::parse(readout_to_json(r));
  EXPECT_EQ(j["plate_id"], "p7");
  EXPECT_EQ(j["text"], "AB");
  EXPECT_TRUE(j["vehicle_id"].is_null());
  EXPECT_EQ(j["chars"][1]["class"], "B");
  EXPECT_DOUBLE_EQ(j["chars"][0]["score"].get<double>(), 1.5);
  EXPECT_DOUBLE_EQ(j["chars"][1]["cx"].get<double>(), 30.0);
  EXPECT_NEAR(j["alpha_final_deg"].get<double>(), 12.0, 1e-12);
  r.vehicle_id = "car-9";
  j = nlohmann::json::parse(readout_to_json(r));
  EXPECT_EQ(j["vehicle_id"], "car-9");
}

TEST(Config, ParsesKeyValueFile) {
  std::istringstream in(R"(# comment
epsilon = 6.5
epsilon_mode = absolute
min_hits = 3   # trailing
layout = AAA-NNNN
enable_rotation = false
gamma_tilt_noise = 0.5
seed = 42
strict = no
)");
  const auto cfg = read_config(in);
  EXPECT_DOUBLE_EQ(cfg.ctm.epsilon, 6.5);
  EXPECT_EQ(cfg.ctm.epsilon_mode, EpsilonMode::absolute);
  EXPECT_EQ(cfg.ctm.min_hits, 3);
  EXPECT_EQ(cfg.ctm.layout.pattern(), "AAANNNN");
  EXPECT_FALSE(cfg.ctm.enable_rotation);
  EXPECT_DOUBLE_EQ(cfg.gamma_tilt_noise, 0.5);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_FALSE(cfg.strict);
}

TEST(Config, RejectsBadInput) {
  for (const char* bad : {"nonsense", "colour = red", "epsilon = -1", "epsilon = abc",
                          "min_hits = 0", "epsilon_mode = fuzzy", "layout = AXN", "strict = maybe"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_config(in), DataError) << bad;
  }
}

}  // namespace
}  // namespace platefuse
