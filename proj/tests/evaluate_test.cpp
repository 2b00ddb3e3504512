#include "platefuse/evaluate.hpp"

#include <gtest/gtest.h>

namespace platefuse {
namespace {

BenchConfig small_bench() {
  BenchConfig b;
  b.plates = 60;
  b.seed = 5;
  b.scenario.n_frames = 15;
  return b;
}

TEST(CharAccuracy, Basics) {
  EXPECT_DOUBLE_EQ(char_accuracy("ABC1234", "ABC1234"), 1.0);
  EXPECT_DOUBLE_EQ(char_accuracy("ABC1235", "ABC1234"), 6.0 / 7.0);
  EXPECT_DOUBLE_EQ(char_accuracy("ABC123", "ABC1234"), 6.0 / 7.0);
  EXPECT_DOUBLE_EQ(char_accuracy("", "AB"), 0.0);
  EXPECT_DOUBLE_EQ(char_accuracy("", ""), 1.0);
}

TEST(ParallelFor, VisitsEachIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
               std::runtime_error);
}

TEST(SingleFrameReader, BestAndMajority) {
  auto readout = [](std::string text, double score) {
    PlateReadout r;
    r.text = text;
    for (char c : text) r.chars.push_back({0, c, score, 0, {}, 0});
    return r;
  };
  SingleFrameReader reader;
  reader.add(readout("AAA1111", 0.7));
  reader.add(readout("AAA1117", 0.9));
  reader.add(readout("AAA1111", 0.6));
  reader.add(readout("", 0.0));
  EXPECT_EQ(reader.best(), "AAA1117");
  EXPECT_EQ(reader.majority(), "AAA1111");
}

TEST(Benchmark, NoiselessScenarioIsPerfect) {
  auto b = small_bench();
  const auto report = run_benchmark(b);
  for (Method m : kAllMethods) {
    EXPECT_DOUBLE_EQ(report[m].plate_accuracy, 1.0) << method_name(m);
    EXPECT_DOUBLE_EQ(report[m].char_accuracy, 1.0) << method_name(m);
    EXPECT_DOUBLE_EQ(report[m].mean_frames, 15.0);
  }
}

TEST(Benchmark, IndependentOfWorkerCount) {
  auto b = small_bench();
  b.scenario.miss_prob = 0.1;
  b.scenario.confusion_prob = 0.2;
  b.scenario.jitter_sigma = 1.0;
  b.scenario.tilt_deg = 10.0;
  b.workers = 1;
  const auto one = run_benchmark(b);
  b.workers = 4;
  const auto four = run_benchmark(b);
  for (Method m : kAllMethods) {
    EXPECT_EQ(one[m].exact, four[m].exact);
    EXPECT_EQ(one[m].char_accuracy, four[m].char_accuracy);
    EXPECT_GE(one[m].plate_accuracy, 0.0);
    EXPECT_LE(one[m].plate_accuracy, 1.0);
    EXPECT_GE(one[m].char_accuracy, one[m].plate_accuracy - 1e-12);
  }
}

TEST(Benchmark, RotationIsNoOpWithoutTilt) {
  // Noiseless geometry keeps the fitted slope at zero, so rectification
  // never moves a point; misses and confusions still vary per frame.
  auto b = small_bench();
  b.scenario.miss_prob = 0.2;
  b.scenario.confusion_prob = 0.3;
  b.scenario.gamma_tilt_noise = 0.0;
  const auto scenarios = bench_scenarios(b);
  for (const auto& s : scenarios) {
    const auto frames = simulate(s).frames;
    CtmConfig off = b.ctm;
    off.enable_rotation = false;
    const auto ar = run_plate(frames, b.ctm);
    const auto plain = run_plate(frames, off);
    EXPECT_EQ(ar.readout.text, plain.readout.text);
    EXPECT_EQ(ar.alpha_final, 0.0);
  }
  const auto report = run_benchmark(b);
  EXPECT_EQ(report[Method::ar_ctm].exact, report[Method::ctm].exact);
}

TEST(Evaluate, RecordedStreams) {
  auto b = small_bench();
  b.scenario.miss_prob = 0.1;
  b.scenario.confusion_prob = 0.15;
  b.scenario.jitter_sigma = 1.0;
  std::vector<std::vector<PlateFrame>> streams;
  std::vector<std::string> truths;
  for (const auto& s : bench_scenarios(b)) {
    streams.push_back(simulate(s).frames);
    truths.push_back(s.plate_text);
  }
  const auto report = evaluate(streams, truths, kAllMethods, b.ctm, 3);
  EXPECT_GT(report[Method::ctm].plate_accuracy, report[Method::single_frame_best].plate_accuracy);
  // Open-loop streams at zero tilt match the closed-loop benchmark for CTM.
  EXPECT_EQ(report[Method::ctm].exact, run_benchmark(b)[Method::ctm].exact);

  truths.pop_back();
  EXPECT_THROW(evaluate(streams, truths, kAllMethods, b.ctm), std::invalid_argument);
}

}  // namespace
}  // namespace platefuse
