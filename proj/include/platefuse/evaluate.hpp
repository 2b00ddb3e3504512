#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "platefuse/engine.hpp"
#include "platefuse/simulate.hpp"

namespace platefuse {

enum class Method { single_frame_best, single_frame_majority, ctm, ar_ctm };

inline constexpr std::array<Method, 4> kAllMethods = {
    Method::single_frame_best, Method::single_frame_majority, Method::ctm, Method::ar_ctm};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::single_frame_best: return "single_frame_best";
    case Method::single_frame_majority: return "single_frame_majority";
    case Method::ctm: return "ctm";
    case Method::ar_ctm: return "ar_ctm";
  }
  return "unknown";
}

struct MethodScore {
  Method method = Method::ctm;
  std::size_t plates = 0;
  std::size_t exact = 0;
  double plate_accuracy = 0.0;
  double char_accuracy = 0.0;
  double mean_frames = 0.0;
  double runtime_ms = 0.0;  // wall time summed over plates; not deterministic
};

struct EvalReport {
  std::vector<MethodScore> methods;

  const MethodScore& operator[](Method m) const {
    for (const auto& s : methods) {
      if (s.method == m) return s;
    }
    throw std::out_of_range("method not in report");
  }
};

/// Fraction of positions read correctly, over the longer of the two strings.
inline double char_accuracy(std::string_view read, std::string_view truth) {
  const std::size_t n = std::max(read.size(), truth.size());
  if (n == 0) return 1.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < std::min(read.size(), truth.size()); ++i) ok += read[i] == truth[i];
  return static_cast<double>(ok) / static_cast<double>(n);
}

/// Runs fn(i) for i in [0, n) on `workers` threads. Each index runs once.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = n;
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Readout of one frame on its own: no rectification, every detection is
/// its own track with one vote.
inline PlateReadout single_frame_readout(const PlateFrame& frame, const CtmConfig& config,
                                         const Alphabet& alphabet = Alphabet::merged_latin()) {
  CtmConfig one = config;
  one.enable_rotation = false;
  one.min_hits = 1;
  PlateEngine engine(one, alphabet);
  engine.push(frame);
  return engine.finalize();
}

/// Single-frame baselines over a plate's frames.
///
/// `best` is the readout of the frame with the highest mean detection
/// confidence (earliest on ties). `majority` is the most frequent non-empty
/// per-frame string (earliest first occurrence on ties).
class SingleFrameReader {
 public:
  void add(const PlateReadout& readout) {
    double mean = 0.0;
    for (const auto& c : readout.chars) mean += c.score;
    if (!readout.chars.empty()) mean /= static_cast<double>(readout.chars.size());
    if (frames_ == 0 || mean > best_score_) {
      best_score_ = mean;
      best_ = readout.text;
    }
    ++frames_;
    if (readout.text.empty()) return;
    auto it = std::find_if(counts_.begin(), counts_.end(),
                           [&](const auto& e) { return e.first == readout.text; });
    if (it == counts_.end()) {
      counts_.emplace_back(readout.text, 1);
    } else {
      ++it->second;
    }
  }

  const std::string& best() const { return best_; }

  std::string majority() const {
    if (counts_.empty()) return {};
    auto top = counts_.begin();
    for (auto it = counts_.begin(); it != counts_.end(); ++it) {
      if (it->second > top->second) top = it;
    }
    return top->first;
  }

 private:
  std::size_t frames_ = 0;
  double best_score_ = 0.0;
  std::string best_;
  std::vector<std::pair<std::string, std::size_t>> counts_;
};

struct PlateOutcome {
  std::array<std::string, kAllMethods.size()> text;
  std::array<double, kAllMethods.size()> runtime_ms{};
  std::size_t frames = 0;
};

namespace detail {

inline std::size_t index_of(Method m) { return static_cast<std::size_t>(m); }

inline EvalReport aggregate(std::span<const PlateOutcome> outcomes,
                            std::span<const std::string> truths, std::span<const Method> methods) {
  EvalReport report;
  for (Method m : methods) {
    MethodScore s;
    s.method = m;
    s.plates = outcomes.size();
    double chars = 0.0, frames = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& text = outcomes[i].text[index_of(m)];
      s.exact += text == truths[i];
      chars += char_accuracy(text, truths[i]);
      frames += static_cast<double>(outcomes[i].frames);
      s.runtime_ms += outcomes[i].runtime_ms[index_of(m)];
    }
    if (!outcomes.empty()) {
      const auto n = static_cast<double>(outcomes.size());
      s.plate_accuracy = static_cast<double>(s.exact) / n;
      s.char_accuracy = chars / n;
      s.mean_frames = frames / n;
    }
    report.methods.push_back(s);
  }
  return report;
}

template <typename Fn>
double timed_ms(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace detail

inline bool wants(std::span<const Method> methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

/// Scores recorded streams against their ground truth. `ctm` reads the
/// streams without rectification and `ar_ctm` with it; both see the same
/// detections.
inline EvalReport evaluate(std::span<const std::vector<PlateFrame>> streams,
                           std::span<const std::string> truths, std::span<const Method> methods,
                           const CtmConfig& config, unsigned workers = 1,
                           const Alphabet& alphabet = Alphabet::merged_latin()) {
  if (streams.size() != truths.size()) {
    throw std::invalid_argument("streams and ground truths are misaligned");
  }
  std::vector<PlateOutcome> outcomes(streams.size());
  parallel_for(streams.size(), workers, [&](std::size_t i) {
    const auto& frames = streams[i];
    if (frames.empty()) throw std::invalid_argument("empty stream for plate");
    PlateOutcome& out = outcomes[i];
    out.frames = frames.size();
    if (wants(methods, Method::single_frame_best) || wants(methods, Method::single_frame_majority)) {
      SingleFrameReader reader;
      const double ms = detail::timed_ms([&] {
        for (const auto& f : frames) reader.add(single_frame_readout(f, config, alphabet));
      });
      out.text[detail::index_of(Method::single_frame_best)] = reader.best();
      out.text[detail::index_of(Method::single_frame_majority)] = reader.majority();
      out.runtime_ms[detail::index_of(Method::single_frame_best)] = ms;
      out.runtime_ms[detail::index_of(Method::single_frame_majority)] = ms;
    }
    for (Method m : {Method::ctm, Method::ar_ctm}) {
      if (!wants(methods, m)) continue;
      CtmConfig c = config;
      c.enable_rotation = m == Method::ar_ctm;
      out.runtime_ms[detail::index_of(m)] = detail::timed_ms(
          [&] { out.text[detail::index_of(m)] = run_plate(frames, c, alphabet).readout.text; });
    }
  });
  return detail::aggregate(outcomes, truths, methods);
}

struct BenchConfig {
  ScenarioConfig scenario;  // plate_text, plate_id and seed are drawn per plate
  std::size_t plates = 1000;
  CtmConfig ctm;
  std::uint64_t seed = 7;
  unsigned workers = 1;
};

/// Plate texts and per-plate seeds for a benchmark; independent of worker count.
inline std::vector<ScenarioConfig> bench_scenarios(const BenchConfig& bench) {
  std::mt19937_64 rng(bench.seed);
  std::vector<ScenarioConfig> out;
  out.reserve(bench.plates);
  for (std::size_t i = 0; i < bench.plates; ++i) {
    ScenarioConfig s = bench.scenario;
    s.layout = bench.ctm.layout;
    s.plate_id = "plate-" + std::to_string(i);
    s.plate_text = random_plate_text(s.layout, rng);
    s.seed = rng();
    out.push_back(std::move(s));
  }
  return out;
}

/// Monte-Carlo comparison on synthetic plates. The rectifying reader is run
/// closed-loop: each frame is generated after its current alpha is known, so
/// the detector noise reflects the tilt left after rectification. The other
/// readers see the unrectified frames. All readers share the random draws.
inline EvalReport run_benchmark(const BenchConfig& bench,
                                std::span<const Method> methods = kAllMethods,
                                const Alphabet& alphabet = Alphabet::merged_latin()) {
  const auto scenarios = bench_scenarios(bench);
  std::vector<std::string> truths;
  for (const auto& s : scenarios) truths.push_back(s.plate_text);

  std::vector<PlateOutcome> outcomes(scenarios.size());
  parallel_for(scenarios.size(), bench.workers, [&](std::size_t i) {
    const SyntheticPlate plate(scenarios[i], alphabet);
    const int n = scenarios[i].n_frames;
    PlateOutcome& out = outcomes[i];
    out.frames = static_cast<std::size_t>(n);

    std::vector<PlateFrame> open_loop;
    open_loop.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) open_loop.push_back(plate.frame(t, 0.0));

    if (wants(methods, Method::single_frame_best) || wants(methods, Method::single_frame_majority)) {
      SingleFrameReader reader;
      const double ms = detail::timed_ms([&] {
        for (const auto& f : open_loop) reader.add(single_frame_readout(f, bench.ctm, alphabet));
      });
      out.text[detail::index_of(Method::single_frame_best)] = reader.best();
      out.text[detail::index_of(Method::single_frame_majority)] = reader.majority();
      out.runtime_ms[detail::index_of(Method::single_frame_best)] = ms;
      out.runtime_ms[detail::index_of(Method::single_frame_majority)] = ms;
    }
    if (wants(methods, Method::ctm)) {
      CtmConfig c = bench.ctm;
      c.enable_rotation = false;
      out.runtime_ms[detail::index_of(Method::ctm)] = detail::timed_ms(
          [&] { out.text[detail::index_of(Method::ctm)] = run_plate(open_loop, c, alphabet).readout.text; });
    }
    if (wants(methods, Method::ar_ctm)) {
      CtmConfig c = bench.ctm;
      c.enable_rotation = true;
      out.runtime_ms[detail::index_of(Method::ar_ctm)] = detail::timed_ms([&] {
        PlateEngine engine(c, alphabet);
        for (int t = 0; t < n; ++t) engine.push(plate.frame(t, engine.alpha()));
        out.text[detail::index_of(Method::ar_ctm)] = engine.finalize().text;
      });
    }
  });
  return detail::aggregate(outcomes, truths, methods);
}

}  // namespace platefuse
