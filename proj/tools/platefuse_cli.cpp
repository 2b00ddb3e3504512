// platefuse command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 malformed input, 3 oracle mismatch.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "platefuse/platefuse.hpp"

namespace {

using namespace platefuse;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitMismatch = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags that mirror config-file keys. Flags override the file.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::optional<std::string>>> values{
      {"epsilon", {}},         {"epsilon_mode", {}},     {"min_hits", {}}, {"layout", {}},
      {"enable_rotation", {}}, {"gamma_tilt_noise", {}}, {"seed", {}},     {"strict", {}},
  };

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value settings file");
    for (auto& [key, value] : values) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option(flag, value, "overrides '" + key + "' from the config file");
    }
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = read_config(config_path);
    for (const auto& [key, value] : values) {
      if (!value) continue;
      try {
        apply_setting(cfg, key, *value);
      } catch (const std::exception& e) {
        throw UsageError("--" + key + ": " + e.what());
      }
    }
    return cfg;
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw UsageError("cannot write '" + path + "'");
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct ScenarioFlags {
  int frames = 30;
  double tilt = 0.0;
  double jitter = 0.0;
  double miss = 0.0;
  double confusion = 0.0;
  double velocity = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--frames", frames, "frames per plate")->check(CLI::PositiveNumber);
    app->add_option("--tilt", tilt, "plate tilt in degrees");
    app->add_option("--jitter", jitter, "center jitter sigma in pixels")->check(CLI::NonNegativeNumber);
    app->add_option("--miss", miss, "per-character miss probability")->check(CLI::Range(0.0, 1.0));
    app->add_option("--confusion", confusion, "per-character confusion probability")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--velocity", velocity, "plate drift in pixels per frame");
  }

  ScenarioConfig scenario(const RunConfig& cfg) const {
    ScenarioConfig s;
    s.layout = cfg.ctm.layout;
    s.n_frames = frames;
    s.tilt_deg = tilt;
    s.jitter_sigma = jitter;
    s.miss_prob = miss;
    s.confusion_prob = confusion;
    s.velocity = velocity;
    s.gamma_tilt_noise = cfg.gamma_tilt_noise;
    s.seed = cfg.seed;
    return s;
  }
};

int cmd_run(const ConfigFlags& flags, const std::string& input, const std::string& output) {
  const RunConfig cfg = flags.resolve();
  StreamData data;
  if (input.empty() || input == "-") {
    data = read_stream(std::cin, cfg.strict);
  } else {
    data = read_stream(input, cfg.strict);
  }
  for (const auto& e : data.errors) std::cerr << "skipped line " << e.line << ": " << e.message << '\n';
  Output out(output);
  for (const auto& g : data.groups) out.get() << readout_to_json(run_plate(g.frames, cfg.ctm)) << '\n';
  return 0;
}

int cmd_simulate(const ConfigFlags& flags, const ScenarioFlags& sf, const std::string& text,
                 std::size_t plates, const std::string& output, const std::string& truth_path) {
  const RunConfig cfg = flags.resolve();
  std::vector<ScenarioConfig> scenarios;
  if (!text.empty()) {
    ScenarioConfig s = sf.scenario(cfg);
    s.plate_text = text;
    s.plate_id = "plate-0";
    scenarios.push_back(s);
  } else {
    BenchConfig b;
    b.scenario = sf.scenario(cfg);
    b.ctm = cfg.ctm;
    b.plates = plates;
    b.seed = cfg.seed;
    scenarios = bench_scenarios(b);
  }
  Output out(output);
  std::optional<Output> truth;
  if (!truth_path.empty()) truth.emplace(truth_path);
  for (const auto& s : scenarios) {
    Scenario sim;
    try {
      sim = simulate(s);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    write_stream(out.get(), sim.frames);
    if (truth) truth->get() << json{{"plate_id", s.plate_id}, {"text", sim.truth}}.dump() << '\n';
  }
  return 0;
}

int cmd_bench(const ConfigFlags& flags, const ScenarioFlags& sf, std::size_t plates, unsigned workers,
              const std::string& output) {
  const RunConfig cfg = flags.resolve();
  BenchConfig b;
  b.scenario = sf.scenario(cfg);
  b.ctm = cfg.ctm;
  b.plates = plates;
  b.seed = cfg.seed;
  b.workers = workers;
  const auto report = run_benchmark(b);
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back({{"method", method_name(m.method)},
                       {"plates", m.plates},
                       {"exact", m.exact},
                       {"plate_accuracy", m.plate_accuracy},
                       {"char_accuracy", m.char_accuracy},
                       {"mean_frames", m.mean_frames},
                       {"runtime_ms", m.runtime_ms}});
  }
  const json doc{{"plates", plates},
                 {"frames", sf.frames},
                 {"tilt_deg", sf.tilt},
                 {"seed", cfg.seed},
                 {"methods", std::move(methods)}};
  Output out(output);
  out.get() << doc.dump(2) << '\n';
  return 0;
}

int cmd_oracle(std::size_t trials, std::size_t max_dim, double infeasible, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(0, max_dim);
  std::uniform_real_distribution<double> cost(0.0, 100.0);
  std::bernoulli_distribution gated(infeasible);
  std::size_t mismatches = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    CostMatrix m(dim(rng), dim(rng));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) m.set(r, c, gated(rng) ? kInfeasible : cost(rng));
    }
    const auto fast = solve(m);
    const auto slow = brute_force_solve(m);
    if (fast.pairs.size() != slow.pairs.size() || fast.total_cost != slow.total_cost) {
      ++mismatches;
      std::cerr << "trial " << trial << ": solver " << fast.pairs.size() << '/' << fast.total_cost
                << " vs brute force " << slow.pairs.size() << '/' << slow.total_cost << '\n';
    }
  }
  std::cout << json{{"trials", trials}, {"max_dim", max_dim}, {"mismatches", mismatches}}.dump() << '\n';
  return mismatches == 0 ? 0 : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal fusion of per-frame license plate character detections"};
  app.require_subcommand(1);

  ConfigFlags run_flags, sim_flags, bench_flags;
  ScenarioFlags sim_scenario, bench_scenario;

  std::string run_input = "-", run_output;
  auto* run = app.add_subcommand("run", "fuse a JSONL detection stream into plate readouts");
  run->add_option("input", run_input, "detection stream, '-' for stdin");
  run->add_option("-o,--output", run_output, "readout file (default stdout)");
  run_flags.attach(run);

  std::string sim_text, sim_output, sim_truth;
  std::size_t sim_plates = 1;
  auto* sim = app.add_subcommand("simulate", "write a synthetic detection stream");
  sim->add_option("--text", sim_text, "plate text (default: random per --layout)");
  sim->add_option("--plates", sim_plates, "number of random plates")->check(CLI::PositiveNumber);
  sim->add_option("-o,--output", sim_output, "stream file (default stdout)");
  sim->add_option("--truth", sim_truth, "write ground truth JSONL here");
  sim_flags.attach(sim);
  sim_scenario.attach(sim);

  std::size_t bench_plates = 1000;
  unsigned bench_workers = 1;
  std::string bench_output;
  auto* bench = app.add_subcommand("bench", "compare single-frame and fused readers on synthetic plates");
  bench->add_option("--plates", bench_plates, "number of plates")->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_workers, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("-o,--output", bench_output, "report file (default stdout)");
  bench_flags.attach(bench);
  bench_scenario.attach(bench);
  bench_scenario.miss = 0.10;
  bench_scenario.confusion = 0.15;
  bench_scenario.jitter = 1.0;

  std::size_t oracle_trials = 1000, oracle_dim = 7;
  double oracle_infeasible = 0.2;
  std::uint64_t oracle_seed = 7;
  auto* oracle = app.add_subcommand("oracle", "cross-check the assignment solver against brute force");
  oracle->add_option("--trials", oracle_trials, "random matrices");
  oracle->add_option("--max-dim", oracle_dim, "largest side")->check(CLI::Range(0, static_cast<int>(kBruteForceLimit)));
  oracle->add_option("--infeasible", oracle_infeasible, "fraction of gated entries")->check(CLI::Range(0.0, 1.0));
  oracle->add_option("--seed", oracle_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, run_input, run_output);
    if (*sim) return cmd_simulate(sim_flags, sim_scenario, sim_text, sim_plates, sim_output, sim_truth);
    if (*bench) return cmd_bench(bench_flags, bench_scenario, bench_plates, bench_workers, bench_output);
    if (*oracle) return cmd_oracle(oracle_trials, oracle_dim, oracle_infeasible, oracle_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
