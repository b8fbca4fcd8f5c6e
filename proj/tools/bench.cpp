// Benchmark driver: simulate workloads, run monitors with or without
// pruning, and compare verdict files.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rtm/bench.hpp"
#include "rtm/formula.hpp"
#include "rtm/pruner.hpp"
#include "rtm/verdict_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInput = 2;
constexpr int kInvariant = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) throw InputError("cannot write " + path.string());
}

struct SimOptions {
  rtm::SimConfig config;
  void add(CLI::App& app) {
    app.add_option("--sensors", config.num_sensors, "Number of sensor/pump pairs")->capture_default_str();
    app.add_option("--datums", config.datum_events_per_sensor, "Datum events per sensor")->capture_default_str();
    app.add_option("--reactions", config.reaction_events_per_pump, "Reaction events per pump")->capture_default_str();
    app.add_option("--op-probability", config.op_probability, "Probability that a datum is 'op'")->capture_default_str();
    app.add_option("--horizon", config.horizon, "Timestamps are drawn from [1, horizon]")->capture_default_str();
  }
};

rtm::StructuralQuery load_query(const std::string& path, rtm::PastSemantics semantics) {
  const rtm::Formula formula = rtm::parse_formula(read_text(path));
  return rtm::translate(formula, rtm::TranslateOptions{semantics});
}

bool verdicts_monotone(const std::vector<rtm::MatchVerdict>& verdicts) {
  return std::is_sorted(verdicts.begin(), verdicts.end(),
                        [](const auto& a, const auto& b) { return a.trigger_time < b.trigger_time; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime model monitoring benchmark"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Evaluate a formula over a workload");
  std::string variant_text = "intempo";
  std::string formula_path;
  std::string events_path;
  std::uint64_t sim_seed = 0;
  SimOptions run_sim;
  rtm::Seconds loop = 3600;
  std::string semantics_text = "lifespan";
  std::string out_dir;
  std::optional<std::size_t> warmup;
  run->add_option("--variant", variant_text, "intempo | intempo-plus | oracle")->capture_default_str();
  run->add_option("--formula", formula_path, "Formula file")->required();
  auto* events_opt = run->add_option("--events", events_path, "Event file");
  auto* seed_opt = run->add_option("--sim-seed", sim_seed, "Generate the workload with this seed");
  events_opt->excludes(seed_opt);
  run_sim.add(*run);
  run->add_option("--loop", loop, "Loop interval in seconds")->capture_default_str();
  run->add_option("--semantics", semantics_text, "lifespan | occurrence (default for once)")->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--warmup-loops", warmup, "Loops excluded from summary statistics (default 5%)");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two verdict CSV files");
  std::string csv_a;
  std::string csv_b;
  compare->add_option("first", csv_a)->required();
  compare->add_option("second", csv_b)->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Write a generated workload as an event file");
  SimOptions sim;
  std::string sim_out;
  simulate->add_option("--seed", sim.config.seed, "Generator seed")->capture_default_str();
  sim.add(*simulate);
  simulate->add_option("--out", sim_out, "Event file to write")->required();

  // plan
  auto* plan = app.add_subcommand("plan", "Print the translated plan and pruning rules");
  std::string plan_formula;
  std::string plan_semantics = "lifespan";
  plan->add_option("--formula", plan_formula, "Formula file")->required();
  plan->add_option("--semantics", plan_semantics, "lifespan | occurrence")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compare) {
      const auto result = rtm::compare_verdict_files(csv_a, csv_b);
      if (result.equal) {
        std::cout << "equal\n";
        return kOk;
      }
      std::cout << "divergence at line " << result.line_a << " (first) / " << result.line_b << " (second): "
                << result.message << '\n';
      return kInvariant;
    }

    if (*simulate) {
      const auto workload = rtm::generate(sim.config);
      rtm::write_events(sim_out, workload.events(), sim.config.header());
      std::cout << "wrote " << workload.initial.size() + 2 * workload.observations.size() << " events to " << sim_out
                << '\n';
      return kOk;
    }

    if (*plan) {
      const auto semantics = rtm::parse_semantics(plan_semantics);
      if (!semantics) {
        std::cerr << "unknown semantics '" << plan_semantics << "'\n";
        return kUsage;
      }
      const auto query = load_query(plan_formula, *semantics);
      std::cout << rtm::format_plan(query) << "pruning rules:\n";
      for (const auto& r : rtm::derive_rules({query}, rtm::shs_schema())) std::cout << "  " << r.to_string() << '\n';
      return kOk;
    }

    const auto variant = rtm::parse_variant(variant_text);
    const auto semantics = rtm::parse_semantics(semantics_text);
    if (!variant || !semantics) {
      std::cerr << "unknown variant or semantics\n";
      return kUsage;
    }
    if (events_path.empty() && seed_opt->count() == 0) {
      std::cerr << "one of --events or --sim-seed is required\n";
      return kUsage;
    }
    const auto query = load_query(formula_path, *semantics);
    const rtm::TypeSchema schema = rtm::shs_schema();

    rtm::EventSequence events;
    rtm::RunOptions options{*variant, loop, 0};
    if (!events_path.empty()) {
      events = rtm::read_events(events_path);
    } else {
      run_sim.config.seed = sim_seed;
      run_sim.config.loop_interval = loop;
      events = rtm::generate(run_sim.config).events();
      options.horizon = run_sim.config.horizon;
    }

    std::filesystem::create_directories(out_dir);
    const auto result = rtm::run_workload(query, schema, events, options);
    for (const auto& d : result.diagnostics) std::cerr << "warning: " << d << '\n';
    rtm::write_verdicts_csv(std::filesystem::path(out_dir) / "verdicts.csv", result.verdicts);
    if (*variant != rtm::Variant::kOracle) {
      write_text(std::filesystem::path(out_dir) / "loops.csv", rtm::format_loops_csv(result.loops));
      std::cout << rtm::format_summary(rtm::summarize(result.loops, warmup));
      if (const auto rss = rtm::resident_bytes()) std::cout << "resident set: " << *rss << " bytes\n";
      if (!verdicts_monotone(result.verdicts)) {
        std::cerr << "invariant failure: verdicts out of trigger-time order\n";
        return kInvariant;
      }
    }
    std::cout << "verdicts: " << result.verdicts.size() << '\n';
    return kOk;
  } catch (const rtm::QueryError& e) {
    std::cerr << "formula error: " << e.what() << '\n';
    return kInput;
  } catch (const rtm::EventFileError& e) {
    std::cerr << "event file error: " << e.what() << '\n';
    return kInput;
  } catch (const rtm::VerdictFileError& e) {
    std::cerr << "verdict file error (line " << e.line() << "): " << e.what() << '\n';
    return kInput;
  } catch (const rtm::ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kInput;
  } catch (const rtm::SimConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInput;
  } catch (const InputError& e) {
    std::cerr << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
}
