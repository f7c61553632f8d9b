// refladder: select training data, run curricula, sweep seeds, export
// reference schedules. Exit codes: 0 ok, 1 bad config, 2 I/O error,
// 3 judge retries exhausted.

#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "refladder/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kIo = 2, kJudge = 3 };

int run_select(const std::string& path, std::optional<std::uint64_t> seed) {
  auto config = refladder::load_select_config(path);
  if (seed) config.seed = *seed;
  const auto result = refladder::select_data(config);
  std::cout << refladder::format_report(result.report);
  return kOk;
}

int run_train(const std::string& path, std::optional<std::uint64_t> seed) {
  auto config = refladder::load_experiment_config(path);
  if (seed) config.seed = *seed;
  const auto result = refladder::run_experiment(config);
  std::cout << refladder::format_summary(result.summary);
  return kOk;
}

int run_sweep(const std::string& path, std::optional<std::uint64_t> seed) {
  auto config = refladder::load_sweep_config(path);
  if (seed) std::iota(config.seeds.begin(), config.seeds.end(), *seed);
  const auto result = refladder::run_sweep(config);
  std::cout << result.summary_json;
  return kOk;
}

int run_trace(const std::string& path) {
  const auto config = refladder::load_trace_export_config(path);
  refladder::export_schedule(config);
  std::cout << "wrote " << config.output.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-ladder curriculum runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* select = app.add_subcommand("select", "Score and select training instructions");
  auto* train = app.add_subcommand("train", "Run one curriculum experiment");
  auto* sweep = app.add_subcommand("sweep", "Run experiments over modes and seeds");
  auto* trace = app.add_subcommand("trace", "Export the reference schedule from a run trace");
  for (auto* sub : {select, train, sweep, trace}) {
    sub->add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  }
  for (auto* sub : {select, train, sweep}) {
    sub->add_option("-s,--seed", seed, "Override the seed (sweep: first of consecutive seeds)");
  }

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (select->parsed()) return run_select(config_path, seed);
    if (train->parsed()) return run_train(config_path, seed);
    if (sweep->parsed()) return run_sweep(config_path, seed);
    return run_trace(config_path);
  } catch (const refladder::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kConfig;
  } catch (const refladder::IoError& e) {
    spdlog::error("io: {}", e.what());
    return kIo;
  } catch (const refladder::JudgeExhaustedError& e) {
    spdlog::error("judge: {}", e.what());
    return kJudge;
  } catch (const refladder::JudgeTransportError& e) {
    spdlog::error("judge: {}", e.what());
    return kJudge;
  }
}
