#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "llmscape/backends.hpp"
#include "llmscape/orchestrator.hpp"
#include "llmscape/service.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct RunOptions {
  std::string scenario = "default";
  std::optional<std::uint64_t> seed;
  std::string backend = "scripted";
  std::optional<std::string> script;
  std::optional<long long> ticks;
  bool headless = false;
  std::string log = "llmscape-session.jsonl";
  std::optional<std::string> listen;
};

std::pair<std::string, unsigned short> split_listen(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos)
    throw llmscape::Error(llmscape::Errc::configuration_error, "--listen expects addr:port");
  const int port = std::stoi(address.substr(colon + 1));
  if (port < 0 || port > 65535)
    throw llmscape::Error(llmscape::Errc::configuration_error, "--listen port out of range");
  return {address.substr(0, colon), static_cast<unsigned short>(port)};
}

void print_result(const llmscape::SessionResult& result, const std::string& log) {
  std::cout << "ticks " << result.ticks << "\n"
            << "actions " << result.executed_actions << "\n"
            << "digest " << result.digest << "\n"
            << "log " << log << "\n";
}

int run(const RunOptions& options) {
  using namespace llmscape;
  Scenario scenario = resolve_scenario(options.scenario);
  if (options.seed) scenario.seed = *options.seed;

  std::shared_ptr<Backend> backend;
  if (options.backend == "live") {
    backend = std::make_shared<LiveBackend>(LiveBackendConfig::from_environment());
  } else {
    std::optional<std::filesystem::path> script;
    if (options.script) script = *options.script;
    backend = make_scripted_backend(scenario, script);
  }

  SessionLog log(options.log);

  if (options.headless && !options.listen) {
    Simulation simulation(std::move(scenario), backend, log);
    const llmscape::Tick ticks = options.ticks.value_or(500);
    for (llmscape::Tick i = 0; i < ticks && !g_interrupted; ++i) simulation.tick();
    simulation.finish();
    log.close();
    print_result({simulation.clock().tick, simulation.state_digest(), simulation.executed_actions()}, options.log);
    return 0;
  }

  HostOptions host_options;
  if (options.ticks) host_options.max_ticks = *options.ticks;
  host_options.tick_interval = options.headless ? std::chrono::milliseconds(0) : std::chrono::milliseconds(500);
  SessionHost host(std::move(scenario), backend, log, host_options);

  std::unique_ptr<ApiServer> server;
  if (options.listen) {
    const auto [address, port] = split_listen(*options.listen);
    server = std::make_unique<ApiServer>(host, address, port);
    server->start();
    std::cerr << "listening on " << address << ":" << server->port() << "\n";
  }
  host.start();
  while (host.running() && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  host.stop();
  // Keep serving the finished session until interrupted.
  while (server && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  if (server) server->stop();
  if (const auto result = host.result()) print_result(*result, options.log);
  return 0;
}

int replay_command(const std::string& log_file, const std::string& scenario_name,
                   const std::optional<std::string>& script) {
  using namespace llmscape;
  std::optional<std::filesystem::path> script_path;
  if (script) script_path = *script;
  try {
    const ReplayResult result = replay(log_file, resolve_scenario(scenario_name), script_path);
    std::cout << "replay ok: " << result.lines << " lines, " << result.ticks << " ticks, digest "
              << result.digest << "\n";
    return 0;
  } catch (const ReplayError& e) {
    std::cerr << "replay diverged at seq " << e.seq() << ": " << e.what() << "\n";
    return 2;
  }
}

int summarize_command(const std::string& log_file) {
  using namespace llmscape;
  try {
    std::cout << to_json(summarize(log_file)).dump(2) << "\n";
    return 0;
  } catch (const SummaryError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"llmscape: a sandbox of language-model agents on a mutable island"};
  app.require_subcommand(1);

  RunOptions run_options;
  auto* run_cmd = app.add_subcommand("run", "Run a session");
  run_cmd->add_option("--scenario", run_options.scenario, "Scenario file, or 'default'");
  run_cmd->add_option("--seed", run_options.seed, "Override the scenario seed");
  run_cmd->add_option("--backend", run_options.backend, "Model backend")->check(CLI::IsMember({"scripted", "live"}));
  run_cmd->add_option("--script", run_options.script, "Script file for the scripted backend");
  run_cmd->add_option("--ticks", run_options.ticks, "Number of ticks (headless default 500)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--headless", run_options.headless, "Run as fast as possible without pacing");
  run_cmd->add_option("--log", run_options.log, "Session log path");
  run_cmd->add_option("--listen", run_options.listen, "Serve HTTP and the event stream on addr:port");

  std::string replay_log;
  std::string replay_scenario = "default";
  std::optional<std::string> replay_script;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a logged scripted session and compare");
  replay_cmd->add_option("log", replay_log, "Session log")->required();
  replay_cmd->add_option("--scenario", replay_scenario, "Scenario file, or 'default'");
  replay_cmd->add_option("--script", replay_script, "Script file used for the session");

  std::string summary_log;
  auto* summarize_cmd = app.add_subcommand("summarize", "Count log entries by category, actor and action");
  summarize_cmd->add_option("log", summary_log, "Session log")->required();

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*run_cmd) return run(run_options);
    if (*replay_cmd) return replay_command(replay_log, replay_scenario, replay_script);
    if (*summarize_cmd) return summarize_command(summary_log);
  } catch (const llmscape::Error& e) {
    std::cerr << "error (" << llmscape::to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
