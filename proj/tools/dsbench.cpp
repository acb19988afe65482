// Benchmark and checking CLI for the message-passing data-structure
// simulator. `dsbench run` executes one workload and reports metrics;
// `dsbench check` replays a recorded history against a sequential spec.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mpds/bench.hpp"
#include "mpds/history.hpp"
#include "mpds/linearize.hpp"

using namespace mpds;

namespace {

int cmd_run(const WorkloadConfig& cfg, const std::string& csv_path,
            const std::string& history_path) {
  RunOutput out = run_workload(cfg);
  const MetricsRecord& m = out.metrics;

  if (out.deadlocked || out.truncated) {
    std::fprintf(stderr, "run did not finish cleanly:\n%s\n",
                 out.diagnostic.c_str());
    return 2;
  }

  std::printf("algo=%s m=%d c=%d ops=%lld work=%lld seed=%llu\n",
              m.algo.c_str(), m.islands, m.cores,
              static_cast<long long>(m.ops), static_cast<long long>(m.work),
              static_cast<unsigned long long>(m.seed));
  std::printf("steps=%lld total_msgs=%lld throughput=%.6f ops/step\n",
              static_cast<long long>(m.steps),
              static_cast<long long>(m.total_msgs), m.throughput);
  for (const auto& [role, msgs] : m.server_msgs)
    std::printf("  server %-8s msgs=%-10lld sf_s=%.6f\n", role.c_str(),
                static_cast<long long>(msgs), m.sf_of(role));
  std::printf("sf=%.6f (max over servers)\n", m.sf);

  if (!csv_path.empty()) emit_csv(m, csv_path);
  if (!history_path.empty()) {
    std::FILE* f = std::fopen(history_path.c_str(), "w");
    if (!f) {
      std::fprintf(stderr, "cannot open %s\n", history_path.c_str());
      return 1;
    }
    out.history.write_csv(f);
    std::fclose(f);
    std::printf("history (%zu events, spec %s) -> %s\n",
                out.history.events().size(), out.spec_name.c_str(),
                history_path.c_str());
  }
  return 0;
}

int cmd_check(const std::string& history_path, const std::string& spec_name,
              int cap) {
  auto kind = spec_from_name(spec_name);
  if (!kind) {
    std::fprintf(stderr, "unknown spec: %s\n", spec_name.c_str());
    return 1;
  }
  std::FILE* f = std::fopen(history_path.c_str(), "r");
  if (!f) {
    std::fprintf(stderr, "cannot open %s\n", history_path.c_str());
    return 1;
  }
  auto events = History::read_csv(f);
  std::fclose(f);

  LinResult r = check_history(events, *kind, cap);
  if (r.gave_up) {
    std::printf(
        "refused: history has %zu operations, above the search cap of %d\n",
        History::extract(events).size(), cap);
    return 3;
  }
  if (r.ok) {
    std::printf("linearizable; witness order:");
    for (int i : r.witness) std::printf(" %d", i);
    std::printf("\n");
    return 0;
  }
  std::printf("NOT linearizable; minimal failing prefix: %lld events\n",
              static_cast<long long>(r.failing_prefix));
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"message-passing distributed data structure benchmarks"};
  app.require_subcommand(1);

  WorkloadConfig cfg;
  std::string csv_path, history_path, events_path;
  std::string hier_s = "off", elim_s = "off";

  auto* run = app.add_subcommand("run", "run one workload");
  run->add_option("--algo", cfg.algo, "algorithm id")
      ->required()
      ->check(CLI::IsMember(bench_algos()));
  run->add_option("--islands", cfg.islands, "islands (m)");
  run->add_option("--cores", cfg.cores_per_island, "cores per island (c)");
  run->add_option("--ops", cfg.ops, "total operations (N, kept even)");
  run->add_option("--work", cfg.work, "local work bound per op (W)");
  run->add_option("--seed", cfg.seed, "scheduler seed");
  run->add_option("--capacity", cfg.capacity, "structure chunk capacity");
  run->add_option("--hier", hier_s, "hierarchical masters: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--elim", elim_s, "elimination at masters: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--csv", csv_path, "append one metrics row to this file");
  run->add_option("--history", history_path, "write the op history here");
  run->add_option("--servers", cfg.servers, "server count (NS)");
  run->add_flag("--dynamic", cfg.dynamic, "dynamic token variant");
  run->add_option("--period", cfg.master_period, "master flush period");
  run->add_option("--batch-cap", cfg.master_cap, "master early-flush size");

  std::string check_history_path, spec_name = "queue";
  int cap = kLinearizeCap;
  auto* check = app.add_subcommand("check", "check a recorded history");
  check->add_option("--history", check_history_path, "history csv")
      ->required();
  check->add_option("--spec", spec_name, "sequential spec")
      ->check(CLI::IsMember({"stack", "queue", "deque", "set", "register"}));
  check->add_option("--cap", cap, "operation-count cap for the search");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.hier = hier_s == "on";
      cfg.elim = elim_s == "on";
      return cmd_run(cfg, csv_path, history_path);
    }
    return cmd_check(check_history_path, spec_name, cap);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
