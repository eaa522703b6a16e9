// Command-line front end: run simulated experiments, verify the invariant
// suite at a small scale, or replay the worked golden example.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hihooi/harness.hpp"

using namespace hihooi;

namespace {

int cmd_run(const std::string& mix, int replicas, int clients, uint64_t txns,
            const std::string& level_s, const std::string& gran_s, const std::string& lb_s,
            uint64_t seed, const std::string& fail_buffer, uint64_t remove_at, uint64_t add_at,
            bool serial, const std::string& out_file) {
  ExperimentConfig cfg;
  cfg.mix = mix;
  cfg.cluster.replicas = replicas;
  cfg.clients = clients;
  cfg.txns = txns;
  cfg.seed = seed;
  cfg.cluster.rng_seed = seed;
  cfg.cluster.serial_replay = serial;

  auto level = level_from(level_s);
  if (!level) {
    std::cerr << "unknown consistency level: " << level_s << "\n";
    return 2;
  }
  cfg.level = *level;
  auto gran = granularity_from(gran_s);
  if (!gran) {
    std::cerr << "unknown granularity: " << gran_s << "\n";
    return 2;
  }
  cfg.cluster.tm.granularity = *gran;
  auto lb = lb_mode_from(lb_s);
  if (!lb) {
    std::cerr << "unknown lb mode: " << lb_s << "\n";
    return 2;
  }
  cfg.cluster.tm.lb = *lb;

  if (!fail_buffer.empty()) {
    auto colon = fail_buffer.find(':');
    if (colon == std::string::npos) {
      std::cerr << "--fail-buffer-at expects FAIL:RECOVER\n";
      return 2;
    }
    cfg.fail_buffer_at = std::stoull(fail_buffer.substr(0, colon));
    cfg.recover_buffer_at = std::stoull(fail_buffer.substr(colon + 1));
  }
  cfg.remove_replica_at = remove_at;
  cfg.add_replica_at = add_at;

  try {
    MetricsReport report = run_experiment(cfg);
    std::string csv = report.to_csv();
    if (!out_file.empty()) {
      std::ofstream out(out_file);
      out << csv;
    }
    std::cout << csv;
    const PhaseStats& total = report.total();
    std::cout << "# committed=" << total.committed << " aborted=" << total.aborted
              << " throughput=" << total.throughput() << " lag=" << report.mean_replay_lag
              << " dp=" << report.dp_estimate << " checked_reads=" << report.checked_reads
              << " reroutes=" << report.reroutes << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

bool report_check(const char* name, bool ok) {
  std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
  return ok;
}

int cmd_verify() {
  bool all = true;
  try {
    GoldenResult g = run_golden();
    all &= report_check("golden: TSIDs 11..15",
                        g.tsids == std::vector<Tsid>({11, 12, 13, 14, 15}));
    all &= report_check("golden: consistent TSIDs 14/13/12/14",
                        g.read_tsids == std::vector<Tsid>({14, 13, 12, 14}));
    all &= report_check("golden: scheduler trace", g.schedule_trace == golden_expected_trace());

    bool replay_ok = true;
    for (uint64_t seed = 1; seed <= 25 && replay_ok; ++seed) {
      ReplayBatch batch = make_replay_batch(seed, 60);
      std::string want = serial_replay_dump(batch);
      replay_ok &= fuzz_parallel_replay(batch, seed * 77 + 1) == want;
    }
    all &= report_check("parallel replay equals serial oracle (25 seeds)", replay_ok);

    ExperimentConfig gssi;
    gssi.mix = "kv-writeheavy";
    gssi.clients = 8;
    gssi.txns = 400;
    MetricsReport r = run_experiment(gssi);
    all &= report_check("GSSI recorder: zero violations", r.gssi_violations == 0);
    all &= report_check("no-loss partition + quiesce", r.quiesced);

    ExperimentConfig weak = gssi;
    weak.mix = "adversarial";
    weak.level = ConsistencyLevel::WeakSI;
    weak.cluster.net_delay = 40;
    MetricsReport w = run_experiment(weak);
    all &= report_check("Weak-SI: staleness observable", w.staleness_observed >= 1);

    ExperimentConfig onesr = gssi;
    onesr.mix = "kv-balanced";
    onesr.level = ConsistencyLevel::OneSR;
    onesr.txns = 300;
    MetricsReport o = run_experiment(onesr);
    all &= report_check("1SR run completes with zero violations", o.gssi_violations == 0);
  } catch (const std::exception& e) {
    std::cerr << "verify aborted: " << e.what() << "\n";
    return 1;
  }
  std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES present\n");
  return all ? 0 : 1;
}

int cmd_golden() {
  GoldenResult g = run_golden();
  std::cout << "write transactions:\n" << g.rwset_dumps;
  std::cout << "assigned TSIDs:";
  for (Tsid t : g.tsids) std::cout << " " << t;
  std::cout << "\n\nhash indexes after W1..W5:\n" << g.index_dump;
  std::cout << "\nconsistent TSIDs for R1..R4:";
  for (Tsid t : g.read_tsids) std::cout << " " << t;
  std::cout << "\n\nscheduler trace:\n";
  for (const auto& ev : g.schedule_trace) std::cout << "  " << ev << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hihooi replication middleware simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a simulated experiment");
  std::string mix = "kv-balanced", level = "gssi", gran = "all", lb = "stmt";
  std::string fail_buffer, out_file;
  int replicas = 2, clients = 16;
  uint64_t txns = 2000, seed = 42, remove_at = 0, add_at = 0;
  bool serial = false;
  run->add_option("--mix", mix, "builtin mix name or workload file");
  run->add_option("--replicas", replicas, "extension db count");
  run->add_option("--clients", clients, "concurrent clients");
  run->add_option("--txns", txns, "transactions to issue");
  run->add_option("--level", level, "weak-si|gssi|rsi-pc|1sr");
  run->add_option("--granularity", gran, "tas|cas|all");
  run->add_option("--lb", lb, "txn|stmt");
  run->add_option("--seed", seed, "rng seed");
  run->add_option("--fail-buffer-at", fail_buffer, "FAIL:RECOVER ticks");
  run->add_option("--remove-replica-at", remove_at, "tick");
  run->add_option("--add-replica-at", add_at, "tick");
  run->add_flag("--serial-replay", serial, "serial extractor baseline");
  run->add_option("--out", out_file, "write CSV here");

  auto* verify = app.add_subcommand("verify", "run the invariant/oracle suite");
  auto* golden = app.add_subcommand("golden", "replay the worked example tables");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return cmd_run(mix, replicas, clients, txns, level, gran, lb, seed, fail_buffer, remove_at,
                   add_at, serial, out_file);
  if (verify->parsed()) return cmd_verify();
  if (golden->parsed()) return cmd_golden();
  return 0;
}
