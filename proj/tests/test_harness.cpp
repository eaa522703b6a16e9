#include <gtest/gtest.h>

#include <cmath>

#include "hihooi/errors.hpp"
#include "hihooi/harness.hpp"

using namespace hihooi;

namespace {

TEST(Zipf, TopKeyMassMatchesAnalyticWithinFivePercent) {
  ZipfDist dist(1000, 1.0);
  std::mt19937_64 rng(123);
  const int draws = 100000;
  int top = 0;
  for (int i = 0; i < draws; ++i) {
    if (dist.draw(rng) == 1) ++top;
  }
  double observed = static_cast<double>(top) / draws;
  double expected = dist.mass(1);
  EXPECT_LT(std::abs(observed - expected) / expected, 0.05)
      << "observed " << observed << " expected " << expected;
  // mass sums to one
  double sum = 0;
  for (int64_t k = 1; k <= 1000; ++k) sum += dist.mass(k);
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Workload, MixValidation) {
  std::string bad_sum = R"(
[table T]
columns = K:int, V:int
pk = K
preload = 10

[template r]
stmt = SELECT V FROM T WHERE K = ?
bind = uniform(1, 10)

[mix]
r = 90
)";
  EXPECT_THROW(parse_workload(bad_sum), ClusterError);

  std::string unknown_template = R"(
[table T]
columns = K:int, V:int
pk = K

[mix]
ghost = 100
)";
  EXPECT_THROW(parse_workload(unknown_template), ClusterError);

  std::string bad_stmt = R"(
[table T]
columns = K:int, V:int
pk = K

[template r]
stmt = SELECT NOPE FROM T

[mix]
r = 100
)";
  EXPECT_THROW(parse_workload(bad_stmt), ClusterError);

  std::string bind_mismatch = R"(
[table T]
columns = K:int, V:int
pk = K

[template r]
stmt = SELECT V FROM T WHERE K = ?

[mix]
r = 100
)";
  EXPECT_THROW(parse_workload(bind_mismatch), ClusterError);
}

TEST(Workload, GeneratorDeterminism) {
  WorkloadSpec spec = load_workload("order-writeheavy");
  WorkloadGenerator a(spec, 77);
  WorkloadGenerator b(spec, 77);
  for (int i = 0; i < 200; ++i) {
    GeneratedTxn ta = a.next();
    GeneratedTxn tb = b.next();
    ASSERT_EQ(ta.template_idx, tb.template_idx);
    ASSERT_EQ(ta.stmts.size(), tb.stmts.size());
    for (size_t j = 0; j < ta.stmts.size(); ++j)
      ASSERT_EQ(render(ta.stmts[j]), render(tb.stmts[j]));
  }
}

TEST(Workload, ReadOnlyMixGeneratesOnlyReads) {
  WorkloadSpec spec = load_workload("kv-readonly");
  WorkloadGenerator gen(spec, 5);
  for (int i = 0; i < 100; ++i) {
    GeneratedTxn t = gen.next();
    EXPECT_TRUE(t.read_only);
    for (const auto& st : t.stmts) EXPECT_TRUE(st.is_read());
  }
}

TEST(Workload, BuiltinsAllParse) {
  for (const auto& name : builtin_workload_names()) {
    WorkloadSpec spec = load_workload(name);
    EXPECT_FALSE(spec.templates.empty()) << name;
    WorkloadGenerator gen(spec, 1);
    for (int i = 0; i < 20; ++i) {
      GeneratedTxn t = gen.next();
      for (const auto& st : t.stmts) EXPECT_TRUE(st.bound());
    }
  }
}

TEST(Determinism, ByteIdenticalCsvForSameSeed) {
  ExperimentConfig cfg;
  cfg.mix = "kv-writeheavy";
  cfg.clients = 8;
  cfg.txns = 400;
  cfg.seed = 2024;
  cfg.cluster.replicas = 2;
  MetricsReport a = run_experiment(cfg);
  MetricsReport b = run_experiment(cfg);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.final_primary_dump, b.final_primary_dump);

  cfg.seed = 2025;
  cfg.cluster.rng_seed = 99;
  MetricsReport c = run_experiment(cfg);
  EXPECT_NE(a.to_csv(), c.to_csv());  // different seed, different history
}

TEST(Levels, WeakSiObservesStalenessOnAdversarialMix) {
  ExperimentConfig cfg;
  cfg.mix = "adversarial";
  cfg.level = ConsistencyLevel::WeakSI;
  cfg.clients = 8;
  cfg.txns = 600;
  cfg.cluster.replicas = 2;
  cfg.cluster.net_delay = 40;  // lag the replicas hard
  MetricsReport r = run_experiment(cfg);
  EXPECT_GE(r.staleness_observed, 1u);
}

TEST(Levels, GssiSameAdversarialMixHasNoViolations) {
  ExperimentConfig cfg;
  cfg.mix = "adversarial";
  cfg.level = ConsistencyLevel::GSSI;
  cfg.clients = 8;
  cfg.txns = 600;
  cfg.cluster.replicas = 2;
  cfg.cluster.net_delay = 40;
  MetricsReport r = run_experiment(cfg);
  EXPECT_EQ(r.gssi_violations, 0u);
  EXPECT_GT(r.checked_reads, 0u);
}

TEST(Levels, RsiPcWaitsInsteadOfGoingStale) {
  ExperimentConfig cfg;
  cfg.mix = "kv-writeheavy";
  cfg.level = ConsistencyLevel::RSIPC;
  cfg.clients = 6;
  cfg.txns = 400;
  cfg.cluster.replicas = 2;
  cfg.cluster.net_delay = 4;
  MetricsReport r = run_experiment(cfg);
  EXPECT_GT(r.total().waits, 0u);
  EXPECT_EQ(r.total().committed + r.total().aborted, cfg.txns);
}

TEST(Levels, OneSrCommitsWaitForAllReplicas) {
  ExperimentConfig cfg;
  cfg.mix = "kv-balanced";
  cfg.level = ConsistencyLevel::OneSR;
  cfg.clients = 6;
  cfg.txns = 300;
  cfg.cluster.replicas = 2;
  MetricsReport r = run_experiment(cfg);
  EXPECT_EQ(r.total().committed + r.total().aborted, cfg.txns);
  EXPECT_TRUE(r.quiesced);
}

TEST(CompareModes, BalancedMixParallelCatchesUpFaster) {
  ExperimentConfig cfg;
  cfg.mix = "kv-balanced";
  cfg.clients = 12;
  cfg.txns = 800;
  cfg.seed = 31;
  cfg.cluster.replicas = 2;
  CompareReport cr = compare_replay_modes(cfg);
  EXPECT_TRUE(cr.states_equal);
  EXPECT_LE(cr.parallel.mean_replay_lag, cr.serial.mean_replay_lag);
}

TEST(CompareModes, ReadOnlyMixIndistinguishable) {
  ExperimentConfig cfg;
  cfg.mix = "kv-readonly";
  cfg.clients = 12;
  cfg.txns = 600;
  cfg.cluster.replicas = 2;
  CompareReport cr = compare_replay_modes(cfg);
  EXPECT_TRUE(cr.states_equal);
  EXPECT_EQ(cr.parallel.total().committed, cr.serial.total().committed);
  EXPECT_EQ(cr.parallel.total().end, cr.serial.total().end);  // no writes, identical timelines
}

TEST(Report, PhasesSplitAtFaultBoundaries) {
  ExperimentConfig cfg;
  cfg.mix = "kv-balanced";
  cfg.clients = 8;
  cfg.txns = 500;
  cfg.cluster.replicas = 2;
  cfg.fail_buffer_at = 120;
  cfg.recover_buffer_at = 260;
  MetricsReport r = run_experiment(cfg);
  ASSERT_EQ(r.phases.size(), 4u);  // p0, p1, p2, total
  EXPECT_EQ(r.phases[0].name, "p0");
  EXPECT_EQ(r.phases[1].start, 120u);
  EXPECT_EQ(r.phases[2].start, 260u);
  EXPECT_EQ(r.phases.back().name, "total");
  std::string csv = r.to_csv();
  EXPECT_NE(csv.find("phase,txns_committed"), std::string::npos);
  EXPECT_NE(csv.find("\np0,"), std::string::npos);
  EXPECT_NE(csv.find("\ntotal,"), std::string::npos);
}

TEST(Probes, AblationMonotonicityHoldsOnline) {
  ExperimentConfig cfg;
  cfg.mix = "kv-writeheavy";
  cfg.clients = 8;
  cfg.txns = 500;
  cfg.cluster.replicas = 2;
  cfg.check_ablation = true;
  MetricsReport r = run_experiment(cfg);
  EXPECT_GT(r.ablation_checked, 0u);
  EXPECT_EQ(r.ablation_violations, 0u);
}

}  // namespace
