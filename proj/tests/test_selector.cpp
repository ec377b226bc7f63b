#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "graphfilter/selector.hpp"
#include "support/corpora.hpp"

namespace gf = graphfilter;
using gf::PriorityMode;

namespace {

constexpr PriorityMode kModes[] = {PriorityMode::combined, PriorityMode::quality_only,
                                   PriorityMode::diversity_only, PriorityMode::uniform};

gf::BuiltGraph worked_example() { return gf::build_graph(gf::testing::worked_example_instances(), {.orders = {1}}); }

}  // namespace

// s0 "a b", s1 "b c", s2 "c c d" over unigrams, N = 3.
// tf: a1 b2 c3 d1; df: a1 b2 c2 d1; tfidf: a ln3, b 2ln1.5, c 3ln1.5, d ln3.
TEST(Diversity, HandComputedTable) {
  auto [g, stats] = gf::build_graph(gf::make_instances({{"a b", "r"}, {"b c", "r"}, {"c c d", "r"}}),
                                    {.orders = {1}});
  const double ln3 = std::log(3.0);
  const double ln15 = std::log(1.5);
  EXPECT_NEAR(gf::diversity(0, g, stats), ln3 + 2 * ln15, 1e-12);
  EXPECT_NEAR(gf::diversity(1, g, stats), 5 * ln15, 1e-12);
  EXPECT_NEAR(gf::diversity(2, g, stats), 3 * ln15 + ln3, 1e-12);

  const double before = gf::diversity(1, g, stats);
  g.remove_selected(0);
  EXPECT_NEAR(before - gf::diversity(1, g, stats), 2 * ln15, 1e-12);
  EXPECT_THROW(gf::diversity(0, g, stats), gf::Error);
}

TEST(Diversity, EdgelessSentenceIsZero) {
  auto [g, stats] = gf::build_graph(gf::make_instances({{"solo", "r"}, {"x y", "r"}}), {.orders = {2}});
  EXPECT_EQ(gf::diversity(0, g, stats), 0.0);
}

TEST(Priority, Modes) {
  auto [g, stats] = gf::build_graph(gf::make_instances({{"a b", "r"}}), {.orders = {1}});
  stats.tfidf = {1.5, 2.5};
  const std::vector<double> q = {0.5};
  EXPECT_EQ(gf::priority(0, g, stats, q, PriorityMode::combined), 2.0);
  EXPECT_EQ(gf::priority(0, g, stats, q, PriorityMode::quality_only), 0.5);
  EXPECT_EQ(gf::priority(0, g, stats, q, PriorityMode::diversity_only), 4.0);
  EXPECT_EQ(gf::priority(0, g, stats, q, PriorityMode::uniform), 2.0);
  EXPECT_THROW(gf::priority(0, g, stats, {}, PriorityMode::combined), gf::Error);
}

TEST(Priority, WorkedExampleDegreesAndCoveredSentences) {
  auto [g, stats] = worked_example();
  const double expected[] = {3, 2, 2, 2, 2};
  for (gf::SentenceId u = 0; u < 5; ++u) {
    EXPECT_EQ(gf::priority(u, g, stats, {}, PriorityMode::uniform), expected[u]);
  }
  g.remove_selected(0);
  const std::vector<double> q(5, 7.0);
  EXPECT_EQ(gf::priority(1, g, stats, q, PriorityMode::combined), 0.0);
}

TEST(Select, WorkedExample) {
  const auto [g, stats] = worked_example();
  for (auto* run : {&gf::select, &gf::select_reference}) {
    const auto result = (*run)(g, stats, {}, {.budget = 2, .mode = PriorityMode::uniform, .audit = false});
    EXPECT_EQ(result.selected, (std::vector<gf::SentenceId>{0, 3}));
    EXPECT_EQ(result.covered_ngrams, 5u);
    EXPECT_EQ(result.initial_ngrams, 5u);
    ASSERT_EQ(result.steps.size(), 2u);
    EXPECT_EQ(result.steps[0].priority, 3.0);
    EXPECT_EQ(result.steps[0].newly_covered, 3u);
    EXPECT_EQ(result.steps[1].priority, 2.0);
    EXPECT_EQ(result.steps[1].newly_covered, 2u);
  }
}

TEST(Select, BudgetBeyondSupply) {
  const auto [g, stats] = worked_example();
  const std::vector<double> q = {1.0, 2.0, 3.0, 4.0, 5.0};
  for (auto mode : kModes) {
    const auto result = gf::select(g, stats, q, {.budget = 50, .mode = mode, .audit = true});
    auto ids = result.selected;
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(ids, (std::vector<gf::SentenceId>{0, 1, 2, 3, 4}));
    EXPECT_EQ(result, gf::select_reference(g, stats, q, {.budget = 50, .mode = mode}));
  }
}

TEST(Select, CoveredRegimeFallsBackToQualityThenId) {
  // Duplicated sentences: once one copy is picked the other has priority 0.
  // Every unigram has tf 2, df 2, weight 2ln2; diversity is 4ln2 for s0/s1 and 2ln2 for s2/s3.
  const auto [g, stats] = gf::build_graph(
      gf::make_instances({{"u v", "r"}, {"u v", "r"}, {"w", "r"}, {"w", "r"}}), {.orders = {1}});
  const std::vector<double> q = {1.0, 3.0, 2.0, 2.0};
  const auto result = gf::select(g, stats, q, {.budget = 4, .mode = PriorityMode::combined, .audit = true});
  // Combined: s1 (3 * 4ln2) first, then s2 (ties s3 on priority and quality, lower id).
  // Remaining priorities are 0; quality breaks the tie: s3 (2.0) before s0 (1.0).
  EXPECT_EQ(result.selected, (std::vector<gf::SentenceId>{1, 2, 3, 0}));
  EXPECT_EQ(result.steps[2].priority, 0.0);

  const auto div = gf::select(g, stats, q, {.budget = 4, .mode = PriorityMode::diversity_only});
  // Diversity ignores quality: ties go to the lower id.
  EXPECT_EQ(div.selected, (std::vector<gf::SentenceId>{0, 2, 1, 3}));
}

TEST(Select, InputValidation) {
  const auto [g, stats] = worked_example();
  EXPECT_THROW(gf::select(g, stats, {}, {.budget = 0, .mode = PriorityMode::uniform}), gf::Error);
  try {
    gf::select(g, stats, std::vector<double>{1.0, 1.0}, {.budget = 1, .mode = PriorityMode::combined});
    FAIL();
  } catch (const gf::Error& e) {
    EXPECT_EQ(e.kind(), gf::ErrorKind::missing_quality);
  }
  EXPECT_THROW(gf::select(g, gf::CorpusStats{}, std::vector<double>(5, 1.0),
                          {.budget = 1, .mode = PriorityMode::diversity_only}),
               gf::Error);
  EXPECT_THROW(gf::select(g, stats, std::vector<double>{1, 1, NAN, 1, 1},
                          {.budget = 1, .mode = PriorityMode::quality_only}),
               gf::Error);
}

TEST(Select, MatchesReferenceOnRandomCorpora) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    const auto instances = gf::testing::random_corpus(
        rng, {.sentences = 10 + gf::testing::below(rng, 60), .vocabulary = 5 + gf::testing::below(rng, 30)});
    const auto [g, stats] = gf::build_graph(instances);
    const auto q = gf::testing::random_quality(rng, instances.size());
    const std::size_t budget = 1 + gf::testing::below(rng, instances.size() + 5);
    for (auto mode : kModes) {
      const gf::SelectionConfig cfg{.budget = budget, .mode = mode, .audit = true};
      ASSERT_EQ(gf::select(g, stats, q, cfg), gf::select_reference(g, stats, q, cfg));
    }
  }
}

TEST(Select, DiversityAndUniformNeverPickZeroGainEarly) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 80; ++trial) {
    const auto instances = gf::testing::random_corpus(rng, {.sentences = 40, .vocabulary = 12});
    const auto [g, stats] = gf::build_graph(instances, {.orders = {1, 2}});
    for (auto mode : {PriorityMode::diversity_only, PriorityMode::uniform}) {
      const auto result = gf::select(g, stats, {}, {.budget = instances.size(), .mode = mode});
      std::size_t covered = 0;
      for (const auto& step : result.steps) {
        if (covered < result.initial_ngrams) {
          ASSERT_GT(step.newly_covered, 0u);
        }
        covered += step.newly_covered;
      }
      EXPECT_EQ(covered, result.initial_ngrams);
    }
  }
}

TEST(Select, SelectionIsInvariantToQualityAndWeightScale) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 30; ++trial) {
    const auto instances = gf::testing::random_corpus(rng, {.sentences = 60, .vocabulary = 25});
    const auto [g, stats] = gf::build_graph(instances);
    const auto q = gf::testing::random_quality(rng, instances.size());
    const gf::SelectionConfig cfg{.budget = 60, .mode = PriorityMode::combined};
    const auto base = gf::select(g, stats, q, cfg).selected;
    for (double c : {0.01, 1.0, 100.0}) {
      std::vector<double> scaled = q;
      for (auto& x : scaled) x *= c;
      EXPECT_EQ(gf::select(g, stats, scaled, cfg).selected, base);
    }
    EXPECT_EQ(gf::select(g, stats.with_log_base(2.0), q, cfg).selected, base);
    EXPECT_EQ(gf::select(g, stats.with_log_base(10.0), q, cfg).selected, base);
  }
}

TEST(OracleMinCover, KnownInstances) {
  EXPECT_EQ(gf::oracle_min_cover(worked_example().graph), 2u);

  const auto star = gf::build_graph(
      gf::make_instances({{"a b c d", "r"}, {"a b", "r"}, {"c", "r"}, {"d a", "r"}}), {.orders = {1}});
  EXPECT_EQ(gf::oracle_min_cover(star.graph), 1u);

  for (std::size_t m : {1u, 3u, 6u}) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < m; ++i) pairs.emplace_back("x" + std::to_string(i) + " y" + std::to_string(i), "r");
    EXPECT_EQ(gf::oracle_min_cover(gf::build_graph(gf::make_instances(pairs), {.orders = {1}}).graph), m);
  }

  std::mt19937_64 rng(1);
  const auto big = gf::build_graph(gf::testing::random_corpus(rng, {.sentences = 30}));
  EXPECT_THROW(gf::oracle_min_cover(big.graph, 20), gf::Error);
}

TEST(HarmonicBound, WorkedExampleAndSingleton) {
  const auto example = gf::harmonic_bound_check(worked_example().graph);
  EXPECT_EQ(example.greedy_size, 2u);
  EXPECT_EQ(example.optimum, 2u);
  EXPECT_EQ(example.max_degree, 3u);
  EXPECT_NEAR(example.harmonic, 11.0 / 6.0, 1e-15);
  EXPECT_TRUE(example.holds);

  const auto one = gf::harmonic_bound_check(gf::build_graph(gf::make_instances({{"p q r", "s"}})).graph);
  EXPECT_EQ(one.greedy_size, 1u);
  EXPECT_EQ(one.optimum, 1u);
  EXPECT_TRUE(one.holds);
}

TEST(HarmonicBound, RandomSweep) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const auto instances = gf::testing::random_corpus(
        rng, {.sentences = 1 + gf::testing::below(rng, 12), .vocabulary = 4 + gf::testing::below(rng, 12),
              .max_length = 6});
    const auto bound = gf::harmonic_bound_check(gf::build_graph(instances, {.orders = {1}}).graph);
    EXPECT_TRUE(bound.holds) << bound.greedy_size << " vs " << bound.optimum;
    EXPECT_GE(bound.greedy_size, bound.optimum);
  }
}

TEST(Baselines, Longest) {
  const auto instances = gf::make_instances({{"a b c d e", "r"},
                                             {"a b c d e f g h i", "r"},
                                             {"1 2 3 4 5 6 7 8 9", "r"},
                                             {"x y", "r"}});
  EXPECT_EQ(gf::baseline_longest(instances, 2).selected, (std::vector<gf::SentenceId>{1, 2}));
  EXPECT_EQ(gf::baseline_longest(instances, 9).selected.size(), 4u);
}

TEST(Baselines, QualityTopK) {
  const std::vector<double> scores = {0.1, 0.9, 0.9};
  EXPECT_EQ(gf::baseline_quality_topk(scores, 2).selected, (std::vector<gf::SentenceId>{1, 2}));
}

TEST(Baselines, RandomIsSeededSampleWithoutReplacement) {
  const auto a = gf::baseline_random(100, 30, 42);
  EXPECT_EQ(a, gf::baseline_random(100, 30, 42));
  EXPECT_NE(a.selected, gf::baseline_random(100, 30, 43).selected);
  std::set<gf::SentenceId> unique(a.selected.begin(), a.selected.end());
  EXPECT_EQ(unique.size(), 30u);
  EXPECT_LT(*unique.rbegin(), 100u);
  EXPECT_EQ(gf::baseline_random(5, 10, 1).selected.size(), 5u);
}

TEST(Baselines, AnnotateCoverage) {
  const auto [g, stats] = worked_example();
  gf::SelectionResult r;
  r.selected = {1, 0};
  r.steps = {{1, 0.0, 0}, {0, 0.0, 0}};
  const auto annotated = gf::annotate_coverage(r, g);
  EXPECT_EQ(annotated.steps[0].newly_covered, 2u);
  EXPECT_EQ(annotated.steps[1].newly_covered, 1u);
  EXPECT_EQ(annotated.covered_ngrams, 3u);
  EXPECT_EQ(annotated.initial_ngrams, 5u);
}

TEST(LazyMaxHeap, DiscardsStaleEntries) {
  gf::LazyMaxHeap<double> heap(3);
  heap.push(0, 5.0);
  heap.push(1, 4.0);
  heap.push(2, 1.0);
  heap.push(0, 2.0);  // supersedes 5.0
  auto top = heap.pop();
  ASSERT_TRUE(top);
  EXPECT_EQ(top->first, 1u);
  top = heap.pop();
  EXPECT_EQ(top->first, 0u);
  EXPECT_EQ(top->second, 2.0);
  EXPECT_EQ(heap.discarded(), 1u);
  heap.retire(2);
  EXPECT_FALSE(heap.pop());
}
