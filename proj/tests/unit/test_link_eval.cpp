#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "freedst/error.hpp"
#include "freedst/link_eval.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

using namespace freedst;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Config;
}

struct Case {
  std::vector<double> scores;
  std::vector<bool> labels;
};

// Scores drawn from a small grid so ties are common.
Case random_case(std::mt19937_64& eng, bool need_negative) {
  Case c;
  const std::size_t n = 2 + eng() % 49;
  for (std::size_t i = 0; i < n; ++i) {
    c.scores.push_back(static_cast<double>(eng() % 8) / 8.0);
    c.labels.push_back(eng() % 2 == 0);
  }
  c.labels[0] = true;
  if (need_negative) c.labels[1] = false;
  return c;
}

}  // namespace

TEST(Auc, Examples) {
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.8, 0.3}, {true, true, false}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.4, 0.35, 0.3}, {true, false, true, false}), 0.75);
  EXPECT_EQ(auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, {true, false, true, false}), 0.5);
}

TEST(Auc, DegenerateLabels) {
  EXPECT_EQ(code_of([] { auc(std::vector<double>{0.1, 0.2}, {true, true}); }), Errc::DegenerateLabels);
  EXPECT_EQ(code_of([] { auc(std::vector<double>{}, {}); }), Errc::DegenerateLabels);
}

TEST(Auc, MatchesPairwiseOracle) {
  std::mt19937_64 eng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(eng, true);
    EXPECT_EQ(auc(c.scores, c.labels), oracle::auc(c.scores, c.labels));
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 eng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_case(eng, true);
    std::vector<double> t;
    for (double s : c.scores) t.push_back(std::exp(3.0 * s) - 7.0);
    EXPECT_EQ(auc(t, c.labels), auc(c.scores, c.labels));
  }
}

TEST(Auc, ComplementWithoutTies) {
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_case(eng, true);
    for (std::size_t i = 0; i < c.scores.size(); ++i) c.scores[i] = static_cast<double>(eng() % 1000000) + 1e-7 * i;
    std::vector<bool> flipped;
    for (bool b : c.labels) flipped.push_back(!b);
    EXPECT_NEAR(auc(c.scores, c.labels) + auc(c.scores, flipped), 1.0, 1e-12);
  }
}

TEST(Ap, Examples) {
  EXPECT_NEAR(average_precision(std::vector<double>{0.9, 0.8, 0.7}, {true, false, true}), (1.0 + 2.0 / 3.0) / 2.0,
              1e-15);
  EXPECT_EQ(average_precision(std::vector<double>{0.9, 0.8, 0.1}, {true, true, false}), 1.0);
  EXPECT_EQ(average_precision(std::vector<double>{0.9, 0.8, 0.7, 0.1}, {false, false, false, true}), 0.25);
  EXPECT_EQ(code_of([] { average_precision(std::vector<double>{0.3}, {false}); }), Errc::NoPositives);
}

TEST(Ap, TiesResolvedInInputOrder) {
  EXPECT_EQ(average_precision(std::vector<double>{0.5, 0.5}, {true, false}), 1.0);
  EXPECT_EQ(average_precision(std::vector<double>{0.5, 0.5}, {false, true}), 0.5);
}

TEST(Ap, MatchesRankWalkOracle) {
  std::mt19937_64 eng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(eng, false);
    EXPECT_EQ(average_precision(c.scores, c.labels), oracle::average_precision(c.scores, c.labels));
  }
}

TEST(EvaluateSplit, ZeroModelIsChance) {
  const auto g = testgraph::planted(3, 10, 0.8, 0.05, 1);
  const auto split = split_edges(g, {}, 1);
  const auto s = evaluate_split(VgaeParams::zeros(g.node_count(), 4, 2), g, split);
  EXPECT_EQ(s.auc, 0.5);
}

TEST(EvaluateSplit, DeterministicGivenParams) {
  const auto g = testgraph::planted(3, 10, 0.8, 0.05, 2);
  const auto split = split_edges(g, {}, 2);
  TrainConfig cfg;
  cfg.epochs = 30;
  const auto r = train(g, split, cfg);
  const auto a = evaluate_split(r.params, g, split);
  const auto b = evaluate_split(r.params, g, split);
  EXPECT_EQ(a.auc, b.auc);
  EXPECT_EQ(a.ap, b.ap);
}

class Ranking : public ::testing::Test {
 protected:
  void SetUp() override {
    g_ = testgraph::planted(3, 8, 0.6, 0.1, 3);
    TrainConfig cfg;
    cfg.epochs = 40;
    params_ = train(g_, split_edges(g_, {}, 3), cfg).params;
  }
  StateGraph g_;
  VgaeParams params_;
};

TEST_F(Ranking, SortedNonEdgesOfContextDomains) {
  const std::vector<std::size_t> ctx{0};
  const auto ranked = rank_candidates(params_, g_, ctx, 1000);
  ASSERT_FALSE(ranked.empty());
  std::size_t expected = 0;
  for (std::size_t sv : g_.slot_value_nodes()) expected += g_.has_edge(0, sv) ? 0 : 1;
  EXPECT_EQ(ranked.size(), expected);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(ranked[i].domain, 0u);
    EXPECT_FALSE(g_.has_edge(ranked[i].domain, ranked[i].slot_value));
    EXPECT_GT(ranked[i].score, 0.0);
    EXPECT_LT(ranked[i].score, 1.0);
    if (i > 0) {
      EXPECT_GE(ranked[i - 1].score, ranked[i].score);
      if (ranked[i - 1].score == ranked[i].score) EXPECT_LT(ranked[i - 1].slot_value, ranked[i].slot_value);
    }
  }
}

TEST_F(Ranking, TopKTruncates) {
  const std::vector<std::size_t> ctx{0};
  EXPECT_EQ(rank_candidates(params_, g_, ctx, 3).size(), 3u);
  const auto all = rank_candidates(params_, g_, ctx, 1000);
  const auto top = rank_candidates(params_, g_, ctx, 3);
  EXPECT_TRUE(std::equal(top.begin(), top.end(), all.begin(), [](const ScoredEdge& a, const ScoredEdge& b) {
    return a.domain == b.domain && a.slot_value == b.slot_value && a.score == b.score;
  }));
}

TEST_F(Ranking, SlotValueContextPullsInItsDomains) {
  const auto sv = g_.slot_value_nodes().front();
  const std::vector<std::size_t> ctx{sv};
  for (const auto& c : rank_candidates(params_, g_, ctx, 1000)) EXPECT_TRUE(g_.has_edge(c.domain, sv));
}

TEST_F(Ranking, EmptyContext) {
  EXPECT_EQ(code_of([&] { rank_candidates(params_, g_, {}, 3); }), Errc::EmptyContext);
}

TEST_F(Ranking, OutputFormat) {
  const std::vector<std::size_t> ctx{0};
  const auto top = rank_candidates(params_, g_, ctx, 1).at(0);
  const std::string line = format_candidate(g_, top);
  EXPECT_TRUE(std::regex_match(line, std::regex(R"(Node pair: \(\['d0'\], \['s\d-v\d+'\]\), Probability: 0\.\d{4})")))
      << line;
  const auto j = candidate_json(g_, top, "dlg", 1);
  EXPECT_EQ(j["domain_label"], "d0");
  EXPECT_EQ(j["rank"], 1);
  EXPECT_EQ(j["dialogue_id"], "dlg");
}

TEST(CrossValidate, FoldsAndDeterminism) {
  const auto g = testgraph::planted(3, 10, 0.8, 0.05, 5);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.hidden_dim = 8;
  cfg.latent_dim = 4;
  const auto a = cross_validate(g, 5, cfg);
  const auto b = cross_validate(g, 5, cfg);
  ASSERT_EQ(a.fold_auc.size(), 5u);
  EXPECT_EQ(a.fold_auc, b.fold_auc);
  EXPECT_EQ(a.fold_ap, b.fold_ap);
  for (double x : a.fold_auc) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  double mean = 0;
  for (double x : a.fold_auc) mean += x;
  EXPECT_NEAR(a.mean_auc, mean / 5.0, 1e-12);
  EXPECT_GE(a.std_auc, 0.0);
}

TEST(CrossValidate, TooFewEdges) {
  StateGraph g;
  const auto d = g.add_domain("d");
  for (int v = 0; v < 4; ++v) g.add_edge(d, g.add_slot_value("s", std::to_string(v)));
  EXPECT_EQ(code_of([&] { cross_validate(g, 10, TrainConfig{}); }), Errc::TooFewEdges);
}

TEST(CrossValidate, PlantedGraphTenFolds) {
  const auto g = testgraph::planted(3, 20, 0.8, 0.05, 42);
  const auto r = cross_validate(g, 10, TrainConfig{});
  // Most slot-value nodes here have degree one, so a held-out edge usually leaves its
  // node isolated in training. Fold scores are therefore modest and noisy (about 0.66
  // mean, 0.18 std); the check is only that ranking beats chance on average.
  EXPECT_GT(r.mean_auc, 0.55) << "std " << r.std_auc;
}
