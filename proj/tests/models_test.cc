#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/rational.hpp>
#include <gtest/gtest.h>

#include "fixtures.h"
#include "raum/analysis.h"
#include "raum/error.h"
#include "raum/models.h"

namespace raum {
namespace {

using Rational = boost::rational<long long>;
using testing::TwoOrderMixtureRule;

constexpr Subset kA = Subset::Singleton(0);
constexpr Subset kB = Subset::Singleton(1);
constexpr Subset kC = Subset::Singleton(2);

std::vector<Rational> RandomIntegerTable(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> draw(1, 9);
  std::vector<Rational> eta((std::size_t{1} << n) - 1);
  for (Rational& value : eta) value = draw(rng);
  return eta;
}

std::vector<std::vector<double>> ToDoubleTables(const std::vector<Rational>& eta, std::size_t orders) {
  std::vector<double> table;
  for (const Rational& value : eta) table.push_back(boost::rational_cast<double>(value));
  return std::vector<std::vector<double>>(orders, table);
}

TEST(AttentionIndex, UniformIndexGrandSpanSplitsEvenly) {
  const Universe universe = Universe::Letters(2);
  const AttentionIndex index(universe, {{1, 1, 1}, {1, 1, 1}}, SpanMode::kGrand);
  for (Subset set : {kA, kB, kA | kB}) {
    EXPECT_NEAR(index.Probability(0, kA | kB, set), 1.0 / 3.0, 1e-15);
  }
  EXPECT_NEAR(index.Probability(0, kA, kA), 1.0, 1e-15);
  EXPECT_EQ(index.Probability(0, kA, kB), 0.0);
}

TEST(AttentionIndex, RejectsNonPositiveOrMisshapenTables) {
  const Universe universe = Universe::Letters(2);
  EXPECT_THROW(AttentionIndex(universe, {{1, 0, 1}, {1, 1, 1}}, SpanMode::kGrand), RaumError);
  EXPECT_THROW(AttentionIndex(universe, {{1, 1, 1}}, SpanMode::kGrand), RaumError);
  EXPECT_THROW(AttentionIndex(universe, {{1, 1, 1}, {1, 1, 1}}, SpanMode::kCustom), RaumError);
}

// Exact identities on integer tables: grand span is the logit form and the
// menu span is elimination by aspects.
TEST(AttentionIndex, SpanEndpointsMatchClosedFormsExactly) {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 4; ++n) {
    const Universe universe = Universe::Letters(n);
    for (int trial = 0; trial < 25; ++trial) {
      const std::vector<Rational> eta = RandomIntegerTable(n, rng);
      for (Subset menu : EnumerateSets(universe)) {
        Rational grand_total = 0;
        Rational menu_total = 0;
        for (Subset set : NonemptySubsetsOf(menu)) {
          const Rational grand = SpanAttention<Rational>(eta, n, menu, set, universe.grand());
          const Rational local = SpanAttention<Rational>(eta, n, menu, set, menu);
          EXPECT_EQ(grand, LogitAttention<Rational>(eta, menu, set));
          EXPECT_EQ(local, EliminationByAspects<Rational>(eta, n, menu, set));
          grand_total += grand;
          menu_total += local;
        }
        EXPECT_EQ(grand_total, Rational(1));
        EXPECT_EQ(menu_total, Rational(1));
      }
    }
  }
}

TEST(SpanMonotonicity, StandardMapsPass) {
  const Universe universe = Universe::Letters(4);
  const Subset pair = kA | kB;
  EXPECT_FALSE(FindSpanMonotonicityViolation(universe, [&](Subset) { return universe.grand(); }));
  EXPECT_FALSE(FindSpanMonotonicityViolation(universe, [](Subset menu) { return menu; }));
  EXPECT_FALSE(FindSpanMonotonicityViolation(universe, [&](Subset menu) { return menu.Minus(pair); }));
  EXPECT_FALSE(FindSpanMonotonicityViolation(universe, [&](Subset) { return universe.grand().Minus(pair); }));
}

TEST(SpanMonotonicity, ReportsFirstFailingCoverPair) {
  const Universe universe = Universe::Letters(2);
  const auto span = [](Subset menu) {
    if (menu == kA) return kA | kB;
    if (menu == kB) return kB;
    return kA;
  };
  const auto found = FindSpanMonotonicityViolation(universe, span);
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(found->first, kA);
  EXPECT_EQ(found->second, kA | kB);
}

// Monotone spans yield rules satisfying every constraint.
TEST(SpanMonotonicity, MonotoneSpansGiveValidRules) {
  std::mt19937_64 rng(5);
  const Universe universe = Universe::Letters(4);
  const Subset pair = kA | kB;
  std::vector<Subset> minus_pair;
  std::vector<Subset> fixed;
  for (Subset menu : EnumerateSets(universe)) {
    minus_pair.push_back(menu.Minus(pair));
    fixed.push_back(universe.grand().Minus(pair));
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto eta = ToDoubleTables(RandomIntegerTable(4, rng), universe.num_orders());
    const OrderDistribution marginal = RandomMarginal(4, rng);
    const AttentionIndex indices[] = {
        {universe, eta, SpanMode::kGrand},
        {universe, eta, SpanMode::kMenu},
        {universe, eta, SpanMode::kCustom, minus_pair},
        {universe, eta, SpanMode::kCustom, fixed},
    };
    for (const AttentionIndex& index : indices) {
      const RaumRule rule = GenerateAttentionIndexRule(index, marginal);
      EXPECT_TRUE(ValidateRule(rule, InducedDataset(rule)).empty());
    }
  }
}

TEST(RationalInattention, ThresholdsAtReferencePrior) {
  const auto t = RiParams::Thresholds({0.5, 0.3, 0.2});
  EXPECT_NEAR(t[0], 2.0, 1e-12);
  EXPECT_NEAR(t[1], 1.5, 1e-12);
  EXPECT_NEAR(t[2], 0.5, 1e-12);
  EXPECT_NEAR(t[3], 2.0 / 3.0, 1e-12);
}

TEST(RationalInattention, ChoiceProbabilitiesAndRegularityGap) {
  const RiParams params({0.5, 0.3, 0.2}, 3.0);
  const ChoiceDataset data = GenerateRationalInattention(params);
  const Subset abc = kA | kB | kC;
  const Subset ab = kA | kB;
  // (mu_D(a) (|D| + delta) - 1) / delta.
  const double abc_a = (0.5 * 6.0 - 1.0) / 3.0;
  const double ab_a = (0.625 * 5.0 - 1.0) / 3.0;
  EXPECT_NEAR(data.probs(*data.MenuIndex(abc))[0], abc_a, 1e-15);
  EXPECT_NEAR(data.probs(*data.MenuIndex(ab))[0], ab_a, 1e-15);
  EXPECT_NEAR(abc_a, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(ab_a - abc_a, 1.0 / 24.0, 1e-15);
}

TEST(RationalInattention, LowCostAttendsToTopPriorOnly) {
  const RiParams params({0.5, 0.3, 0.2}, 0.4);
  EXPECT_EQ(params.ConsiderationSet(kA | kB | kC), kA);
  EXPECT_EQ(params.ConsiderationSet(kA | kB), kA);
  EXPECT_EQ(params.ConsiderationSet(kA | kC), kA);
  EXPECT_EQ(params.ConsiderationSet(kB | kC), kB);
  EXPECT_EQ(params.ConsiderationSet(kC), kC);
}

TEST(RationalInattention, StableMarginalReproducesData) {
  const RiParams params({0.5, 0.3, 0.2}, 3.0);
  const OrderDistribution pi = RiStableMarginal(params);
  const double expected[] = {0.4, 0.26666666666666666, 0.19047619047619047,
                             0.076190476190476192, 0.041666666666666664, 0.025};
  double total = 0.0;
  for (int r = 0; r < 6; ++r) {
    EXPECT_NEAR(pi[r], expected[r], 1e-5) << r;
    total += pi[r];
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  // Orders ranking a first carry rho_X(a).
  EXPECT_NEAR(pi[0] + pi[1], 2.0 / 3.0, 1e-14);

  const Universe universe = Universe::Letters(3);
  const ChoiceDataset data = GenerateRationalInattention(params);
  const RaumRule rum = GenerateRum(universe, pi);
  for (std::size_t k = 0; k < data.menus().size(); ++k) {
    for (int y : data.menus()[k].members()) {
      EXPECT_NEAR(ChoiceProb(rum, data.menus()[k], y), data.probs(k)[y], 1e-14);
    }
  }
  EXPECT_TRUE(Analyzer(data).Test().admits);
}

TEST(RationalInattention, StableMarginalNearFirstThreshold) {
  const double d1 = 2.0;
  const RiParams params({0.5, 0.3, 0.2}, d1 + 1e-9);
  const OrderDistribution pi = RiStableMarginal(params);
  // Orders ranking c first vanish at the threshold.
  EXPECT_LT(pi[4], 1e-9);
  EXPECT_LT(pi[5], 1e-9);
  for (double p : pi) EXPECT_GE(p, 0.0);
  EXPECT_THROW(RiStableMarginal(RiParams({0.5, 0.3, 0.2}, 1.9)), RaumError);
}

TEST(RationalInattention, RejectsBadParameters) {
  EXPECT_THROW(RiParams({0.3, 0.5, 0.2}, 3.0), RaumError);
  EXPECT_THROW(RiParams({0.5, 0.3, 0.3}, 3.0), RaumError);
  EXPECT_THROW(RiParams({0.5, 0.3, 0.2}, 0.0), RaumError);
  EXPECT_THROW(RiParams({0.5, 0.3, 0.2}, 2.0), RaumError);
  EXPECT_THROW(RiParams({0.5, 0.3, 0.2}, 1.5), RaumError);
  EXPECT_NO_THROW(RiParams({0.5, 0.3, 0.2}, 2.0 + 1e-6));
}

TEST(RationalInattention, GridIsRegularAndAdmitted) {
  const std::array<double, 3> priors[] = {{0.5, 0.3, 0.2}, {0.4, 0.35, 0.25}, {0.6, 0.25, 0.15},
                                          {0.7, 0.2, 0.1}, {0.34, 0.33, 0.33}};
  for (const auto& mu : priors) {
    for (double delta : {0.1, 0.45, 0.9, 1.7, 2.6, 5.0, 12.0}) {
      const RiParams params(mu, delta);
      const ChoiceDataset data = GenerateRationalInattention(params);
      EXPECT_TRUE(IrregularTriples(data).empty()) << mu[0] << " " << delta;
      EXPECT_TRUE(Analyzer(data).Test().admits) << mu[0] << " " << delta;
    }
  }
}

TEST(Rum, LogitMarginalGivesMultinomialLogitShares) {
  const std::vector<double> utilities = {0.3, -1.0, 0.8, 0.1};
  const Universe universe = Universe::Letters(4);
  const RaumRule rule = GenerateRum(universe, LogitMarginal(utilities));
  for (Subset menu : EnumerateSets(universe)) {
    double denominator = 0.0;
    for (int y : menu.members()) denominator += std::exp(utilities[y]);
    for (int y : menu.members()) {
      EXPECT_NEAR(ChoiceProb(rule, menu, y), std::exp(utilities[y]) / denominator, 1e-14);
    }
  }
}

TEST(Rum, DegenerateMarginalChoosesBest) {
  const Universe universe = Universe::Letters(3);
  const PreferenceOrder order = PreferenceOrder::Parse("b>c>a", universe);
  const RaumRule rule = GenerateRum(universe, DegenerateMarginal(3, order.rank()));
  for (Subset menu : EnumerateSets(universe)) {
    EXPECT_EQ(ChoiceProb(rule, menu, Best(order, menu)), 1.0);
  }
  EXPECT_THROW(DegenerateMarginal(3, 6), RaumError);
}

TEST(Mixture, ReproducesTwoOrderRule) {
  const Universe universe = Universe::Letters(2);
  AttentionRule prefers_a(2);
  prefers_a.at(kA, kA) = 1.0;
  prefers_a.at(kB, kB) = 1.0;
  prefers_a.at(kA | kB, kA) = 2.0 / 3.0;
  prefers_a.at(kA | kB, kB) = 1.0 / 3.0;
  AttentionRule prefers_b = prefers_a;
  prefers_b.at(kA | kB, kA) = 1.0 / 3.0;
  prefers_b.at(kA | kB, kB) = 2.0 / 3.0;
  const RaumRule rule = GenerateMixture(universe, {0.5, 0.5}, {prefers_a, prefers_b});
  const RaumRule expected = TwoOrderMixtureRule();
  for (std::size_t k = 0; k < rule.values().size(); ++k) {
    EXPECT_NEAR(rule.values()[k], expected.values()[k], 1e-15);
  }
}

TEST(Mixture, RejectsInvalidAttention) {
  const Universe universe = Universe::Letters(2);
  AttentionRule empty(2);
  EXPECT_TRUE(empty.FindViolation().has_value());
  EXPECT_THROW(GenerateMixture(universe, {0.5, 0.5}, {empty}), RaumError);

  AttentionRule shrinking = AttentionRule::FullAttention(2);
  // {a} is considered at {a,b} no more often than at {a}.
  shrinking.at(kA, kA) = 1.0;
  shrinking.at(kA | kB, kA) = 0.5;
  shrinking.at(kA | kB, kA | kB) = 0.5;
  EXPECT_FALSE(shrinking.FindViolation().has_value());
  AttentionRule overfull = AttentionRule::FullAttention(2);
  overfull.at(kA | kB, kA) = 0.5;
  EXPECT_TRUE(overfull.FindViolation().has_value());
  EXPECT_THROW(GenerateMixture(universe, {0.5, 0.5}, {overfull, overfull, overfull}), RaumError);
}

TEST(Mixture, RandomMonotoneAttentionIsValid) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 4; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      const AttentionRule lambda = RandomMonotoneAttention(n, rng);
      const auto violation = lambda.FindViolation();
      EXPECT_FALSE(violation.has_value()) << *violation;
    }
  }
}

TEST(Satisficing, ExtremeThresholds) {
  const Universe universe = Universe::Letters(3);
  SatisficingParams params{.sampler = UniformSearchSampler(), .draws = 2000};
  params.threshold = -std::numeric_limits<double>::infinity();
  const RaumRule first_only = GenerateSatisficingRule(universe, params);
  params.threshold = std::numeric_limits<double>::infinity();
  const RaumRule everything = GenerateSatisficingRule(universe, params);
  for (Subset menu : EnumerateSets(universe)) {
    double singletons = 0.0;
    double whole = 0.0;
    for (std::uint64_t r = 0; r < universe.num_orders(); ++r) {
      for (int y : menu.members()) singletons += first_only.at(menu, r, Subset::Singleton(y));
      whole += everything.at(menu, r, menu);
    }
    EXPECT_NEAR(singletons, 1.0, 1e-12);
    EXPECT_NEAR(whole, 1.0, 1e-12);
  }
}

// Two alternatives, uniform search and utilities, threshold 1/2. For the
// order a>b: {a} needs a searched first with u_a >= 1/2 (1/2 * 3/8), {b}
// needs b searched first with u_b >= 1/2 (1/2 * 1/8), and {a,b} is the rest.
TEST(Satisficing, MatchesAnalyticRuleAndValidates) {
  const Universe universe = Universe::Letters(2);
  SatisficingParams params{.sampler = UniformSearchSampler(), .threshold = 0.5, .draws = 1000000};
  const RaumRule rule = GenerateSatisficingRule(universe, params);
  const double tolerance = 5.0 / std::sqrt(static_cast<double>(params.draws));
  const Subset ab = kA | kB;
  EXPECT_NEAR(rule.at(ab, 0, kA), 3.0 / 16.0, tolerance);
  EXPECT_NEAR(rule.at(ab, 0, kB), 1.0 / 16.0, tolerance);
  EXPECT_NEAR(rule.at(ab, 0, ab), 1.0 / 4.0, tolerance);
  EXPECT_NEAR(rule.at(ab, 1, kB), 3.0 / 16.0, tolerance);
  EXPECT_NEAR(rule.at(ab, 1, kA), 1.0 / 16.0, tolerance);
  // Common draws make every constraint hold up to rounding.
  EXPECT_TRUE(ValidateRule(rule, InducedDataset(rule)).empty());
}

TEST(Satisficing, RandomThresholdValidatesAtFourAlternatives) {
  const Universe universe = Universe::Letters(4);
  SatisficingParams params{.sampler = UniformSearchSampler(), .draws = 20000, .seed = 9};
  params.random_threshold = [](std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.2, 0.9)(rng);
  };
  const RaumRule rule = GenerateSatisficingRule(universe, params);
  EXPECT_TRUE(ValidateRule(rule, InducedDataset(rule)).empty());
}

TEST(Salience, EverythingNoticedCountsSetSize) {
  const Universe universe = Universe::Letters(3);
  const SalienceSampler sampler = [](std::mt19937_64& rng, std::span<double> xi, std::span<double> u) {
    std::normal_distribution<double> normal;
    for (double& v : xi) v = normal(rng);
    for (double& v : u) v = normal(rng);
  };
  const double low = -std::numeric_limits<double>::infinity();
  const SalienceEstimate estimate = EstimateSalienceIndex(universe, sampler, low, 6000, 1);
  for (std::uint64_t r = 0; r < universe.num_orders(); ++r) {
    EXPECT_GT(estimate.marginal[r], 0.0);
    for (Subset set : EnumerateSets(universe)) {
      EXPECT_NEAR(estimate.eta[r][set.index()], estimate.marginal[r] * set.size(), 1e-12);
    }
  }
  try {
    EstimateSalienceIndex(universe, sampler, 1e9, 100, 1);
    FAIL() << "zero index accepted";
  } catch (const RaumError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

}  // namespace
}  // namespace raum
