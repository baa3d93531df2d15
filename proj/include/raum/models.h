// Generators of rules and datasets from parametric consideration models.

#ifndef RAUM_MODELS_H_
#define RAUM_MODELS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "raum/core.h"

namespace raum {

// Distribution over orders, indexed by rank.
using OrderDistribution = std::vector<double>;

// Plackett-Luce shares: P(y1 > y2 > ... > yn) = prod_k w(y_k) / sum_{j>=k} w(y_j)
// with w = exp(utility).
OrderDistribution LogitMarginal(std::span<const double> utilities);
OrderDistribution DegenerateMarginal(int n, std::uint64_t rank);
// Normalized i.i.d. exponentials over the n! orders.
OrderDistribution RandomMarginal(int n, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Attention-index family.

enum class SpanMode { kGrand, kMenu, kCustom };

// Consideration probability of D at menu A:
//   sum_{B inside X - S} eta(D + B) / sum_{C nonempty inside A} sum_{B inside X - S} eta(C + B)
// where S is the span of A. `eta` is indexed by set index.
template <typename Scalar>
Scalar SpanAttention(std::span<const Scalar> eta, int n, Subset menu, Subset set, Subset span) {
  const Subset free = Subset::Full(n).Minus(span);
  auto total_over_free = [&](Subset core) {
    Scalar sum(0);
    // Enumerates every subset B of `free`, the empty set included.
    std::uint32_t b = 0;
    while (true) {
      const Subset joined = core | Subset(b);
      if (!joined.empty()) sum += eta[joined.index()];
      if (b == free.bits()) break;
      b = (b - free.bits()) & free.bits();
    }
    return sum;
  };
  Scalar denominator(0);
  for (Subset c : NonemptySubsetsOf(menu)) denominator += total_over_free(c);
  return total_over_free(set) / denominator;
}

// eta(D) / sum_{C nonempty inside A} eta(C).
template <typename Scalar>
Scalar LogitAttention(std::span<const Scalar> eta, Subset menu, Subset set) {
  Scalar denominator(0);
  for (Subset c : NonemptySubsetsOf(menu)) denominator += eta[c.index()];
  return eta[set.index()] / denominator;
}

// sum_{C : C & A = D} eta(C) / sum_{K : K & A nonempty} eta(K).
template <typename Scalar>
Scalar EliminationByAspects(std::span<const Scalar> eta, int n, Subset menu, Subset set) {
  Scalar numerator(0);
  Scalar denominator(0);
  for (Subset c : NonemptySubsetsOf(Subset::Full(n))) {
    const Subset meet = c & menu;
    if (meet.empty()) continue;
    denominator += eta[c.index()];
    if (meet == set) numerator += eta[c.index()];
  }
  return numerator / denominator;
}

class AttentionIndex {
 public:
  // eta[rank][set index] > 0 for every order and nonempty set. `custom`
  // holds the span of each menu by menu index when mode is kCustom.
  AttentionIndex(Universe universe, std::vector<std::vector<double>> eta, SpanMode mode,
                 std::vector<Subset> custom = {});

  const Universe& universe() const { return universe_; }
  Subset Span(Subset menu) const;
  std::span<const double> eta(std::uint64_t order_rank) const { return eta_[order_rank]; }
  double Probability(std::uint64_t order_rank, Subset menu, Subset set) const;

 private:
  Universe universe_;
  std::vector<std::vector<double>> eta_;
  SpanMode mode_;
  std::vector<Subset> custom_;
};

// Rule pi_A(o, D) = P(D | o, A) * marginal(o) for D inside A.
RaumRule GenerateAttentionIndexRule(const AttentionIndex& index, const OrderDistribution& marginal);

// First cover pair (A, A + {x}) violating span(A) inside span(A + x) and
// span(A + x) - span(A) inside {x}; nullopt when the map passes.
std::optional<std::pair<Subset, Subset>> FindSpanMonotonicityViolation(
    const Universe& universe, const std::function<Subset(Subset)>& span);

// Draws (salience xi, utility u) for every alternative.
using SalienceSampler =
    std::function<void(std::mt19937_64&, std::span<double> xi, std::span<double> u)>;

struct SalienceEstimate {
  // eta[rank][set index] = E[1{u ranks as order} * |{y in D : u_y + xi_y >= kappa}|].
  std::vector<std::vector<double>> eta;
  OrderDistribution marginal;
};

// Monte Carlo estimate. Throws RaumError(kInvalidArgument) when some eta is
// not strictly positive.
SalienceEstimate EstimateSalienceIndex(const Universe& universe, const SalienceSampler& sampler,
                                       double kappa, std::size_t draws, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Search and satisficing.

// Draws (search index s, utility u) for every alternative.
using SearchSampler = std::function<void(std::mt19937_64&, std::span<double> s, std::span<double> u)>;

struct SatisficingParams {
  SearchSampler sampler;
  // Common threshold; +-infinity allowed. Ignored when random_threshold is set.
  double threshold = 0.0;
  // Menu-independent threshold redrawn for each decision maker.
  std::function<double(std::mt19937_64&)> random_threshold;
  std::size_t draws = 100000;
  std::uint64_t seed = 42;
};

// Independent uniform (0, 1) search indices and utilities.
SearchSampler UniformSearchSampler();

// Empirical rule: in each draw the order ranks alternatives by decreasing
// utility and, at every menu, the consideration set holds the items searched
// up to and including the first whose utility reaches the threshold (the
// whole menu when none does). Search is by decreasing s. Ties go to the lower
// index. The same draws serve every menu.
RaumRule GenerateSatisficingRule(const Universe& universe, const SatisficingParams& params);

// ---------------------------------------------------------------------------
// Rational inattention over three alternatives.

class RiParams {
 public:
  // Requires mu(a) >= mu(b) >= mu(c) > 0 summing to one and delta > 0 away
  // from every threshold by a relative 1e-12.
  RiParams(std::array<double, 3> mu, double delta);

  const std::array<double, 3>& mu() const { return mu_; }
  double delta() const { return delta_; }
  // delta*_1 .. delta*_4 at indices 0..3.
  const std::array<double, 4>& thresholds() const { return thresholds_; }

  static std::array<double, 4> Thresholds(const std::array<double, 3>& mu);

  // Deterministic consideration set at `menu`.
  Subset ConsiderationSet(Subset menu) const;
  // (mu_D(y) (|D| + delta) - 1) / delta.
  double ChoiceWithin(Subset considered, int alternative) const;

 private:
  std::array<double, 3> mu_;
  double delta_;
  std::array<double, 4> thresholds_;
};

// Dataset on all seven menus of {a, b, c}.
ChoiceDataset GenerateRationalInattention(const RiParams& params);

// Order distribution whose full-attention rule reproduces the dataset.
// Requires delta > delta*_1.
OrderDistribution RiStableMarginal(const RiParams& params);

// ---------------------------------------------------------------------------
// Mixtures of single-preference attention rules.

// lambda_A(D) for every menu A and set D.
class AttentionRule {
 public:
  explicit AttentionRule(int n);
  static AttentionRule FullAttention(int n);

  int n() const { return n_; }
  double at(Subset menu, Subset set) const { return values_[Index(menu, set)]; }
  double& at(Subset menu, Subset set) { return values_[Index(menu, set)]; }

  // Empty when lambda is a distribution on nonempty subsets of each menu
  // and lambda_A(D) >= lambda_B(D) on cover pairs with D inside A;
  // otherwise a description of the first violated constraint.
  std::optional<std::string> FindViolation(double tolerance = kRuleTolerance) const;

 private:
  std::size_t Index(Subset menu, Subset set) const {
    return menu.index() * ((std::size_t{1} << n_) - 1) + set.index();
  }
  int n_;
  std::vector<double> values_;
};

// Bottom-up construction: singletons attend to themselves; at a menu B each
// proper subset D gets a uniform fraction of the smallest lambda_A(D) over
// cover subsets A containing D, scaled jointly to keep the total at most one,
// and B itself takes the remainder.
AttentionRule RandomMonotoneAttention(int n, std::mt19937_64& rng);

// pi_A(o, D) = lambda_o,A(D) * marginal(o). `attention` holds either one
// rule per order rank or a single rule shared by every order. Throws RaumError(kInvalidArgument)
// naming the violated constraint when some lambda is not a valid
// monotone attention rule.
RaumRule GenerateMixture(const Universe& universe, const OrderDistribution& marginal,
                         const std::vector<AttentionRule>& attention);

RaumRule GenerateRum(const Universe& universe, const OrderDistribution& marginal);

}  // namespace raum

#endif  // RAUM_MODELS_H_
