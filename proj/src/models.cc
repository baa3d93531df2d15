#include "raum/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "raum/error.h"

namespace raum {
namespace {

// Ranking by decreasing value; ties go to the lower index.
std::vector<int> RankByDecreasing(std::span<const double> values) {
  std::vector<int> ranking(values.size());
  std::iota(ranking.begin(), ranking.end(), 0);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](int x, int y) { return values[x] > values[y]; });
  return ranking;
}

void CheckMarginal(const Universe& universe, const OrderDistribution& marginal) {
  if (marginal.size() != universe.num_orders()) {
    throw RaumError(ErrorCode::kInvalidArgument, "order distribution has the wrong length");
  }
  double total = 0.0;
  for (double p : marginal) {
    if (!(p >= 0.0)) throw RaumError(ErrorCode::kInvalidArgument, "negative order probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kDatasetTolerance) {
    throw RaumError(ErrorCode::kInvalidArgument, "order probabilities do not sum to one");
  }
}

std::uint64_t RankOf(std::span<const int> ranking) {
  return PreferenceOrder::FromRanking(ranking).rank();
}

}  // namespace

OrderDistribution LogitMarginal(std::span<const double> utilities) {
  const int n = static_cast<int>(utilities.size());
  const Universe universe = Universe::Letters(n);
  const double shift = *std::max_element(utilities.begin(), utilities.end());
  std::vector<double> weight(n);
  for (int i = 0; i < n; ++i) weight[i] = std::exp(utilities[i] - shift);
  OrderDistribution out(universe.num_orders());
  for (const PreferenceOrder& order : EnumerateOrders(universe)) {
    double remaining = std::accumulate(weight.begin(), weight.end(), 0.0);
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      const double w = weight[order.at(k)];
      p *= w / remaining;
      remaining -= w;
    }
    out[order.rank()] = p;
  }
  return out;
}

OrderDistribution DegenerateMarginal(int n, std::uint64_t rank) {
  OrderDistribution out(Factorial(n), 0.0);
  if (rank >= out.size()) throw RaumError(ErrorCode::kInvalidArgument, "order rank out of range");
  out[rank] = 1.0;
  return out;
}

OrderDistribution RandomMarginal(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> draw(1.0);
  OrderDistribution out(Factorial(n));
  for (double& p : out) p = draw(rng);
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& p : out) p /= total;
  return out;
}

AttentionIndex::AttentionIndex(Universe universe, std::vector<std::vector<double>> eta,
                               SpanMode mode, std::vector<Subset> custom)
    : universe_(std::move(universe)), eta_(std::move(eta)), mode_(mode), custom_(std::move(custom)) {
  if (eta_.size() != universe_.num_orders()) {
    throw RaumError(ErrorCode::kInvalidArgument, "attention index needs one table per order");
  }
  for (const auto& table : eta_) {
    if (table.size() != universe_.num_sets()) {
      throw RaumError(ErrorCode::kInvalidArgument, "attention index table has the wrong length");
    }
    for (double value : table) {
      if (!(value > 0.0)) {
        throw RaumError(ErrorCode::kInvalidArgument, "attention index must be strictly positive");
      }
    }
  }
  if (mode_ == SpanMode::kCustom) {
    if (custom_.size() != universe_.num_sets()) {
      throw RaumError(ErrorCode::kInvalidArgument, "custom span needs one set per menu");
    }
    for (Subset span : custom_) {
      if (!span.IsSubsetOf(universe_.grand())) {
        throw RaumError(ErrorCode::kInvalidArgument, "custom span outside the universe");
      }
    }
  }
}

Subset AttentionIndex::Span(Subset menu) const {
  switch (mode_) {
    case SpanMode::kGrand:
      return universe_.grand();
    case SpanMode::kMenu:
      return menu;
    case SpanMode::kCustom:
      return custom_[menu.index()];
  }
  return menu;
}

double AttentionIndex::Probability(std::uint64_t order_rank, Subset menu, Subset set) const {
  if (set.empty() || !set.IsSubsetOf(menu)) return 0.0;
  return SpanAttention<double>(eta(order_rank), universe_.size(), menu, set, Span(menu));
}

RaumRule GenerateAttentionIndexRule(const AttentionIndex& index, const OrderDistribution& marginal) {
  const Universe& universe = index.universe();
  CheckMarginal(universe, marginal);
  RaumRule rule(universe);
  for (Subset menu : EnumerateSets(universe)) {
    for (std::uint64_t r = 0; r < marginal.size(); ++r) {
      if (marginal[r] == 0.0) continue;
      for (Subset d : NonemptySubsetsOf(menu)) {
        rule.at(menu, r, d) = index.Probability(r, menu, d) * marginal[r];
      }
    }
  }
  return rule;
}

std::optional<std::pair<Subset, Subset>> FindSpanMonotonicityViolation(
    const Universe& universe, const std::function<Subset(Subset)>& span) {
  for (Subset menu : EnumerateSets(universe)) {
    const Subset small = span(menu);
    for (int x = 0; x < universe.size(); ++x) {
      if (menu.contains(x)) continue;
      const Subset larger = menu | Subset::Singleton(x);
      const Subset big = span(larger);
      if (!small.IsSubsetOf(big) || !big.Minus(small).IsSubsetOf(Subset::Singleton(x))) {
        return std::make_pair(menu, larger);
      }
    }
  }
  return std::nullopt;
}

SalienceEstimate EstimateSalienceIndex(const Universe& universe, const SalienceSampler& sampler,
                                       double kappa, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw RaumError(ErrorCode::kInvalidArgument, "draws must be positive");
  const int n = universe.size();
  const std::vector<Subset> sets = EnumerateSets(universe);
  SalienceEstimate out;
  out.eta.assign(universe.num_orders(), std::vector<double>(sets.size(), 0.0));
  out.marginal.assign(universe.num_orders(), 0.0);
  std::mt19937_64 rng(seed);
  std::vector<double> xi(n);
  std::vector<double> u(n);
  const double weight = 1.0 / static_cast<double>(draws);
  for (std::size_t draw = 0; draw < draws; ++draw) {
    sampler(rng, xi, u);
    const std::uint64_t rank = RankOf(RankByDecreasing(u));
    std::uint32_t noticed = 0;
    for (int y = 0; y < n; ++y) {
      if (u[y] + xi[y] >= kappa) noticed |= std::uint32_t{1} << y;
    }
    out.marginal[rank] += weight;
    std::vector<double>& table = out.eta[rank];
    for (Subset d : sets) table[d.index()] += weight * (d & Subset(noticed)).size();
  }
  for (const auto& table : out.eta) {
    for (std::size_t k = 0; k < table.size(); ++k) {
      if (!(table[k] > 0.0)) {
        throw RaumError(ErrorCode::kInvalidArgument,
                        "estimated attention index is not strictly positive at " +
                            universe.Format(Subset(static_cast<std::uint32_t>(k + 1))));
      }
    }
  }
  return out;
}

SearchSampler UniformSearchSampler() {
  return [](std::mt19937_64& rng, std::span<double> s, std::span<double> u) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (double& value : s) value = uniform(rng);
    for (double& value : u) value = uniform(rng);
  };
}

RaumRule GenerateSatisficingRule(const Universe& universe, const SatisficingParams& params) {
  if (!params.sampler) throw RaumError(ErrorCode::kInvalidArgument, "missing search sampler");
  if (params.draws == 0) throw RaumError(ErrorCode::kInvalidArgument, "draws must be positive");
  const int n = universe.size();
  const std::vector<Subset> menus = EnumerateSets(universe);
  RaumRule rule(universe);
  std::mt19937_64 rng(params.seed);
  std::vector<double> s(n);
  std::vector<double> u(n);
  const double weight = 1.0 / static_cast<double>(params.draws);
  for (std::size_t draw = 0; draw < params.draws; ++draw) {
    params.sampler(rng, s, u);
    const double threshold = params.random_threshold ? params.random_threshold(rng) : params.threshold;
    const std::uint64_t rank = RankOf(RankByDecreasing(u));
    const std::vector<int> search = RankByDecreasing(s);
    for (Subset menu : menus) {
      std::uint32_t considered = 0;
      for (int y : search) {
        if (!menu.contains(y)) continue;
        considered |= std::uint32_t{1} << y;
        if (u[y] >= threshold) break;
      }
      rule.at(menu, rank, Subset(considered)) += weight;
    }
  }
  return rule;
}

std::array<double, 4> RiParams::Thresholds(const std::array<double, 3>& mu) {
  return {-3.0 + 1.0 / mu[2], -1.0 + mu[0] / mu[2], -1.0 + mu[1] / mu[2], -1.0 + mu[0] / mu[1]};
}

RiParams::RiParams(std::array<double, 3> mu, double delta) : mu_(mu), delta_(delta) {
  if (!(mu_[2] > 0.0) || mu_[1] < mu_[2] || mu_[0] < mu_[1]) {
    throw RaumError(ErrorCode::kInvalidArgument, "prior must satisfy mu(a) >= mu(b) >= mu(c) > 0");
  }
  if (std::abs(mu_[0] + mu_[1] + mu_[2] - 1.0) > kDatasetTolerance) {
    throw RaumError(ErrorCode::kInvalidArgument, "prior must sum to one");
  }
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) {
    throw RaumError(ErrorCode::kInvalidArgument, "delta must be positive and finite");
  }
  thresholds_ = Thresholds(mu_);
  for (std::size_t k = 0; k < thresholds_.size(); ++k) {
    const double t = thresholds_[k];
    if (std::abs(delta_ - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
      std::ostringstream message;
      message << "delta " << delta_ << " lies on threshold " << k + 1 << " (" << t << ")";
      throw RaumError(ErrorCode::kInvalidArgument, message.str());
    }
  }
}

Subset RiParams::ConsiderationSet(Subset menu) const {
  constexpr Subset a = Subset::Singleton(0);
  constexpr Subset b = Subset::Singleton(1);
  constexpr Subset c = Subset::Singleton(2);
  const auto& t = thresholds_;
  if (menu == (a | b | c)) {
    if (delta_ > t[0]) return menu;
    return delta_ > t[3] ? (a | b) : a;
  }
  if (menu == (a | b)) return delta_ > t[3] ? menu : a;
  if (menu == (b | c)) return delta_ > t[2] ? menu : b;
  if (menu == (a | c)) return delta_ > t[1] ? menu : a;
  if (menu.size() == 1 && menu.IsSubsetOf(a | b | c)) return menu;
  throw RaumError(ErrorCode::kInvalidArgument, "menu outside {a, b, c}");
}

double RiParams::ChoiceWithin(Subset considered, int alternative) const {
  if (!considered.contains(alternative)) return 0.0;
  double mass = 0.0;
  for (int y : considered.members()) mass += mu_[y];
  const double share = mu_[alternative] / mass;
  return (share * (considered.size() + delta_) - 1.0) / delta_;
}

ChoiceDataset GenerateRationalInattention(const RiParams& params) {
  const Universe universe = Universe::Letters(3);
  std::vector<Subset> menus = EnumerateSets(universe);
  std::vector<std::vector<double>> probs;
  for (Subset menu : menus) {
    const Subset considered = params.ConsiderationSet(menu);
    std::vector<double> row(3, 0.0);
    for (int y : considered.members()) row[y] = params.ChoiceWithin(considered, y);
    probs.push_back(std::move(row));
  }
  return ChoiceDataset(universe, std::move(menus), std::move(probs));
}

OrderDistribution RiStableMarginal(const RiParams& params) {
  const auto& mu = params.mu();
  const double delta = params.delta();
  const double d1 = params.thresholds()[0];
  if (!(delta > d1)) {
    throw RaumError(ErrorCode::kInvalidArgument, "stable marginal requires full attention at X");
  }
  const double ma = mu[0];
  const double mb = mu[1];
  const double mc = mu[2];
  const double k_ac = 1.0 / mc - 1.0 / ma;
  const double k_bc = 1.0 / mc - 1.0 / mb;
  struct Entry {
    std::array<int, 3> ranking;
    double value;
  };
  const Entry entries[] = {
      {{0, 1, 2}, (delta - d1 + k_ac) / (mb + mc) * ma * mb / delta},
      {{0, 2, 1}, (delta - d1 + k_ac) / (mb + mc) * ma * mc / delta},
      {{1, 0, 2}, (delta - d1 + k_bc) / (ma + mc) * ma * mb / delta},
      {{1, 2, 0}, (delta - d1 + k_bc) / (ma + mc) * mb * mc / delta},
      {{2, 0, 1}, (delta - d1) / (ma + mb) * ma * mc / delta},
      {{2, 1, 0}, (delta - d1) / (ma + mb) * mb * mc / delta},
  };
  OrderDistribution out(6, 0.0);
  for (const Entry& entry : entries) out[RankOf(entry.ranking)] = entry.value;
  return out;
}

AttentionRule::AttentionRule(int n) : n_(n) {
  if (n < kMinAlternatives || n > kMaxAlternatives) {
    throw RaumError(ErrorCode::kInvalidArgument, "unsupported number of alternatives");
  }
  const std::size_t sets = (std::size_t{1} << n) - 1;
  values_.assign(sets * sets, 0.0);
}

AttentionRule AttentionRule::FullAttention(int n) {
  AttentionRule rule(n);
  for (std::uint32_t bits = 1; bits < (std::uint32_t{1} << n); ++bits) {
    rule.at(Subset(bits), Subset(bits)) = 1.0;
  }
  return rule;
}

std::optional<std::string> AttentionRule::FindViolation(double tolerance) const {
  const Universe universe = Universe::Letters(n_);
  const std::vector<Subset> sets = EnumerateSets(universe);
  for (Subset menu : sets) {
    double total = 0.0;
    for (Subset d : sets) {
      const double value = at(menu, d);
      if (value < -tolerance) {
        return "negative attention at " + universe.Format(menu) + " on " + universe.Format(d);
      }
      if (!d.IsSubsetOf(menu)) {
        if (std::abs(value) > tolerance) {
          return "attention at " + universe.Format(menu) + " on " + universe.Format(d) +
                 " outside the menu";
        }
        continue;
      }
      total += value;
    }
    if (std::abs(total - 1.0) > tolerance) {
      return "attention at " + universe.Format(menu) + " sums to " + std::to_string(total);
    }
  }
  for (Subset menu : sets) {
    for (int x = 0; x < n_; ++x) {
      if (menu.contains(x)) continue;
      const Subset larger = menu | Subset::Singleton(x);
      for (Subset d : NonemptySubsetsOf(menu)) {
        if (at(larger, d) > at(menu, d) + tolerance) {
          return "attention on " + universe.Format(d) + " rises from " + universe.Format(menu) +
                 " to " + universe.Format(larger);
        }
      }
    }
  }
  return std::nullopt;
}

AttentionRule RandomMonotoneAttention(int n, std::mt19937_64& rng) {
  AttentionRule rule(n);
  std::vector<Subset> menus = EnumerateSets(Universe::Letters(n));
  std::stable_sort(menus.begin(), menus.end(),
                   [](Subset x, Subset y) { return x.size() < y.size(); });
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Subset menu : menus) {
    if (menu.size() == 1) {
      rule.at(menu, menu) = 1.0;
      continue;
    }
    std::vector<std::pair<Subset, double>> proposals;
    double total = 0.0;
    for (Subset d : NonemptySubsetsOf(menu)) {
      if (d == menu) continue;
      double cap = 1.0;
      for (int x : menu.Minus(d).members()) {
        cap = std::min(cap, rule.at(menu.Minus(Subset::Singleton(x)), d));
      }
      const double value = uniform(rng) * cap;
      proposals.emplace_back(d, value);
      total += value;
    }
    const double scale = total > 1.0 ? 1.0 / total : 1.0;
    double used = 0.0;
    for (const auto& [d, value] : proposals) {
      rule.at(menu, d) = scale * value;
      used += scale * value;
    }
    rule.at(menu, menu) = std::max(0.0, 1.0 - used);
  }
  return rule;
}

RaumRule GenerateMixture(const Universe& universe, const OrderDistribution& marginal,
                         const std::vector<AttentionRule>& attention) {
  CheckMarginal(universe, marginal);
  if (attention.size() != 1 && attention.size() != marginal.size()) {
    throw RaumError(ErrorCode::kInvalidArgument,
                    "attention rules must be one shared rule or one per order");
  }
  for (std::size_t k = 0; k < attention.size(); ++k) {
    if (attention[k].n() != universe.size()) {
      throw RaumError(ErrorCode::kInvalidArgument, "attention rule has the wrong size");
    }
    if (auto violation = attention[k].FindViolation()) {
      throw RaumError(ErrorCode::kInvalidArgument,
                      "attention rule " + std::to_string(k) + ": " + *violation);
    }
  }
  RaumRule rule(universe);
  const std::vector<Subset> sets = EnumerateSets(universe);
  for (std::uint64_t r = 0; r < marginal.size(); ++r) {
    if (marginal[r] == 0.0) continue;
    const AttentionRule& lambda = attention.size() == 1 ? attention[0] : attention[r];
    for (Subset menu : sets) {
      for (Subset d : NonemptySubsetsOf(menu)) rule.at(menu, r, d) = lambda.at(menu, d) * marginal[r];
    }
  }
  return rule;
}

RaumRule GenerateRum(const Universe& universe, const OrderDistribution& marginal) {
  return GenerateMixture(universe, marginal, {AttentionRule::FullAttention(universe.size())});
}

}  // namespace raum
