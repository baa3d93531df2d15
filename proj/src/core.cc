#include "raum/core.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "raum/error.h"

namespace raum {

namespace {

std::string StripSpaces(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::vector<std::string> SplitOn(std::string_view text, std::string_view sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
}

}  // namespace

std::vector<int> Subset::members() const {
  std::vector<int> out;
  for (std::uint32_t rest = bits_; rest != 0; rest &= rest - 1) {
    out.push_back(std::countr_zero(rest));
  }
  return out;
}

std::vector<Subset> NonemptySubsetsOf(Subset set) {
  std::vector<Subset> out;
  out.reserve((std::size_t{1} << set.size()) - 1);
  // Enumerate compressed indices 1..2^k-1 and expand them onto the bits of
  // `set`; expansion is monotone, so the output is in increasing mask order.
  const std::vector<int> bits = set.members();
  const std::uint32_t count = std::uint32_t{1} << bits.size();
  for (std::uint32_t c = 1; c < count; ++c) {
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if ((c >> k) & 1u) mask |= std::uint32_t{1} << bits[k];
    }
    out.emplace_back(mask);
  }
  return out;
}

std::size_t SubsetRankWithin(Subset subset, Subset set) {
  std::size_t compressed = 0;
  int k = 0;
  for (std::uint32_t rest = set.bits(); rest != 0; rest &= rest - 1, ++k) {
    const int bit = std::countr_zero(rest);
    if (subset.contains(bit)) compressed |= std::size_t{1} << k;
  }
  return compressed - 1;
}

std::uint64_t Factorial(int n) {
  std::uint64_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

// ---------------------------------------------------------------------------
// Universe

Universe Universe::FromLabels(std::vector<std::string> labels) {
  const int n = static_cast<int>(labels.size());
  if (n < kMinAlternatives || n > kMaxAlternatives) {
    throw RaumError(ErrorCode::kInput,
                    "number of alternatives must be in [" +
                        std::to_string(kMinAlternatives) + ", " +
                        std::to_string(kMaxAlternatives) + "], got " +
                        std::to_string(n));
  }
  std::sort(labels.begin(), labels.end());
  for (int i = 0; i < n; ++i) {
    if (labels[i].empty()) throw RaumError(ErrorCode::kInput, "empty alternative label");
    if (labels[i].find_first_of(",>{} \t\n") != std::string::npos) {
      throw RaumError(ErrorCode::kInput, "alternative label '" + labels[i] +
                                             "' contains a reserved character");
    }
    if (i > 0 && labels[i] == labels[i - 1]) {
      throw RaumError(ErrorCode::kInput, "duplicate alternative label '" + labels[i] + "'");
    }
  }
  return Universe(std::move(labels));
}

Universe Universe::Letters(int n) {
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.emplace_back(1, static_cast<char>('a' + i));
  return FromLabels(std::move(labels));
}

std::optional<int> Universe::IndexOf(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<int>(it - labels_.begin());
}

std::string Universe::Format(Subset set) const {
  std::string out = "{";
  bool first = true;
  for (int i : set.members()) {
    if (!first) out += ",";
    out += labels_[i];
    first = false;
  }
  return out + "}";
}

Subset Universe::ParseSet(std::string_view text) const {
  std::string cleaned = StripSpaces(text);
  if (!cleaned.empty() && cleaned.front() == '{' && cleaned.back() == '}') {
    cleaned = cleaned.substr(1, cleaned.size() - 2);
  }
  if (cleaned.empty()) throw RaumError(ErrorCode::kInput, "empty set");
  std::uint32_t bits = 0;
  for (const std::string& part : SplitOn(cleaned, ",")) {
    const auto idx = IndexOf(part);
    if (!idx) throw RaumError(ErrorCode::kInput, "unknown alternative '" + part + "'");
    bits |= std::uint32_t{1} << *idx;
  }
  return Subset(bits);
}

// ---------------------------------------------------------------------------
// PreferenceOrder

PreferenceOrder PreferenceOrder::FromRanking(std::span<const int> ranking) {
  const int n = static_cast<int>(ranking.size());
  if (n < 1 || n > kMaxAlternatives) {
    throw RaumError(ErrorCode::kInvalidArgument, "ranking length out of range");
  }
  PreferenceOrder order;
  order.n_ = n;
  std::uint32_t seen = 0;
  for (int p = 0; p < n; ++p) {
    const int alt = ranking[p];
    if (alt < 0 || alt >= n || ((seen >> alt) & 1u)) {
      throw RaumError(ErrorCode::kInvalidArgument, "ranking is not a permutation");
    }
    seen |= std::uint32_t{1} << alt;
    order.ranking_[p] = static_cast<std::uint8_t>(alt);
    order.position_[alt] = static_cast<std::uint8_t>(p);
  }
  // Lehmer code: count of later entries smaller than the current one.
  std::uint64_t rank = 0;
  for (int p = 0; p < n; ++p) {
    int smaller = 0;
    for (int q = p + 1; q < n; ++q) smaller += ranking[q] < ranking[p];
    rank += static_cast<std::uint64_t>(smaller) * Factorial(n - 1 - p);
  }
  order.rank_ = rank;
  return order;
}

PreferenceOrder PreferenceOrder::FromRank(int n, std::uint64_t rank) {
  if (n < 1 || n > kMaxAlternatives || rank >= Factorial(n)) {
    throw RaumError(ErrorCode::kInvalidArgument, "order rank out of range");
  }
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> ranking;
  ranking.reserve(n);
  for (int p = 0; p < n; ++p) {
    const std::uint64_t block = Factorial(n - 1 - p);
    const auto digit = static_cast<std::size_t>(rank / block);
    rank %= block;
    ranking.push_back(pool[digit]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit));
  }
  return FromRanking(ranking);
}

PreferenceOrder PreferenceOrder::Parse(std::string_view text, const Universe& universe) {
  const std::string cleaned = StripSpaces(text);
  std::vector<int> ranking;
  for (const std::string& part : SplitOn(cleaned, ">")) {
    const auto idx = universe.IndexOf(part);
    if (!idx) {
      throw RaumError(ErrorCode::kInput, "unknown alternative '" + part +
                                             "' in order '" + std::string(text) + "'");
    }
    ranking.push_back(*idx);
  }
  if (static_cast<int>(ranking.size()) != universe.size()) {
    throw RaumError(ErrorCode::kInput, "order '" + std::string(text) +
                                           "' must rank all " +
                                           std::to_string(universe.size()) + " alternatives");
  }
  try {
    return FromRanking(ranking);
  } catch (const RaumError&) {
    throw RaumError(ErrorCode::kInput, "order '" + std::string(text) + "' repeats an alternative");
  }
}

std::vector<int> PreferenceOrder::ranking() const {
  return std::vector<int>(ranking_.begin(), ranking_.begin() + n_);
}

std::string PreferenceOrder::Format(const Universe& universe) const {
  std::string out;
  for (int p = 0; p < n_; ++p) {
    if (p > 0) out += ">";
    out += universe.label(ranking_[p]);
  }
  return out;
}

int Best(const PreferenceOrder& order, Subset set) {
  if (set.empty()) throw RaumError(ErrorCode::kInvalidArgument, "empty consideration set");
  for (int p = 0; p < order.size(); ++p) {
    if (set.contains(order.at(p))) return order.at(p);
  }
  throw RaumError(ErrorCode::kInvalidArgument, "set contains alternatives outside the order");
}

std::vector<PreferenceOrder> EnumerateOrders(const Universe& universe) {
  const int n = universe.size();
  std::vector<PreferenceOrder> out;
  const std::uint64_t count = Factorial(n);
  out.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r) out.push_back(PreferenceOrder::FromRank(n, r));
  return out;
}

std::vector<Subset> EnumerateSets(const Universe& universe) {
  std::vector<Subset> out;
  out.reserve(universe.num_sets());
  for (std::uint32_t m = 1; m <= universe.grand().bits(); ++m) out.emplace_back(m);
  return out;
}

BestTable::BestTable(int n) : num_sets_((std::size_t{1} << n) - 1) {
  const std::uint64_t orders = Factorial(n);
  table_.resize(orders * num_sets_);
  for (std::uint64_t r = 0; r < orders; ++r) {
    const PreferenceOrder order = PreferenceOrder::FromRank(n, r);
    for (std::uint32_t m = 1; m <= num_sets_; ++m) {
      table_[r * num_sets_ + (m - 1)] = static_cast<std::uint8_t>(Best(order, Subset(m)));
    }
  }
}

// ---------------------------------------------------------------------------
// ChoiceDataset

ChoiceDataset::ChoiceDataset(Universe universe, std::vector<Subset> menus,
                             std::vector<std::vector<double>> probs)
    : universe_(std::move(universe)), menus_(std::move(menus)), probs_(std::move(probs)) {
  const int n = universe_.size();
  if (menus_.size() != probs_.size()) {
    throw RaumError(ErrorCode::kInput, "menus and probability vectors differ in count");
  }
  if (menus_.empty()) throw RaumError(ErrorCode::kInput, "dataset has no menus");
  std::set<std::uint32_t> seen;
  for (std::size_t k = 0; k < menus_.size(); ++k) {
    const Subset menu = menus_[k];
    const std::string name = universe_.Format(menu);
    if (menu.empty() || !menu.IsSubsetOf(universe_.grand())) {
      throw RaumError(ErrorCode::kInput, "menu " + std::to_string(k) + " is empty or out of range");
    }
    if (!seen.insert(menu.bits()).second) {
      throw RaumError(ErrorCode::kInput, "duplicate menu " + name);
    }
    std::vector<double>& p = probs_[k];
    if (static_cast<int>(p.size()) != n) {
      throw RaumError(ErrorCode::kInput, "probability vector for menu " + name +
                                             " has wrong length");
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(p[i]) || p[i] < 0.0) {
        throw RaumError(ErrorCode::kInput, "negative or non-finite probability in menu " + name);
      }
      if (p[i] > 0.0 && !menu.contains(i)) {
        throw RaumError(ErrorCode::kInput, "alternative " + universe_.label(i) +
                                               " has positive probability outside menu " + name);
      }
      total += p[i];
    }
    if (std::abs(total - 1.0) > kDatasetTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "probabilities for menu " << name << " sum to " << total;
      throw RaumError(ErrorCode::kInput, msg.str());
    }
  }
}

std::optional<std::size_t> ChoiceDataset::MenuIndex(Subset menu) const {
  for (std::size_t k = 0; k < menus_.size(); ++k) {
    if (menus_[k] == menu) return k;
  }
  return std::nullopt;
}

bool ChoiceDataset::IsComplete() const { return menus_.size() == universe_.num_sets(); }

// ---------------------------------------------------------------------------
// RaumRule

RaumRule::RaumRule(Universe universe)
    : universe_(std::move(universe)),
      num_orders_(universe_.num_orders()),
      num_sets_(universe_.num_sets()),
      values_(num_sets_ * num_orders_ * num_sets_, 0.0) {}

double RaumRule::Marginal(Subset menu, std::uint64_t order_rank) const {
  const std::size_t base = FlatIndex(menu, order_rank, Subset(1));
  double total = 0.0;
  for (std::size_t d = 0; d < num_sets_; ++d) total += values_[base + d];
  return total;
}

double ChoiceProb(const RaumRule& rule, Subset menu, int alternative) {
  const Universe& u = rule.universe();
  if (menu.empty() || !menu.IsSubsetOf(u.grand())) {
    throw RaumError(ErrorCode::kInvalidArgument, "invalid menu");
  }
  if (!menu.contains(alternative)) {
    throw RaumError(ErrorCode::kInvalidArgument,
                    "alternative " + u.label(alternative) + " is not in menu " + u.Format(menu));
  }
  const std::uint64_t orders = u.num_orders();
  const std::vector<Subset> sets = NonemptySubsetsOf(menu);
  double total = 0.0;
  for (std::uint64_t r = 0; r < orders; ++r) {
    const PreferenceOrder order = PreferenceOrder::FromRank(u.size(), r);
    for (Subset d : sets) {
      if (d.contains(alternative) && Best(order, d) == alternative) total += rule.at(menu, r, d);
    }
  }
  return total;
}

ChoiceDataset InducedDataset(const RaumRule& rule, std::vector<Subset> menus) {
  const Universe& u = rule.universe();
  if (menus.empty()) menus = EnumerateSets(u);
  const BestTable best(u.size());
  std::vector<std::vector<double>> probs;
  probs.reserve(menus.size());
  for (Subset menu : menus) {
    std::vector<double> p(u.size(), 0.0);
    for (std::uint64_t r = 0; r < u.num_orders(); ++r) {
      for (Subset d : NonemptySubsetsOf(menu)) p[best(r, d)] += rule.at(menu, r, d);
    }
    // Renormalise away accumulated rounding so the dataset check at 1e-9
    // reflects the rule, not summation order.
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (total > 0.0 && std::abs(total - 1.0) < 1e-12) {
      for (double& x : p) x /= total;
    }
    probs.push_back(std::move(p));
  }
  return ChoiceDataset(u, std::move(menus), std::move(probs));
}

// ---------------------------------------------------------------------------
// Validation

std::string_view ToString(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kDataFit: return "data_fit";
    case Violation::Kind::kNormalization: return "normalization";
    case Violation::Kind::kFeasibility: return "feasibility";
    case Violation::Kind::kStability: return "stability";
    case Violation::Kind::kMonotonicity: return "monotonicity";
  }
  return "unknown";
}

std::size_t ViolationReport::Count(Violation::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

double ViolationReport::MaxMagnitude(Violation::Kind kind) const {
  double m = 0.0;
  for (const Violation& v : violations) {
    if (v.kind == kind) m = std::max(m, v.magnitude);
  }
  return m;
}

ViolationReport ValidateRule(const RaumRule& rule, const ChoiceDataset& dataset,
                             const ValidationFlags& flags) {
  const Universe& u = rule.universe();
  if (!(u == dataset.universe())) {
    throw RaumError(ErrorCode::kInvalidArgument, "rule and dataset use different universes");
  }
  const double tol = flags.tolerance;
  const int n = u.size();
  const std::uint64_t orders = u.num_orders();
  const std::vector<Subset> menus = EnumerateSets(u);
  ViolationReport report;
  auto add = [&report](Violation::Kind kind, double magnitude, std::string detail) {
    report.violations.push_back({kind, magnitude, std::move(detail)});
  };

  // Value range, feasibility and normalization, menu by menu.
  for (Subset menu : menus) {
    double total = 0.0;
    for (std::uint64_t r = 0; r < orders; ++r) {
      for (Subset d : menus) {
        const double value = rule.at(menu, r, d);
        total += value;
        if (value < -tol || value > 1.0 + tol) {
          add(Violation::Kind::kNormalization, value < 0.0 ? -value : value - 1.0,
              "value outside [0,1] at menu " + u.Format(menu) + ", set " + u.Format(d));
        }
        if (!d.IsSubsetOf(menu) && std::abs(value) > tol) {
          add(Violation::Kind::kFeasibility, std::abs(value),
              "mass on set " + u.Format(d) + " outside menu " + u.Format(menu) + " for order " +
                  PreferenceOrder::FromRank(n, r).Format(u));
        }
      }
    }
    if (std::abs(total - 1.0) > tol) {
      add(Violation::Kind::kNormalization, std::abs(total - 1.0),
          "menu " + u.Format(menu) + " sums to " + std::to_string(total));
    }
  }

  // Data fit on observed menus.
  for (std::size_t k = 0; k < dataset.num_menus(); ++k) {
    const Subset menu = dataset.menus()[k];
    for (int a : menu.members()) {
      const double gap = std::abs(ChoiceProb(rule, menu, a) - dataset.prob(k, a));
      if (gap > tol) {
        add(Violation::Kind::kDataFit, gap,
            "choice of " + u.label(a) + " from " + u.Format(menu) + " off by " +
                std::to_string(gap));
      }
    }
  }

  if (flags.stability) {
    std::vector<double> marginal(menus.size() * orders);
    for (std::size_t m = 0; m < menus.size(); ++m) {
      for (std::uint64_t r = 0; r < orders; ++r) {
        marginal[m * orders + r] = rule.Marginal(menus[m], r);
      }
    }
    for (std::size_t i = 0; i < menus.size(); ++i) {
      for (std::size_t j = i + 1; j < menus.size(); ++j) {
        for (std::uint64_t r = 0; r < orders; ++r) {
          const double gap = std::abs(marginal[i * orders + r] - marginal[j * orders + r]);
          if (gap > tol) {
            add(Violation::Kind::kStability, gap,
                "marginal of " + PreferenceOrder::FromRank(n, r).Format(u) + " differs between " +
                    u.Format(menus[i]) + " and " + u.Format(menus[j]));
          }
        }
      }
    }
  }

  if (flags.monotonicity) {
    for (Subset small : menus) {
      for (Subset large : menus) {
        if (large == small || !small.IsSubsetOf(large)) continue;
        for (Subset d : NonemptySubsetsOf(small)) {
          for (std::uint64_t r = 0; r < orders; ++r) {
            const double drop = rule.at(large, r, d) - rule.at(small, r, d);
            if (drop > tol) {
              add(Violation::Kind::kMonotonicity, drop,
                  "set " + u.Format(d) + " for order " + PreferenceOrder::FromRank(n, r).Format(u) +
                      " gains mass from " + u.Format(small) + " to " + u.Format(large));
            }
          }
        }
      }
    }
  }
  return report;
}

}  // namespace raum
