// Domain types for stochastic choice with limited consideration: the
// alternative universe, menus and consideration sets as bitmasks, strict
// preference orders, observed choice datasets, and joint rules over
// (preference, consideration set) pairs for every menu.
//
// Canonical orders shared by every module:
//   - subsets are enumerated by increasing bitmask, so the index of a
//     nonempty subset is mask - 1;
//   - preference orders are stored best-to-worst and enumerated by their
//     lexicographic (Lehmer) rank.

#ifndef RAUM_CORE_H_
#define RAUM_CORE_H_

#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raum {

inline constexpr int kMinAlternatives = 2;
inline constexpr int kMaxAlternatives = 8;

// Rule validation tolerance; datasets are checked at kDatasetTolerance.
inline constexpr double kRuleTolerance = 1e-8;
inline constexpr double kDatasetTolerance = 1e-9;

// A subset of the alternatives, bit i set iff alternative i is present.
class Subset {
 public:
  constexpr Subset() = default;
  constexpr explicit Subset(std::uint32_t bits) : bits_(bits) {}

  static constexpr Subset Singleton(int alternative) {
    return Subset(std::uint32_t{1} << alternative);
  }
  static constexpr Subset Full(int n) {
    return Subset((std::uint32_t{1} << n) - 1);
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int alternative) const {
    return (bits_ >> alternative) & 1u;
  }
  constexpr bool IsSubsetOf(Subset other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  int size() const { return std::popcount(bits_); }

  // Position of this set among nonempty subsets in increasing mask order.
  constexpr std::size_t index() const { return bits_ - 1; }

  // Alternatives in increasing index order.
  std::vector<int> members() const;

  constexpr Subset operator|(Subset o) const { return Subset(bits_ | o.bits_); }
  constexpr Subset operator&(Subset o) const { return Subset(bits_ & o.bits_); }
  constexpr Subset Minus(Subset o) const { return Subset(bits_ & ~o.bits_); }

  constexpr auto operator<=>(const Subset&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

// Nonempty subsets of `set` in increasing mask order.
std::vector<Subset> NonemptySubsetsOf(Subset set);

// Rank of `subset` among the nonempty subsets of `set` (increasing mask
// order). Requires subset to be a nonempty subset of set.
std::size_t SubsetRankWithin(Subset subset, Subset set);

std::uint64_t Factorial(int n);

// The grand choice set X: n distinct labels kept in sorted order. The index
// of an alternative is its position in the sorted label list.
class Universe {
 public:
  // Sorts the labels; rejects duplicates, empty labels, and sizes outside
  // [kMinAlternatives, kMaxAlternatives].
  static Universe FromLabels(std::vector<std::string> labels);
  // Labels "a", "b", ... for n alternatives.
  static Universe Letters(int n);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int alternative) const { return labels_[alternative]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<int> IndexOf(std::string_view label) const;

  Subset grand() const { return Subset::Full(size()); }
  std::size_t num_sets() const { return (std::size_t{1} << size()) - 1; }
  std::size_t num_orders() const { return Factorial(size()); }

  // "{a,c}" style rendering.
  std::string Format(Subset set) const;
  // Parses "a,c" (whitespace ignored) into a subset.
  Subset ParseSet(std::string_view text) const;

  bool operator==(const Universe&) const = default;

 private:
  explicit Universe(std::vector<std::string> labels) : labels_(std::move(labels)) {}
  std::vector<std::string> labels_;
};

// A strict linear order, stored best-to-worst.
class PreferenceOrder {
 public:
  // `ranking` must be a permutation of 0..n-1, best first.
  static PreferenceOrder FromRanking(std::span<const int> ranking);
  static PreferenceOrder FromRank(int n, std::uint64_t rank);
  // "a>b>c" using the universe labels; whitespace ignored.
  static PreferenceOrder Parse(std::string_view text, const Universe& universe);

  int size() const { return n_; }
  std::uint64_t rank() const { return rank_; }
  int at(int position) const { return ranking_[position]; }
  std::vector<int> ranking() const;
  // 0 for the best alternative.
  int position(int alternative) const { return position_[alternative]; }
  bool Prefers(int x, int y) const { return position_[x] < position_[y]; }
  int worst() const { return ranking_[n_ - 1]; }

  std::string Format(const Universe& universe) const;

  bool operator==(const PreferenceOrder& o) const {
    return n_ == o.n_ && rank_ == o.rank_;
  }

 private:
  PreferenceOrder() = default;
  int n_ = 0;
  std::uint64_t rank_ = 0;
  std::array<std::uint8_t, kMaxAlternatives> ranking_{};
  std::array<std::uint8_t, kMaxAlternatives> position_{};
};

// The maximal element of `set` under `order`. Throws on an empty set.
int Best(const PreferenceOrder& order, Subset set);

// All n! orders in rank order.
std::vector<PreferenceOrder> EnumerateOrders(const Universe& universe);
// All 2^n - 1 nonempty subsets in increasing mask order.
std::vector<Subset> EnumerateSets(const Universe& universe);

// Precomputed Best(order, set) for every order and nonempty set.
class BestTable {
 public:
  explicit BestTable(int n);
  int operator()(std::uint64_t order_rank, Subset set) const {
    return table_[order_rank * num_sets_ + set.index()];
  }

 private:
  std::size_t num_sets_;
  std::vector<std::uint8_t> table_;
};

// Observed menus with their choice probabilities. Menus keep the order in
// which they were supplied; probabilities are stored densely per menu.
class ChoiceDataset {
 public:
  // probs[k][i] is the probability of alternative i in menus[k]. Validates
  // nonempty distinct menus, support inside the menu, nonnegativity, and
  // unit sums within kDatasetTolerance.
  ChoiceDataset(Universe universe, std::vector<Subset> menus,
                std::vector<std::vector<double>> probs);

  const Universe& universe() const { return universe_; }
  const std::vector<Subset>& menus() const { return menus_; }
  std::size_t num_menus() const { return menus_.size(); }
  double prob(std::size_t menu_index, int alternative) const {
    return probs_[menu_index][alternative];
  }
  std::span<const double> probs(std::size_t menu_index) const {
    return probs_[menu_index];
  }
  std::optional<std::size_t> MenuIndex(Subset menu) const;
  // True when every nonempty subset of X is observed.
  bool IsComplete() const;

 private:
  Universe universe_;
  std::vector<Subset> menus_;
  std::vector<std::vector<double>> probs_;
};

// pi_A(order, phi_D) for every nonempty menu A, every order, and every
// nonempty set D, laid out as ((A-1) * n! + rank) * (2^n - 1) + (D - 1).
class RaumRule {
 public:
  explicit RaumRule(Universe universe);

  const Universe& universe() const { return universe_; }

  double at(Subset menu, std::uint64_t order_rank, Subset set) const {
    return values_[FlatIndex(menu, order_rank, set)];
  }
  double& at(Subset menu, std::uint64_t order_rank, Subset set) {
    return values_[FlatIndex(menu, order_rank, set)];
  }
  // Marginal probability of the order at the menu: sum over D.
  double Marginal(Subset menu, std::uint64_t order_rank) const;

  std::span<const double> values() const { return values_; }

  std::size_t FlatIndex(Subset menu, std::uint64_t order_rank, Subset set) const {
    return (menu.index() * num_orders_ + order_rank) * num_sets_ + set.index();
  }

 private:
  Universe universe_;
  std::size_t num_orders_;
  std::size_t num_sets_;
  std::vector<double> values_;
};

// Probability that `alternative` is chosen from `menu` under the rule:
// mass of (order, D) pairs whose consideration set D lies in the menu and
// whose best element in D is the alternative.
double ChoiceProb(const RaumRule& rule, Subset menu, int alternative);

// The dataset the rule induces on the given menus (all menus when empty).
ChoiceDataset InducedDataset(const RaumRule& rule, std::vector<Subset> menus = {});

struct ValidationFlags {
  bool stability = true;
  bool monotonicity = true;
  double tolerance = kRuleTolerance;
};

struct Violation {
  enum class Kind { kDataFit, kNormalization, kFeasibility, kStability, kMonotonicity };
  Kind kind;
  double magnitude;
  std::string detail;
};

std::string_view ToString(Violation::Kind kind);

struct ViolationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  std::size_t Count(Violation::Kind kind) const;
  double MaxMagnitude(Violation::Kind kind) const;
};

// Lists every violated constraint: data fit, per-menu normalization,
// feasibility (mass on D not inside A), and, when flagged, stability of the
// order marginals across all menu pairs and joint-form monotonicity
// pi_A(o, D) >= pi_B(o, D) for all A strictly inside B with D inside A.
ViolationReport ValidateRule(const RaumRule& rule, const ChoiceDataset& dataset,
                             const ValidationFlags& flags = {});

}  // namespace raum

#endif  // RAUM_CORE_H_
