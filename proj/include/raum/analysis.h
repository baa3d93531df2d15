// Procedures over the admissible-rule polytope of a dataset: the
// representation test with optional relaxations, sharp bounds on preference
// marginals, out-of-sample choice probabilities and welfare losses, and the
// regularity scan that flags revealed-worst alternatives.
//
// Every bound is the pair of LP optima of a linear functional of pi over
// {v >= 0 : G v = g}, rounded outward by kBoundSlack and clamped to [0, 1],
// together with the rules attaining each end.

#ifndef RAUM_ANALYSIS_H_
#define RAUM_ANALYSIS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "raum/constraints.h"
#include "raum/core.h"
#include "raum/lp.h"

namespace raum {

inline constexpr double kBoundSlack = 1e-8;
inline constexpr double kRegularityTolerance = 1e-9;

struct Relaxation {
  bool stability = true;
  bool monotonicity = true;
};

struct Verdict {
  bool admits = false;
  Relaxation relaxation;
  // A rule reproducing the dataset under the relaxation, when admits.
  std::optional<RaumRule> certificate;
  // min_{v >= 0} |g - G v|^2 when requested.
  std::optional<double> distance;
  // y with y'G <= 0 and y'g > 0, when the dataset is rejected.
  std::vector<double> farkas;
  double residual = 0.0;
  std::int64_t iterations = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct Bound {
  double lo = 0.0;
  double hi = 1.0;
  RaumRule attained_lo;
  RaumRule attained_hi;
  std::int64_t iterations = 0;
};

// (a, A, B) with a in A inside B, both observed, and rho_B(a) > rho_A(a).
struct IrregularTriple {
  int alternative;
  Subset smaller;
  Subset larger;
  double gap;
};

struct RevealedWorst {
  int alternative;
  // Largest upper bound on the marginal of any order ranking it last.
  double max_hi;
  std::vector<std::pair<std::uint64_t, double>> hi_by_order;
};

// kStrict counts mass on (order, D) whose best in D differs from the best in
// the whole menu. kLiteral evaluates the displayed difference of indicator
// sums, which vanishes on every feasible rule.
enum class WelfareFormula { kStrict, kLiteral };

struct AnalyzerOptions {
  AssemblyMode mode = AssemblyMode::kReduced;
  // Admissible orders; all orders when unset. Must be nonempty.
  std::optional<std::vector<PreferenceOrder>> orders;
  // Not owned; the RAUM_SOLVER default when null.
  const lp::LpBackend* backend = nullptr;
  bool compute_distance = false;
};

// Holds a dataset and its assembled system with both assumptions imposed.
// All queries are const and may run concurrently.
class Analyzer {
 public:
  explicit Analyzer(ChoiceDataset dataset, AnalyzerOptions options = {});
  ~Analyzer();
  Analyzer(Analyzer&&) noexcept;

  const ChoiceDataset& dataset() const { return dataset_; }
  const ConstraintSystem& system() const { return *system_; }

  // Throws RaumError(kNumerical) when the solver gives no verified answer.
  Verdict Test(Relaxation relaxation = {}) const;

  // Bounds on the marginal of `order` at `menu` (X by default). Throws
  // RaumError(kNoRepresentation) when the dataset is rejected.
  Bound PreferenceBounds(const PreferenceOrder& order, std::optional<Subset> menu = {}) const;

  // For every alternative in an irregular triple, the upper bounds of all
  // orders ranking it last.
  std::vector<RevealedWorst> RevealedWorstBounds() const;

  Bound PredictBounds(Subset target, int alternative) const;

  // Throws RaumError(kInvalidArgument) when `menu` is not observed.
  Bound WelfareBounds(Subset menu, WelfareFormula formula = WelfareFormula::kStrict) const;
  // Sum of the per-menu welfare functionals over observed menus.
  Bound TotalWelfareBounds(WelfareFormula formula = WelfareFormula::kStrict) const;

 private:
  Bound Optimize(const std::vector<double>& objective, double upper_limit) const;
  std::vector<double> WelfareObjective(Subset menu, WelfareFormula formula) const;
  lp::SolveOptions solve_options() const;

  ChoiceDataset dataset_;
  AnalyzerOptions options_;
  std::optional<std::vector<std::uint64_t>> order_ranks_;
  std::unique_ptr<ConstraintSystem> system_;
  std::unique_ptr<lp::LinearSystem> linear_;
  std::unique_ptr<lp::LpBackend> owned_backend_;
};

// Irregular triples in dataset menu order, alternatives ascending.
std::vector<IrregularTriple> IrregularTriples(const ChoiceDataset& dataset);

// Mass of pi at `menu` on (order, D) pairs that the formula counts.
double WelfareOfRule(const RaumRule& rule, Subset menu,
                     WelfareFormula formula = WelfareFormula::kStrict);

// Clamps every value into [0, 1].
RaumRule CleanRule(RaumRule rule);

}  // namespace raum

#endif  // RAUM_ANALYSIS_H_
