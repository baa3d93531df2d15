#include "raum/analysis.h"

#include <algorithm>
#include <string>

#include "raum/error.h"

namespace raum {
namespace {

AssemblyOptions MakeAssembly(const AnalyzerOptions& options,
                             const std::optional<std::vector<std::uint64_t>>& ranks,
                             Relaxation relaxation) {
  AssemblyOptions assembly;
  assembly.mode = options.mode;
  assembly.stability = relaxation.stability;
  assembly.monotonicity = relaxation.monotonicity;
  assembly.orders = ranks;
  return assembly;
}

void ThrowOnFailure(const lp::LpResult& result) {
  if (result.status == lp::Status::kInfeasible) {
    throw RaumError(ErrorCode::kNoRepresentation, "no RAUM representation");
  }
  if (result.status != lp::Status::kFeasible) {
    throw RaumError(ErrorCode::kNumerical,
                    "LP solver failed (" + std::string(lp::ToString(result.status)) +
                        "): " + result.message);
  }
}

}  // namespace

Analyzer::Analyzer(ChoiceDataset dataset, AnalyzerOptions options)
    : dataset_(std::move(dataset)), options_(std::move(options)) {
  if (options_.orders) {
    if (options_.orders->empty()) {
      throw RaumError(ErrorCode::kInvalidArgument, "empty preference whitelist");
    }
    std::vector<std::uint64_t> ranks;
    for (const PreferenceOrder& order : *options_.orders) {
      if (order.size() != dataset_.universe().size()) {
        throw RaumError(ErrorCode::kInvalidArgument, "whitelisted order has the wrong length");
      }
      ranks.push_back(order.rank());
    }
    order_ranks_ = std::move(ranks);
  }
  if (options_.backend == nullptr) owned_backend_ = lp::DefaultBackend();
  system_ = std::make_unique<ConstraintSystem>(
      BuildSystem(dataset_, MakeAssembly(options_, order_ranks_, Relaxation{})));
  linear_ = std::make_unique<lp::LinearSystem>(system_->ToLinearSystem());
}

Analyzer::~Analyzer() = default;
Analyzer::Analyzer(Analyzer&&) noexcept = default;

lp::SolveOptions Analyzer::solve_options() const {
  lp::SolveOptions solve;
  solve.backend = options_.backend != nullptr ? options_.backend : owned_backend_.get();
  return solve;
}

Verdict Analyzer::Test(Relaxation relaxation) const {
  std::optional<ConstraintSystem> relaxed;
  std::optional<lp::LinearSystem> relaxed_linear;
  const ConstraintSystem* system = system_.get();
  const lp::LinearSystem* linear = linear_.get();
  if (!relaxation.stability || !relaxation.monotonicity) {
    relaxed.emplace(BuildSystem(dataset_, MakeAssembly(options_, order_ranks_, relaxation)));
    relaxed_linear.emplace(relaxed->ToLinearSystem());
    system = &*relaxed;
    linear = &*relaxed_linear;
  }

  const lp::LpResult result = lp::SolveFeasibility(*linear, solve_options());
  if (result.status != lp::Status::kFeasible && result.status != lp::Status::kInfeasible) {
    ThrowOnFailure(result);
  }
  Verdict verdict;
  verdict.relaxation = relaxation;
  verdict.admits = result.status == lp::Status::kFeasible;
  verdict.residual = result.residual;
  verdict.iterations = result.iterations;
  verdict.rows = system->rows();
  verdict.cols = system->cols();
  if (verdict.admits) {
    verdict.certificate = CleanRule(ExtractRule(*system, result.solution));
  } else {
    verdict.farkas = result.farkas;
  }
  if (options_.compute_distance) {
    const lp::Projection projection = lp::ProjectionDistance(*linear);
    if (projection.status != lp::Status::kFeasible) {
      throw RaumError(ErrorCode::kNumerical, "projection distance did not converge");
    }
    verdict.distance = projection.distance;
  }
  return verdict;
}

Bound Analyzer::Optimize(const std::vector<double>& objective, double upper_limit) const {
  const lp::LpResult low = lp::SolveLinear(*linear_, objective, lp::Sense::kMinimize, solve_options());
  ThrowOnFailure(low);
  const lp::LpResult high = lp::SolveLinear(*linear_, objective, lp::Sense::kMaximize, solve_options());
  ThrowOnFailure(high);
  Bound bound{
      .lo = std::clamp(low.objective - kBoundSlack, 0.0, upper_limit),
      .hi = std::clamp(high.objective + kBoundSlack, 0.0, upper_limit),
      .attained_lo = CleanRule(ExtractRule(*system_, low.solution)),
      .attained_hi = CleanRule(ExtractRule(*system_, high.solution)),
      .iterations = low.iterations + high.iterations,
  };
  return bound;
}

Bound Analyzer::PreferenceBounds(const PreferenceOrder& order, std::optional<Subset> menu) const {
  const Universe& universe = dataset_.universe();
  if (order.size() != universe.size()) {
    throw RaumError(ErrorCode::kInvalidArgument, "order has the wrong length");
  }
  const Subset at = menu.value_or(universe.grand());
  if (at.empty() || !at.IsSubsetOf(universe.grand())) {
    throw RaumError(ErrorCode::kInvalidArgument, "menu outside the universe");
  }
  std::vector<double> objective(system_->cols(), 0.0);
  for (Subset d : NonemptySubsetsOf(at)) {
    if (auto column = system_->layout().Find(at, order.rank(), d)) objective[*column] = 1.0;
  }
  return Optimize(objective, 1.0);
}

std::vector<RevealedWorst> Analyzer::RevealedWorstBounds() const {
  const Universe& universe = dataset_.universe();
  std::vector<bool> flagged(universe.size(), false);
  for (const IrregularTriple& triple : IrregularTriples(dataset_)) flagged[triple.alternative] = true;
  std::vector<RevealedWorst> out;
  const std::vector<PreferenceOrder> orders = EnumerateOrders(universe);
  for (int a = 0; a < universe.size(); ++a) {
    if (!flagged[a]) continue;
    RevealedWorst entry{.alternative = a, .max_hi = 0.0, .hi_by_order = {}};
    for (const PreferenceOrder& order : orders) {
      if (order.worst() != a) continue;
      std::vector<double> objective(system_->cols(), 0.0);
      for (Subset d : NonemptySubsetsOf(universe.grand())) {
        if (auto column = system_->layout().Find(universe.grand(), order.rank(), d)) {
          objective[*column] = 1.0;
        }
      }
      const lp::LpResult high =
          lp::SolveLinear(*linear_, objective, lp::Sense::kMaximize, solve_options());
      ThrowOnFailure(high);
      const double hi = std::clamp(high.objective + kBoundSlack, 0.0, 1.0);
      entry.hi_by_order.emplace_back(order.rank(), hi);
      entry.max_hi = std::max(entry.max_hi, hi);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

Bound Analyzer::PredictBounds(Subset target, int alternative) const {
  const Universe& universe = dataset_.universe();
  if (target.empty() || !target.IsSubsetOf(universe.grand())) {
    throw RaumError(ErrorCode::kInvalidArgument, "target menu outside the universe");
  }
  if (alternative < 0 || alternative >= universe.size() || !target.contains(alternative)) {
    throw RaumError(ErrorCode::kInvalidArgument, "alternative not in the target menu");
  }
  std::vector<double> objective(system_->cols(), 0.0);
  const std::vector<Subset> subsets = NonemptySubsetsOf(target);
  for (std::uint64_t rank : system_->layout().order_ranks()) {
    const PreferenceOrder order = PreferenceOrder::FromRank(universe.size(), rank);
    for (Subset d : subsets) {
      if (Best(order, d) != alternative) continue;
      if (auto column = system_->layout().Find(target, rank, d)) objective[*column] = 1.0;
    }
  }
  return Optimize(objective, 1.0);
}

std::vector<double> Analyzer::WelfareObjective(Subset menu, WelfareFormula formula) const {
  const Universe& universe = dataset_.universe();
  const std::vector<Subset> sets = system_->layout().mode() == AssemblyMode::kFull
                                       ? EnumerateSets(universe)
                                       : NonemptySubsetsOf(menu);
  std::vector<double> objective(system_->cols(), 0.0);
  for (std::uint64_t rank : system_->layout().order_ranks()) {
    const PreferenceOrder order = PreferenceOrder::FromRank(universe.size(), rank);
    const int full_best = Best(order, menu);
    for (Subset d : sets) {
      const auto column = system_->layout().Find(menu, rank, d);
      if (!column) continue;
      double coefficient = 0.0;
      if (formula == WelfareFormula::kStrict) {
        coefficient = d.IsSubsetOf(menu) && Best(order, d) != full_best ? 1.0 : 0.0;
      } else {
        // Sum over a in the menu of 1{a best in menu} - 1{a best in D},
        // where a filter with D outside the menu considers nothing.
        coefficient = 1.0 - (d.IsSubsetOf(menu) ? 1.0 : 0.0);
      }
      objective[*column] = coefficient;
    }
  }
  return objective;
}

Bound Analyzer::WelfareBounds(Subset menu, WelfareFormula formula) const {
  if (!dataset_.MenuIndex(menu)) {
    throw RaumError(ErrorCode::kInvalidArgument,
                    "welfare menu " + dataset_.universe().Format(menu) + " is not observed");
  }
  return Optimize(WelfareObjective(menu, formula), 1.0);
}

Bound Analyzer::TotalWelfareBounds(WelfareFormula formula) const {
  std::vector<double> objective(system_->cols(), 0.0);
  for (Subset menu : dataset_.menus()) {
    const std::vector<double> part = WelfareObjective(menu, formula);
    for (std::size_t j = 0; j < objective.size(); ++j) objective[j] += part[j];
  }
  return Optimize(objective, static_cast<double>(dataset_.num_menus()));
}

std::vector<IrregularTriple> IrregularTriples(const ChoiceDataset& dataset) {
  std::vector<IrregularTriple> out;
  const auto& menus = dataset.menus();
  for (std::size_t i = 0; i < menus.size(); ++i) {
    for (std::size_t j = 0; j < menus.size(); ++j) {
      if (i == j || !menus[i].IsSubsetOf(menus[j])) continue;
      for (int a : menus[i].members()) {
        const double gap = dataset.prob(j, a) - dataset.prob(i, a);
        if (gap > kRegularityTolerance) {
          out.push_back(IrregularTriple{a, menus[i], menus[j], gap});
        }
      }
    }
  }
  return out;
}

double WelfareOfRule(const RaumRule& rule, Subset menu, WelfareFormula formula) {
  const Universe& universe = rule.universe();
  double total = 0.0;
  for (const PreferenceOrder& order : EnumerateOrders(universe)) {
    const int full_best = Best(order, menu);
    for (Subset d : EnumerateSets(universe)) {
      const double mass = rule.at(menu, order.rank(), d);
      if (mass == 0.0) continue;
      if (formula == WelfareFormula::kStrict) {
        if (d.IsSubsetOf(menu) && Best(order, d) != full_best) total += mass;
      } else {
        double coefficient = 0.0;
        for (int a : menu.members()) {
          const double full = a == full_best ? 1.0 : 0.0;
          const double limited = d.IsSubsetOf(menu) && Best(order, d) == a ? 1.0 : 0.0;
          coefficient += full - limited;
        }
        total += mass * coefficient;
      }
    }
  }
  return total;
}

RaumRule CleanRule(RaumRule rule) {
  const Universe& universe = rule.universe();
  const std::vector<Subset> sets = EnumerateSets(universe);
  const std::uint64_t num_orders = universe.num_orders();
  for (Subset menu : sets) {
    for (std::uint64_t r = 0; r < num_orders; ++r) {
      for (Subset d : sets) {
        double& value = rule.at(menu, r, d);
        value = std::clamp(value, 0.0, 1.0);
      }
    }
  }
  return rule;
}

}  // namespace raum
