// Acceptance report: one PASS/FAIL line per criterion. Exits nonzero when
// any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "fixtures.h"
#include "raum/analysis.h"
#include "raum/constraints.h"
#include "raum/models.h"

namespace raum {
namespace {

using Rational = boost::rational<long long>;
using Clock = std::chrono::steady_clock;

constexpr Subset kA = Subset::Singleton(0);
constexpr Subset kB = Subset::Singleton(1);
constexpr Subset kC = Subset::Singleton(2);

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failures of one criterion and prints its line.
class Criterion {
 public:
  explicit Criterion(int number) : number_(number) {}

  void Check(bool ok, const std::string& what) {
    if (!ok && first_failure_.empty()) first_failure_ = what;
    passed_ = passed_ && ok;
  }

  bool Report(const std::string& summary) const {
    if (passed_) {
      std::printf("%d PASS %s\n", number_, summary.c_str());
    } else {
      std::printf("%d FAIL %s; first failure: %s\n", number_, summary.c_str(), first_failure_.c_str());
    }
    std::fflush(stdout);
    return passed_;
  }

 private:
  int number_;
  bool passed_ = true;
  std::string first_failure_;
};

ChoiceDataset UniformComplete(int n) {
  const Universe universe = Universe::Letters(n);
  std::vector<Subset> menus = EnumerateSets(universe);
  std::vector<std::vector<double>> probs;
  for (Subset menu : menus) {
    std::vector<double> row(n, 0.0);
    for (int a : menu.members()) row[a] = 1.0 / menu.size();
    probs.push_back(row);
  }
  return ChoiceDataset(universe, menus, probs);
}

// y'G <= tol on every column and y'g > tol, recomputed from the assembled rows.
bool FarkasHolds(const ConstraintSystem& system, const std::vector<double>& y) {
  if (y.size() != system.rows()) return false;
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  std::vector<double> reduced(system.cols(), 0.0);
  double rhs = 0.0;
  for (std::size_t row = 0; row < system.rows(); ++row) {
    const auto columns = system.row_columns(row);
    const auto values = system.row_values(row);
    for (std::size_t k = 0; k < columns.size(); ++k) reduced[columns[k]] += y[row] * values[k];
    rhs += y[row] * system.rhs()[row];
  }
  const double tol = 1e-9 * scale;
  return *std::max_element(reduced.begin(), reduced.end()) <= tol && rhs > tol;
}

bool ConflictFixture() {
  Criterion c(1);
  const auto start = Clock::now();
  const Analyzer analyzer(testing::LoadFixture("stability_monotonicity_conflict.json"));
  const Verdict both = analyzer.Test();
  const Verdict no_stability = analyzer.Test({.stability = false});
  const Verdict no_monotonicity = analyzer.Test({.monotonicity = false});
  const double seconds = Seconds(start);
  c.Check(!both.admits, "rejected with both assumptions");
  c.Check(!both.admits && FarkasHolds(analyzer.system(), both.farkas), "Farkas certificate");
  c.Check(no_stability.admits, "accepted without stability");
  c.Check(no_monotonicity.admits, "accepted without monotonicity");
  c.Check(seconds < 5.0, "runtime under 5 s");
  char summary[160];
  std::snprintf(summary, sizeof summary,
                "4-alternative conflict dataset: both=%s no-stability=%s no-monotonicity=%s (%.2f s)",
                both.admits ? "accept" : "reject", no_stability.admits ? "accept" : "reject",
                no_monotonicity.admits ? "accept" : "reject", seconds);
  return c.Report(summary);
}

bool TwoOrderMixture() {
  Criterion c(2);
  const RaumRule rule = testing::TwoOrderMixtureRule();
  const ChoiceDataset data = InducedDataset(rule);
  const ViolationReport report = ValidateRule(rule, data);
  const bool admits = Analyzer(data).Test().admits;
  const double welfare = WelfareOfRule(rule, kA | kB);
  c.Check(report.empty(), "rule violates a constraint");
  c.Check(admits, "induced dataset rejected");
  c.Check(std::abs(welfare - 1.0 / 3.0) <= 1e-12, "welfare at {a,b}");
  char summary[160];
  std::snprintf(summary, sizeof summary,
                "two-order mixture rule: %zu violations, induced data %s, welfare {a,b} = %.15f",
                report.violations.size(), admits ? "accepted" : "rejected", welfare);
  return c.Report(summary);
}

// (mu_D(y) (|D| + delta) - 1) / delta on the considered set D.
double RiShare(const std::array<double, 3>& mu, double delta, Subset considered, int y) {
  double mass = 0.0;
  for (int z : considered.members()) mass += mu[z];
  return (mu[y] / mass * (considered.size() + delta) - 1.0) / delta;
}

void CheckFullAttentionRegime(Criterion& c, const RiParams& params, const ChoiceDataset& data,
                              const std::string& where) {
  const auto& mu = params.mu();
  const double delta = params.delta();
  const double d1 = params.thresholds()[0];
  const double abc_a = data.prob(*data.MenuIndex(kA | kB | kC), 0);
  const double ab_a = data.prob(*data.MenuIndex(kA | kB), 0);
  c.Check(std::abs(abc_a - RiShare(mu, delta, kA | kB | kC, 0)) <= 1e-12, where + " rho_abc(a)");
  const double gap = mu[0] * mu[2] * (delta - d1) / (delta * (mu[0] + mu[1]));
  c.Check(std::abs((ab_a - abc_a) - gap) <= 1e-12, where + " regularity gap");

  const OrderDistribution pi = RiStableMarginal(params);
  double total = 0.0;
  for (double p : pi) {
    c.Check(p >= 0.0, where + " negative stable marginal");
    total += p;
  }
  c.Check(std::abs(total - 1.0) <= 1e-10, where + " stable marginal sum");
  const RaumRule rum = GenerateRum(Universe::Letters(3), pi);
  for (std::size_t k = 0; k < data.num_menus(); ++k) {
    for (int y : data.menus()[k].members()) {
      c.Check(std::abs(ChoiceProb(rum, data.menus()[k], y) - data.prob(k, y)) <= 1e-10,
              where + " RUM reproduction");
    }
  }
}

bool RationalInattention() {
  Criterion c(3);
  const RiParams reference({0.5, 0.3, 0.2}, 3.0);
  const ChoiceDataset reference_data = GenerateRationalInattention(reference);
  const double abc_a = reference_data.prob(*reference_data.MenuIndex(kA | kB | kC), 0);
  const double ab_a = reference_data.prob(*reference_data.MenuIndex(kA | kB), 0);
  c.Check(std::abs(abc_a - 2.0 / 3.0) <= 1e-12, "rho_abc(a) = 2/3");
  c.Check(std::abs((ab_a - abc_a) - 1.0 / 24.0) <= 1e-12, "gap = 1/24");
  CheckFullAttentionRegime(c, reference, reference_data, "reference");
  c.Check(Analyzer(reference_data).Test().admits, "reference dataset rejected");

  const std::array<double, 3> priors[] = {{0.5, 0.3, 0.2}, {0.45, 0.35, 0.2}, {0.6, 0.25, 0.15},
                                          {0.4, 0.33, 0.27}, {0.55, 0.3, 0.15}};
  int cells = 0;
  int accepted = 0;
  for (const auto& mu : priors) {
    std::array<double, 4> t = RiParams::Thresholds(mu);
    std::sort(t.begin(), t.end());
    // One cost level inside each of the five regimes cut by the thresholds.
    const std::array<double, 5> deltas = {t[0] / 2, (t[0] + t[1]) / 2, (t[1] + t[2]) / 2,
                                          (t[2] + t[3]) / 2, 2 * t[3]};
    std::set<std::vector<std::uint32_t>> profiles;
    for (double delta : deltas) {
      const RiParams params(mu, delta);
      const ChoiceDataset data = GenerateRationalInattention(params);
      const std::string where = "mu_a=" + std::to_string(mu[0]) + " delta=" + std::to_string(delta);
      std::vector<std::uint32_t> profile;
      for (Subset menu : {kA | kB, kA | kC, kB | kC, kA | kB | kC}) {
        profile.push_back(params.ConsiderationSet(menu).bits());
      }
      profiles.insert(profile);
      if (delta > params.thresholds()[0]) CheckFullAttentionRegime(c, params, data, where);
      const bool admits = Analyzer(data).Test().admits;
      c.Check(admits, where + " rejected");
      ++cells;
      accepted += admits;
    }
    c.Check(profiles.size() == 5, "grid row does not reach five regimes");
  }
  char summary[200];
  std::snprintf(summary, sizeof summary,
                "rational inattention: rho_abc(a)=%.12f gap=%.12f; %d/%d grid datasets accepted", abc_a,
                ab_a - abc_a, accepted, cells);
  return c.Report(summary);
}

std::vector<Rational> RandomIntegerTable(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> draw(1, 50);
  std::vector<Rational> eta((std::size_t{1} << n) - 1);
  for (Rational& value : eta) value = draw(rng);
  return eta;
}

bool ClosedFormIdentities() {
  Criterion c(4);
  std::mt19937_64 rng(2024);
  int tables = 0;
  long comparisons = 0;
  for (int n = 2; n <= 4; ++n) {
    const Universe universe = Universe::Letters(n);
    for (int trial = 0; trial < 100; ++trial, ++tables) {
      const std::vector<Rational> eta = RandomIntegerTable(n, rng);
      for (Subset menu : EnumerateSets(universe)) {
        for (Subset set : NonemptySubsetsOf(menu)) {
          c.Check(SpanAttention<Rational>(eta, n, menu, set, universe.grand()) ==
                      LogitAttention<Rational>(eta, menu, set),
                  "grand span differs from logit attention");
          c.Check(SpanAttention<Rational>(eta, n, menu, set, menu) ==
                      EliminationByAspects<Rational>(eta, n, menu, set),
                  "menu span differs from elimination by aspects");
          comparisons += 2;
        }
      }
    }
  }
  return c.Report("span formula equals logit and elimination-by-aspects forms exactly on " +
                  std::to_string(tables) + " integer tables (" + std::to_string(comparisons) +
                  " comparisons)");
}

bool SpanMonotonicity() {
  Criterion c(5);
  const int n = 4;
  const Universe universe = Universe::Letters(n);
  const Subset pair = kA | kB;
  const std::vector<std::pair<std::string, std::function<Subset(Subset)>>> maps = {
      {"grand", [&](Subset) { return universe.grand(); }},
      {"menu", [](Subset menu) { return menu; }},
      {"menu minus {a,b}", [&](Subset menu) { return menu.Minus(pair); }},
      {"X minus {a,b}", [&](Subset) { return universe.grand().Minus(pair); }},
  };
  std::mt19937_64 rng(77);
  long inequalities = 0;
  for (const auto& [name, span] : maps) {
    c.Check(!FindSpanMonotonicityViolation(universe, span).has_value(), name + " flagged");
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<Rational> eta = RandomIntegerTable(n, rng);
    for (const auto& [name, span] : maps) {
      for (Subset menu : EnumerateSets(universe)) {
        for (int x = 0; x < n; ++x) {
          if (menu.contains(x)) continue;
          const Subset larger = menu | Subset::Singleton(x);
          for (Subset set : NonemptySubsetsOf(menu)) {
            const Rational small = SpanAttention<Rational>(eta, n, menu, set, span(menu));
            const Rational big = SpanAttention<Rational>(eta, n, larger, set, span(larger));
            c.Check(small >= big, name + " cover-pair inequality");
            ++inequalities;
          }
        }
      }
    }
  }
  const Universe two = Universe::Letters(2);
  const auto witness = FindSpanMonotonicityViolation(two, [](Subset menu) {
    if (menu == kA) return kA | kB;
    if (menu == kB) return kB;
    return kA;
  });
  const bool flagged = witness.has_value() && witness->first == kA && witness->second == (kA | kB);
  c.Check(flagged, "witness map not flagged at ({a}, {a,b})");
  return c.Report(std::to_string(inequalities) +
                  " cover-pair inequalities hold exactly for four monotone spans; witness map " +
                  (flagged ? "flagged at ({a}, {a,b})" : "not flagged"));
}

bool SoundnessSweep() {
  Criterion c(6);
  std::string summary = "random monotone mixtures accepted:";
  for (int n = 2; n <= 4; ++n) {
    const auto start = Clock::now();
    std::mt19937_64 rng(1000 + n);
    const Universe universe = Universe::Letters(n);
    int accepted = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const OrderDistribution marginal = RandomMarginal(n, rng);
      std::vector<AttentionRule> attention;
      for (std::size_t r = 0; r < marginal.size(); ++r) {
        attention.push_back(RandomMonotoneAttention(n, rng));
      }
      const RaumRule rule = GenerateMixture(universe, marginal, attention);
      const bool admits = Analyzer(InducedDataset(rule)).Test().admits;
      c.Check(admits, "n=" + std::to_string(n) + " trial " + std::to_string(trial) + " rejected");
      accepted += admits;
    }
    const double seconds = Seconds(start);
    if (n == 4) c.Check(seconds < 600.0, "n=4 sweep over 10 min");
    char part[80];
    std::snprintf(part, sizeof part, " n=%d %d/1000 (%.1f s)", n, accepted, seconds);
    summary += part;
  }
  return c.Report(summary);
}

bool RevealedWorstBounds() {
  Criterion c(7);
  const Analyzer analyzer(testing::LoadFixture("irregular_feasible.json"));
  const Universe& universe = analyzer.dataset().universe();
  const std::vector<RevealedWorst> flagged = analyzer.RevealedWorstBounds();
  c.Check(!flagged.empty(), "no alternative flagged");
  std::uint32_t flagged_bits = 0;
  std::string names;
  double worst_hi = 0.0;
  for (const RevealedWorst& entry : flagged) {
    flagged_bits |= Subset::Singleton(entry.alternative).bits();
    names += (names.empty() ? "" : ",") + universe.label(entry.alternative);
    for (const auto& [rank, hi] : entry.hi_by_order) {
      c.Check(hi < 1.0 - 1e-6, "order ranking a flagged alternative last reaches 1");
      worst_hi = std::max(worst_hi, hi);
    }
  }
  double best_other = 0.0;
  std::string best_order;
  for (const PreferenceOrder& order : EnumerateOrders(universe)) {
    if (Subset(flagged_bits).contains(order.worst())) continue;
    const double hi = analyzer.PreferenceBounds(order).hi;
    if (hi > best_other) {
      best_other = hi;
      best_order = order.Format(universe);
    }
  }
  c.Check(std::abs(best_other - 1.0) <= 1e-6, "no unflagged order attains 1");
  char summary[200];
  std::snprintf(summary, sizeof summary,
                "flagged {%s}: max upper bound with a flagged alternative last %.9f; %s attains %.9f",
                names.c_str(), worst_hi, best_order.c_str(), best_other);
  return c.Report(summary);
}

bool VerdictChannels() {
  Criterion c(8);
  int datasets = 0;
  int rejected = 0;
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(RAUM_DATA_DIR)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    const std::string name = path.filename().string();
    AnalyzerOptions options;
    options.compute_distance = true;
    const Analyzer analyzer(ParseDataset(ReadFile(path)), options);
    const Verdict verdict = analyzer.Test();
    const double threshold = lp::kFeasibilityTolerance * lp::kFeasibilityTolerance;
    c.Check(verdict.distance.has_value(), name + " has no distance");
    const bool near = verdict.distance && *verdict.distance <= threshold;
    c.Check(near == verdict.admits, name + " verdict and distance disagree");
    if (!verdict.admits) {
      c.Check(FarkasHolds(analyzer.system(), verdict.farkas), name + " Farkas certificate");
      ++rejected;
    }
    ++datasets;
  }
  return c.Report(std::to_string(datasets) + " fixtures: verdict matches distance test, " +
                  std::to_string(rejected) + " rejection(s) with verified Farkas certificates");
}

bool Scaling() {
  Criterion c(9);
  const auto start = Clock::now();
  const ConstraintSystem system = BuildSystem(UniformComplete(5));
  const SystemStats stats = ComputeStats(system);
  const double seconds = Seconds(start);
  c.Check(seconds < 60.0, "n=5 build over 60 s");
  c.Check(stats.sparsity < 1e-4, "n=5 sparsity");
  const SystemStats six = CountCompleteSystem(6);
  char summary[240];
  std::snprintf(summary, sizeof summary,
                "n=5 build %zu x %zu, nnz %zu, sparsity %.3g (%.2f s); n=6 context %zu x %zu, nnz %zu",
                stats.rows, stats.cols, stats.nnz, stats.sparsity, seconds, six.rows, six.cols, six.nnz);
  return c.Report(summary);
}

}  // namespace
}  // namespace raum

int main() {
  using namespace raum;
  bool ok = true;
  for (bool (*criterion)() : {ConflictFixture, TwoOrderMixture, RationalInattention, ClosedFormIdentities,
                              SpanMonotonicity, SoundnessSweep, RevealedWorstBounds, VerdictChannels,
                              Scaling}) {
    try {
      ok = criterion() && ok;
    } catch (const std::exception& e) {
      std::printf("FAIL unexpected exception: %s\n", e.what());
      ok = false;
    }
  }
  return ok ? 0 : 1;
}
