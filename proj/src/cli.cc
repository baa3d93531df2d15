#include "raum/cli.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "raum/analysis.h"
#include "raum/constraints.h"
#include "raum/error.h"
#include "raum/io.h"
#include "raum/lp.h"
#include "raum/models.h"

namespace raum {
namespace {

// Collected by the subcommand before it runs.
struct CommonInput {
  std::string dataset_path;
  std::string orders_path;
  std::string mode = "reduced";
  std::string report_path;
  std::int64_t max_iterations = 0;
};

class ReportBuilder {
 public:
  ReportBuilder(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    report_["schema_version"] = kReportSchemaVersion;
    report_["tool"] = "raum";
    report_["version"] = kToolVersion;
    report_["command"] = std::move(command);
    report_["args"] = args;
    report_["input"] = Json::object();
    report_["result"] = Json::object();
    report_["diagnostics"] = Json::object();
  }

  Json& input() { return report_["input"]; }
  Json& result() { return report_["result"]; }
  Json& diagnostics() { return report_["diagnostics"]; }

  std::string Finish() {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    report_["wall_time_seconds"] = elapsed.count();
    return report_.dump(2) + "\n";
  }

 private:
  Json report_;
  std::chrono::steady_clock::time_point start_;
};

struct LoadedInput {
  ChoiceDataset dataset;
  std::optional<std::vector<PreferenceOrder>> orders;
};

LoadedInput Load(const CommonInput& common, ReportBuilder& report) {
  const std::string text = ReadFile(common.dataset_path);
  report.input()["dataset"] = common.dataset_path;
  report.input()["dataset_sha256"] = Sha256Hex(text);
  LoadedInput loaded{ParseDataset(text), std::nullopt};
  if (!common.orders_path.empty()) {
    const std::string orders_text = ReadFile(common.orders_path);
    report.input()["orders"] = common.orders_path;
    report.input()["orders_sha256"] = Sha256Hex(orders_text);
    loaded.orders = ParseOrders(orders_text, loaded.dataset.universe());
  }
  return loaded;
}

// `backend` keeps a capped solver alive when --max-iterations is given.
AnalyzerOptions MakeOptions(const CommonInput& common, const LoadedInput& loaded,
                            std::unique_ptr<lp::LpBackend>& backend) {
  AnalyzerOptions options;
  options.mode = ParseAssemblyMode(common.mode);
  options.orders = loaded.orders;
  if (common.max_iterations > 0) {
    backend = lp::MakeRevisedSimplex(common.max_iterations);
    options.backend = backend.get();
  }
  return options;
}

Json BoundToJson(const Bound& bound) {
  return Json{{"lo", bound.lo}, {"hi", bound.hi}};
}

Json VerdictToJson(const Verdict& verdict, const Analyzer& analyzer) {
  Json result;
  result["admits"] = verdict.admits;
  result["stability"] = verdict.relaxation.stability;
  result["monotonicity"] = verdict.relaxation.monotonicity;
  result["mode"] = std::string(ToString(analyzer.system().layout().mode()));
  if (verdict.certificate) {
    result["certificate"] = RuleToJson(*verdict.certificate, 1e-12);
  } else {
    Json farkas = Json::array();
    for (std::size_t i = 0; i < verdict.farkas.size(); ++i) {
      if (verdict.farkas[i] != 0.0) farkas.push_back(Json{{"row", i}, {"value", verdict.farkas[i]}});
    }
    result["farkas"] = farkas;
  }
  return result;
}

// Runs `task(i)` for i in [0, count) on up to `jobs` threads; rethrows the
// first failure.
void ParallelFor(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& thread : threads) thread.join();
  if (failure) std::rethrow_exception(failure);
}

// Exit code of a dataset that must admit a representation before bounds
// are meaningful; records the verdict in the report.
std::optional<int> RequireAdmits(const Analyzer& analyzer, ReportBuilder& report) {
  const Verdict verdict = analyzer.Test();
  report.result()["admits"] = verdict.admits;
  report.diagnostics()["rows"] = verdict.rows;
  report.diagnostics()["cols"] = verdict.cols;
  if (!verdict.admits) return kExitRejects;
  return std::nullopt;
}

std::vector<double> ParseNumberList(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw RaumError(ErrorCode::kInput, "not a number list: '" + text + "'");
    }
  }
  return values;
}

double ParseExtendedDouble(const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  const std::vector<double> values = ParseNumberList(text);
  if (values.size() != 1) throw RaumError(ErrorCode::kInput, "expected one number: '" + text + "'");
  return values[0];
}

// ---------------------------------------------------------------------------
// Commands. Each returns the exit code and fills the report.

struct TestArgs {
  bool no_stability = false;
  bool no_monotonicity = false;
  bool distance = false;
};

int RunTest(const CommonInput& common, const TestArgs& args, ReportBuilder& report) {
  const LoadedInput loaded = Load(common, report);
  std::unique_ptr<lp::LpBackend> backend;
  AnalyzerOptions options = MakeOptions(common, loaded, backend);
  options.compute_distance = args.distance;
  const Analyzer analyzer(loaded.dataset, options);
  const Verdict verdict =
      analyzer.Test(Relaxation{.stability = !args.no_stability, .monotonicity = !args.no_monotonicity});
  report.result() = VerdictToJson(verdict, analyzer);
  Json& diagnostics = report.diagnostics();
  diagnostics["backend"] =
      std::string(backend ? backend->name() : lp::DefaultBackend()->name());
  diagnostics["residual"] = verdict.residual;
  diagnostics["distance"] = verdict.distance ? Json(*verdict.distance) : Json(nullptr);
  diagnostics["iterations"] = verdict.iterations;
  diagnostics["rows"] = verdict.rows;
  diagnostics["cols"] = verdict.cols;
  return verdict.admits ? kExitAdmits : kExitRejects;
}

struct BoundsArgs {
  std::vector<std::string> orders;
  bool all_orders = false;
  std::string menu;
  unsigned jobs = 1;
};

int RunBounds(const CommonInput& common, const BoundsArgs& args, ReportBuilder& report) {
  const LoadedInput loaded = Load(common, report);
  const Universe& universe = loaded.dataset.universe();
  std::vector<PreferenceOrder> targets;
  if (args.all_orders) {
    targets = EnumerateOrders(universe);
  } else {
    for (const std::string& text : args.orders) targets.push_back(PreferenceOrder::Parse(text, universe));
  }
  if (targets.empty()) throw RaumError(ErrorCode::kInput, "give --order or --all-orders");
  std::optional<Subset> menu;
  if (!args.menu.empty()) menu = universe.ParseSet(args.menu);

  std::unique_ptr<lp::LpBackend> backend;
  const Analyzer analyzer(loaded.dataset, MakeOptions(common, loaded, backend));
  if (auto code = RequireAdmits(analyzer, report)) return *code;

  std::vector<std::optional<Bound>> bounds(targets.size());
  ParallelFor(targets.size(), args.jobs,
              [&](std::size_t i) { bounds[i].emplace(analyzer.PreferenceBounds(targets[i], menu)); });
  Json rows = Json::array();
  std::int64_t iterations = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Json row{{"order", targets[i].Format(universe)}};
    row.update(BoundToJson(*bounds[i]));
    rows.push_back(row);
    iterations += bounds[i]->iterations;
  }
  report.result()["menu"] = universe.Format(menu.value_or(universe.grand()));
  report.result()["bounds"] = rows;
  report.diagnostics()["iterations"] = iterations;
  return kExitAdmits;
}

struct PredictArgs {
  std::string menu;
  std::string alternative;
};

int RunPredict(const CommonInput& common, const PredictArgs& args, ReportBuilder& report) {
  const LoadedInput loaded = Load(common, report);
  const Universe& universe = loaded.dataset.universe();
  const Subset target = universe.ParseSet(args.menu);
  std::vector<int> alternatives;
  if (args.alternative.empty()) {
    alternatives = target.members();
  } else {
    const auto index = universe.IndexOf(args.alternative);
    if (!index) throw RaumError(ErrorCode::kInput, "unknown alternative '" + args.alternative + "'");
    alternatives.push_back(*index);
  }
  std::unique_ptr<lp::LpBackend> backend;
  const Analyzer analyzer(loaded.dataset, MakeOptions(common, loaded, backend));
  if (auto code = RequireAdmits(analyzer, report)) return *code;
  Json rows = Json::array();
  std::int64_t iterations = 0;
  for (int a : alternatives) {
    const Bound bound = analyzer.PredictBounds(target, a);
    Json row{{"alternative", universe.label(a)}};
    row.update(BoundToJson(bound));
    rows.push_back(row);
    iterations += bound.iterations;
  }
  report.result()["menu"] = universe.Format(target);
  report.result()["predictions"] = rows;
  report.diagnostics()["iterations"] = iterations;
  return kExitAdmits;
}

struct WelfareArgs {
  std::vector<std::string> menus;
  std::string formula = "strict";
};

int RunWelfare(const CommonInput& common, const WelfareArgs& args, ReportBuilder& report) {
  const LoadedInput loaded = Load(common, report);
  const Universe& universe = loaded.dataset.universe();
  WelfareFormula formula = WelfareFormula::kStrict;
  if (args.formula == "literal") {
    formula = WelfareFormula::kLiteral;
  } else if (args.formula != "strict") {
    throw RaumError(ErrorCode::kInput, "unknown welfare formula '" + args.formula + "'");
  }
  std::vector<Subset> menus;
  for (const std::string& text : args.menus) menus.push_back(universe.ParseSet(text));
  if (menus.empty()) menus = loaded.dataset.menus();
  for (Subset menu : menus) {
    if (!loaded.dataset.MenuIndex(menu)) {
      throw RaumError(ErrorCode::kInput, "welfare menu " + universe.Format(menu) + " is not observed");
    }
  }
  std::unique_ptr<lp::LpBackend> backend;
  const Analyzer analyzer(loaded.dataset, MakeOptions(common, loaded, backend));
  if (auto code = RequireAdmits(analyzer, report)) return *code;
  Json rows = Json::array();
  for (Subset menu : menus) {
    Json row{{"menu", universe.Format(menu)}};
    row.update(BoundToJson(analyzer.WelfareBounds(menu, formula)));
    rows.push_back(row);
  }
  report.result()["formula"] = args.formula;
  report.result()["welfare"] = rows;
  report.result()["total"] = BoundToJson(analyzer.TotalWelfareBounds(formula));
  return kExitAdmits;
}

struct SimulateArgs {
  std::string model;
  int n = 3;
  std::string mu = "0.5,0.3,0.2";
  double delta = 3.0;
  std::string utilities;
  std::string span = "grand";
  std::string threshold = "0.5";
  std::size_t draws = 100000;
  std::uint64_t seed = 42;
  std::string output;
  std::string rule_output;
};

int RunSimulate(const SimulateArgs& args, ReportBuilder& report) {
  Json params{{"model", args.model}, {"seed", args.seed}};
  std::optional<RaumRule> rule;
  std::optional<ChoiceDataset> dataset;
  std::mt19937_64 rng(args.seed);
  const Universe universe = Universe::Letters(args.model == "ri" ? 3 : args.n);

  if (args.model == "ri") {
    const std::vector<double> mu = ParseNumberList(args.mu);
    if (mu.size() != 3) throw RaumError(ErrorCode::kInput, "--mu needs three numbers");
    const RiParams ri({mu[0], mu[1], mu[2]}, args.delta);
    dataset.emplace(GenerateRationalInattention(ri));
    params["mu"] = mu;
    params["delta"] = args.delta;
    params["thresholds"] = ri.thresholds();
    if (args.delta > ri.thresholds()[0]) params["stable_marginal"] = RiStableMarginal(ri);
  } else if (args.model == "rum") {
    std::vector<double> utilities(universe.size(), 0.0);
    if (!args.utilities.empty()) utilities = ParseNumberList(args.utilities);
    if (static_cast<int>(utilities.size()) != universe.size()) {
      throw RaumError(ErrorCode::kInput, "--utilities needs one number per alternative");
    }
    rule.emplace(GenerateRum(universe, LogitMarginal(utilities)));
    params["utilities"] = utilities;
  } else if (args.model == "ram") {
    const OrderDistribution marginal = RandomMarginal(universe.size(), rng);
    std::vector<AttentionRule> attention;
    for (std::size_t r = 0; r < marginal.size(); ++r) {
      attention.push_back(RandomMonotoneAttention(universe.size(), rng));
    }
    rule.emplace(GenerateMixture(universe, marginal, attention));
  } else if (args.model == "attention") {
    SpanMode mode = SpanMode::kGrand;
    if (args.span == "menu") {
      mode = SpanMode::kMenu;
    } else if (args.span != "grand") {
      throw RaumError(ErrorCode::kInput, "--span must be grand or menu");
    }
    std::uniform_int_distribution<int> weight(1, 9);
    std::vector<std::vector<double>> eta(universe.num_orders(), std::vector<double>(universe.num_sets()));
    for (auto& table : eta) {
      for (double& value : table) value = weight(rng);
    }
    const AttentionIndex index(universe, eta, mode);
    rule.emplace(GenerateAttentionIndexRule(index, RandomMarginal(universe.size(), rng)));
    params["span"] = args.span;
  } else if (args.model == "satisficing") {
    SatisficingParams satisficing;
    satisficing.sampler = UniformSearchSampler();
    satisficing.threshold = ParseExtendedDouble(args.threshold);
    satisficing.draws = args.draws;
    satisficing.seed = args.seed;
    rule.emplace(GenerateSatisficingRule(universe, satisficing));
    params["threshold"] = args.threshold;
    params["draws"] = args.draws;
  } else {
    throw RaumError(ErrorCode::kInput, "unknown model '" + args.model + "'");
  }
  if (rule) {
    params["n"] = universe.size();
    dataset.emplace(InducedDataset(*rule));
  }
  const Json dataset_json = DatasetToJson(*dataset);
  if (!args.output.empty()) WriteFile(args.output, dataset_json.dump(2) + "\n");
  if (!args.rule_output.empty()) {
    if (!rule) throw RaumError(ErrorCode::kInput, "the ri model produces a dataset, not a rule");
    WriteFile(args.rule_output, RuleToJson(*rule).dump(2) + "\n");
  }
  report.result()["params"] = params;
  report.result()["dataset"] = dataset_json;
  return kExitAdmits;
}

struct MatrixArgs {
  int n = 0;
  bool stats = false;
  std::string export_path;
  bool no_stability = false;
  bool no_monotonicity = false;
};

Json StatsToJson(const SystemStats& stats) {
  return Json{{"rows", stats.rows},
              {"cols", stats.cols},
              {"nnz", stats.nnz},
              {"sparsity", stats.sparsity},
              {"blocks",
               {{"data_fit", stats.blocks.data_fit},
                {"normalization", stats.blocks.normalization},
                {"feasibility", stats.blocks.feasibility},
                {"stability", stats.blocks.stability},
                {"monotonicity", stats.blocks.monotonicity}}}};
}

ChoiceDataset UniformCompleteDataset(int n) {
  const Universe universe = Universe::Letters(n);
  std::vector<Subset> menus = EnumerateSets(universe);
  std::vector<std::vector<double>> probs;
  for (Subset menu : menus) {
    std::vector<double> row(n, 0.0);
    for (int a : menu.members()) row[a] = 1.0 / menu.size();
    probs.push_back(std::move(row));
  }
  return ChoiceDataset(universe, std::move(menus), std::move(probs));
}

int RunMatrix(const CommonInput& common, const MatrixArgs& args, ReportBuilder& report) {
  AssemblyOptions assembly;
  assembly.mode = ParseAssemblyMode(common.mode);
  assembly.stability = !args.no_stability;
  assembly.monotonicity = !args.no_monotonicity;
  if (common.dataset_path.empty() == (args.n == 0)) {
    throw RaumError(ErrorCode::kInput, "give either a dataset or --n");
  }
  report.result()["mode"] = common.mode;
  if (args.n != 0 && args.export_path.empty()) {
    if (args.n < kMinAlternatives || args.n > kMaxAlternatives) {
      throw RaumError(ErrorCode::kInput, "--n out of range");
    }
    report.result()["n"] = args.n;
    report.result()["stats"] = StatsToJson(CountCompleteSystem(args.n, assembly));
    return kExitAdmits;
  }
  std::optional<ChoiceDataset> dataset;
  if (args.n != 0) {
    report.result()["n"] = args.n;
    dataset.emplace(UniformCompleteDataset(args.n));
  } else {
    LoadedInput loaded = Load(common, report);
    if (loaded.orders) {
      std::vector<std::uint64_t> ranks;
      for (const PreferenceOrder& order : *loaded.orders) ranks.push_back(order.rank());
      assembly.orders = std::move(ranks);
    }
    dataset.emplace(std::move(loaded.dataset));
  }
  const ConstraintSystem system = BuildSystem(*dataset, assembly);
  report.result()["stats"] = StatsToJson(ComputeStats(system));
  if (!args.export_path.empty()) {
    std::ostringstream exported;
    ExportSystem(system, exported);
    WriteFile(args.export_path, exported.str());
    report.result()["export"] = args.export_path;
  }
  return kExitAdmits;
}

void AddCommon(CLI::App* command, CommonInput& common, bool dataset_required) {
  auto* dataset = command->add_option("dataset", common.dataset_path, "Dataset JSON file");
  if (dataset_required) dataset->required();
  command->add_option("--orders-file", common.orders_path, "Admissible orders, one per line");
  command->add_option("--mode", common.mode, "Assembly mode")
      ->check(CLI::IsMember({"reduced", "full"}));
  command->add_option("--report", common.report_path, "Also write the JSON report here");
  command->add_option("--max-iterations", common.max_iterations, "Simplex iteration cap per solve")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tests choice datasets for random attention and utility representations"};
  app.name("raum");
  app.require_subcommand(1);

  CommonInput common;
  TestArgs test_args;
  BoundsArgs bounds_args;
  PredictArgs predict_args;
  WelfareArgs welfare_args;
  SimulateArgs simulate_args;
  MatrixArgs matrix_args;

  auto* test = app.add_subcommand("test", "Test for a representation");
  AddCommon(test, common, true);
  test->add_flag("--no-stability", test_args.no_stability, "Drop the stability rows");
  test->add_flag("--no-monotonicity", test_args.no_monotonicity, "Drop the monotonicity rows");
  test->add_flag("--distance", test_args.distance, "Also compute the projection distance");

  auto* bounds = app.add_subcommand("bounds", "Bounds on preference marginals");
  AddCommon(bounds, common, true);
  auto* order_option = bounds->add_option("--order", bounds_args.orders, "Order such as a>b>c");
  auto* all_option = bounds->add_flag("--all-orders", bounds_args.all_orders, "Every order");
  order_option->excludes(all_option);
  bounds->add_option("--menu", bounds_args.menu, "Menu at which to read the marginal");
  bounds->add_option("--jobs", bounds_args.jobs, "Parallel solves")->check(CLI::PositiveNumber);

  auto* predict = app.add_subcommand("predict", "Bounds on choice probabilities at a menu");
  AddCommon(predict, common, true);
  predict->add_option("--menu", predict_args.menu, "Target menu such as a,b")->required();
  predict->add_option("--alternative", predict_args.alternative, "Alternative (all when omitted)");

  auto* welfare = app.add_subcommand("welfare", "Bounds on welfare losses from limited attention");
  AddCommon(welfare, common, true);
  welfare->add_option("--menu", welfare_args.menus, "Observed menu (all when omitted)");
  welfare->add_option("--formula", welfare_args.formula, "strict or literal");

  auto* simulate = app.add_subcommand("simulate", "Generate a dataset from a model");
  simulate->add_option("--model", simulate_args.model, "ri, rum, ram, attention, or satisficing")
      ->required();
  simulate->add_option("--n", simulate_args.n, "Number of alternatives")->check(CLI::Range(2, 8));
  simulate->add_option("--mu", simulate_args.mu, "Prior over a,b,c (ri)");
  simulate->add_option("--delta", simulate_args.delta, "Net payoff (ri)");
  simulate->add_option("--utilities", simulate_args.utilities, "Logit utilities (rum)");
  simulate->add_option("--span", simulate_args.span, "grand or menu (attention)");
  simulate->add_option("--threshold", simulate_args.threshold, "Satisficing threshold; inf allowed");
  simulate->add_option("--draws", simulate_args.draws, "Monte Carlo draws (satisficing)");
  simulate->add_option("--seed", simulate_args.seed, "Random seed");
  simulate->add_option("--output", simulate_args.output, "Write the dataset file here");
  simulate->add_option("--rule-output", simulate_args.rule_output, "Write the generating rule here");
  simulate->add_option("--report", common.report_path, "Also write the JSON report here");

  auto* matrix = app.add_subcommand("matrix", "Assemble the constraint system");
  AddCommon(matrix, common, false);
  matrix->add_option("--n", matrix_args.n, "Complete uniform dataset on n alternatives");
  matrix->add_flag("--stats", matrix_args.stats, "Report dimensions (always included)");
  matrix->add_option("--export", matrix_args.export_path, "Write triplets and right-hand side");
  matrix->add_flag("--no-stability", matrix_args.no_stability, "Drop the stability rows");
  matrix->add_flag("--no-monotonicity", matrix_args.no_monotonicity, "Drop the monotonicity rows");

  std::vector<const char*> argv{"raum"};
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitInputError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  ReportBuilder report(chosen->get_name(), args);
  int code = kExitAdmits;
  try {
    if (chosen == test) {
      code = RunTest(common, test_args, report);
    } else if (chosen == bounds) {
      code = RunBounds(common, bounds_args, report);
    } else if (chosen == predict) {
      code = RunPredict(common, predict_args, report);
    } else if (chosen == welfare) {
      code = RunWelfare(common, welfare_args, report);
    } else if (chosen == simulate) {
      code = RunSimulate(simulate_args, report);
    } else {
      code = RunMatrix(common, matrix_args, report);
    }
  } catch (const RaumError& e) {
    err << "raum " << chosen->get_name() << ": " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kNoRepresentation:
        code = kExitRejects;
        break;
      case ErrorCode::kNumerical:
        return kExitNumerical;
      default:
        return kExitInputError;
    }
  }
  const std::string text = report.Finish();
  out << text;
  if (!common.report_path.empty()) {
    try {
      WriteFile(common.report_path, text);
    } catch (const RaumError& e) {
      err << "raum: " << e.what() << "\n";
      return kExitInputError;
    }
  }
  return code;
}

}  // namespace raum
