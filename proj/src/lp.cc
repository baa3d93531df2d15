#include "raum/lp.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "raum/error.h"

namespace raum::lp {
namespace {

// Farkas acceptance after scaling y to unit max-norm.
constexpr double kFarkasColumnTolerance = 1e-9;
constexpr double kFarkasValueTolerance = 1e-7;
// Backend solutions may dip this far below zero before clamping.
constexpr double kClampTolerance = 1e-9;

const LpBackend& ResolveBackend(const SolveOptions& options,
                                std::unique_ptr<LpBackend>& owned) {
  if (options.backend != nullptr) return *options.backend;
  owned = DefaultBackend();
  return *owned;
}

LpResult Certify(const LinearSystem& system, BackendResult raw, const LpBackend& backend,
                 const SolveOptions& options) {
  LpResult result;
  result.iterations = raw.iterations;
  result.backend = std::string(backend.name());
  result.message = std::move(raw.message);
  switch (raw.status) {
    case Status::kFeasible: {
      if (raw.solution.size() != static_cast<std::size_t>(system.cols())) {
        result.status = Status::kNumericalFailure;
        result.message = "backend returned a solution of the wrong length";
        return result;
      }
      double most_negative = 0.0;
      for (double& x : raw.solution) {
        most_negative = std::min(most_negative, x);
        if (x < 0.0 && x >= -kClampTolerance) x = 0.0;
      }
      result.residual = Residual(system, raw.solution);
      if (most_negative < -kClampTolerance || !(result.residual <= options.feasibility_tolerance)) {
        result.status = Status::kNumericalFailure;
        result.message = "backend solution fails verification (residual " +
                         std::to_string(result.residual) + ", min entry " +
                         std::to_string(most_negative) + ")";
        return result;
      }
      result.status = Status::kFeasible;
      result.solution = std::move(raw.solution);
      return result;
    }
    case Status::kInfeasible: {
      const FarkasCheck check = VerifyFarkas(system, raw.farkas);
      if (!check.valid) {
        result.status = Status::kNumericalFailure;
        result.message = "infeasibility certificate failed verification (y'g = " +
                         std::to_string(check.value) + ", max y'G_j = " +
                         std::to_string(check.max_column) + ")";
        return result;
      }
      result.status = Status::kInfeasible;
      result.farkas = std::move(raw.farkas);
      return result;
    }
    case Status::kUnbounded:
    case Status::kNumericalFailure:
      result.status = raw.status;
      return result;
  }
  return result;
}

}  // namespace

std::string_view ToString(Status status) {
  switch (status) {
    case Status::kFeasible: return "feasible";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

std::unique_ptr<LpBackend> MakeBackend(std::string_view name) {
  if (name == "revised") return MakeRevisedSimplex();
  if (name == "dense") return MakeDenseSimplex();
  throw RaumError(ErrorCode::kInvalidArgument, "unknown LP backend: " + std::string(name));
}

std::unique_ptr<LpBackend> DefaultBackend() {
  const char* env = std::getenv("RAUM_SOLVER");
  if (env == nullptr || *env == '\0') return MakeRevisedSimplex();
  return MakeBackend(env);
}

double Residual(const LinearSystem& system, std::span<const double> v) {
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXd r = system.matrix * x - system.rhs;
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

FarkasCheck VerifyFarkas(const LinearSystem& system, std::span<const double> y) {
  FarkasCheck check;
  if (y.size() != static_cast<std::size_t>(system.rows()) || y.empty()) return check;
  Eigen::VectorXd scaled = Eigen::Map<const Eigen::VectorXd>(y.data(), system.rows());
  const double norm = scaled.cwiseAbs().maxCoeff();
  if (!(norm > 0.0) || !std::isfinite(norm)) return check;
  scaled /= norm;
  const Eigen::VectorXd columns = system.matrix.transpose() * scaled;
  check.value = scaled.dot(system.rhs);
  check.max_column = columns.size() == 0 ? 0.0 : columns.maxCoeff();
  check.valid = check.max_column <= kFarkasColumnTolerance && check.value >= kFarkasValueTolerance;
  return check;
}

double DistanceLowerBound(const LinearSystem& system, std::span<const double> y) {
  const FarkasCheck check = VerifyFarkas(system, y);
  if (check.value <= 0.0 || check.max_column > kFarkasColumnTolerance) return 0.0;
  const Eigen::Map<const Eigen::VectorXd> yy(y.data(), system.rows());
  const double value = yy.dot(system.rhs);
  return value * value / yy.squaredNorm();
}

LpResult SolveFeasibility(const LinearSystem& system, const SolveOptions& options) {
  std::unique_ptr<LpBackend> owned;
  const LpBackend& backend = ResolveBackend(options, owned);
  return Certify(system, backend.Minimize(system, {}), backend, options);
}

LpResult SolveLinear(const LinearSystem& system, std::span<const double> objective, Sense sense,
                     const SolveOptions& options) {
  if (objective.size() != static_cast<std::size_t>(system.cols())) {
    throw RaumError(ErrorCode::kInvalidArgument, "objective length does not match system");
  }
  std::unique_ptr<LpBackend> owned;
  const LpBackend& backend = ResolveBackend(options, owned);
  std::vector<double> cost(objective.begin(), objective.end());
  if (sense == Sense::kMaximize) {
    for (double& c : cost) c = -c;
  }
  LpResult result = Certify(system, backend.Minimize(system, cost), backend, options);
  if (result.status == Status::kFeasible) {
    double value = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) value += objective[j] * result.solution[j];
    result.objective = value;
  }
  return result;
}

}  // namespace raum::lp
