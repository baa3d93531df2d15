// Optimization primitives over the polytope {v >= 0 : G v = g}: feasibility
// with certificates, linear objectives, and the squared Euclidean projection
// distance min_{v >= 0} |g - G v|^2.
//
// Backends implement the raw simplex; the free functions here certify what
// the backend reports. "feasible" requires a nonnegative v with max-norm
// residual within the feasibility tolerance, and "infeasible" requires a
// Farkas vector y with y'G <= 0 and y'g > 0 that re-verifies by direct
// multiplication. Anything else is reported as a numerical failure.

#ifndef RAUM_LP_H_
#define RAUM_LP_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace raum::lp {

inline constexpr double kFeasibilityTolerance = 1e-7;
inline constexpr double kOptimalityTolerance = 1e-8;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Equality system G v = g over v >= 0, column-major.
struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

enum class Status { kFeasible, kInfeasible, kUnbounded, kNumericalFailure };
std::string_view ToString(Status status);

enum class Sense { kMinimize, kMaximize };

// What a backend found, before certification.
struct BackendResult {
  Status status = Status::kNumericalFailure;
  std::vector<double> solution;
  // Phase-one duals when status is kInfeasible.
  std::vector<double> farkas;
  std::int64_t iterations = 0;
  std::string message;
};

class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual std::string_view name() const = 0;
  // Minimizes objective'v over {v >= 0 : G v = g}. An empty objective asks
  // for any feasible point.
  virtual BackendResult Minimize(const LinearSystem& system,
                                 std::span<const double> objective) const = 0;
};

// Sparse revised simplex with LU refactorization; the default. A positive
// `max_iterations` replaces the size-based cap; hitting the cap reports
// kNumericalFailure.
std::unique_ptr<LpBackend> MakeRevisedSimplex(std::int64_t max_iterations = 0);
// Dense tableau simplex with Bland's rule. Reference oracle for cross-checks
// on systems with fewer than 10^4 columns.
std::unique_ptr<LpBackend> MakeDenseSimplex();
// "revised" or "dense"; throws RaumError(kInvalidArgument) otherwise.
std::unique_ptr<LpBackend> MakeBackend(std::string_view name);
// Backend named by the RAUM_SOLVER environment variable, "revised" if unset.
std::unique_ptr<LpBackend> DefaultBackend();

struct SolveOptions {
  // Not owned; DefaultBackend() when null.
  const LpBackend* backend = nullptr;
  double feasibility_tolerance = kFeasibilityTolerance;
};

struct LpResult {
  Status status = Status::kNumericalFailure;
  std::vector<double> solution;
  double objective = 0.0;
  // max |G v - g| for the returned solution.
  double residual = 0.0;
  std::vector<double> farkas;
  std::int64_t iterations = 0;
  std::string backend;
  std::string message;
};

LpResult SolveFeasibility(const LinearSystem& system, const SolveOptions& options = {});

// Optimizes objective'v; `objective` is dense over the columns.
LpResult SolveLinear(const LinearSystem& system, std::span<const double> objective,
                     Sense sense, const SolveOptions& options = {});

double Residual(const LinearSystem& system, std::span<const double> v);

struct FarkasCheck {
  bool valid = false;
  // y'g and max_j (y'G)_j after scaling y to unit max-norm.
  double value = 0.0;
  double max_column = 0.0;
};

// Re-verifies y'G <= 0 and y'g > 0 by direct multiplication.
FarkasCheck VerifyFarkas(const LinearSystem& system, std::span<const double> y);

struct Projection {
  // kFeasible when the active-set iteration converged.
  Status status = Status::kNumericalFailure;
  double distance = 0.0;
  std::vector<double> solution;
  std::int64_t iterations = 0;
};

// min over v >= 0 of |g - G v|_2^2 by the Lawson-Hanson active-set method.
Projection ProjectionDistance(const LinearSystem& system);

// Lower bound (y'g)^2 / |y|^2 on the projection distance implied by a vector
// with y'G <= 0; zero when y'g <= 0.
double DistanceLowerBound(const LinearSystem& system, std::span<const double> y);

}  // namespace raum::lp

#endif  // RAUM_LP_H_
