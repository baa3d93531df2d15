// Two-phase revised simplex over {x >= 0 : A x = b}.
//
// Rows are sign-flipped so b >= 0. The starting basis takes, per row, a
// singleton structural column with a positive entry (or any sign when
// b_i = 0) and an artificial otherwise. Artificials leave and never re-enter.
// The basis inverse is an LU factorization of the last refactored basis
// followed by a product-form eta file. Pricing is Dantzig's rule scaled by
// column norm, falling back to Bland's rule after a run of degenerate
// pivots; the ratio test is Harris' two-pass test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "raum/lp.h"

namespace raum::lp {
namespace {

constexpr double kPivotTolerance = 1e-7;
constexpr double kHarrisTolerance = 1e-9;
constexpr double kPhaseOneTolerance = 1e-9;
// Phase one prices tighter so its duals certify infeasibility.
constexpr double kPhaseOneCostTolerance = 1e-11;
constexpr int kRefactorInterval = 100;
constexpr int kDegenerateRunBeforeBland = 100;

struct Eta {
  Eigen::Index row;
  double pivot;
  std::vector<std::pair<Eigen::Index, double>> entries;  // excludes `row`
};

class Solver {
 public:
  Solver(const LinearSystem& system, std::span<const double> objective,
         std::int64_t max_iterations)
      : m_(system.rows()), n_(system.cols()), objective_(objective) {
    sign_.assign(m_, 1.0);
    b_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (system.rhs[i] < 0.0) sign_[i] = -1.0;
      b_[i] = sign_[i] * system.rhs[i];
    }
    a_ = system.matrix;
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (SparseMatrix::InnerIterator it(a_, j); it; ++it) it.valueRef() *= sign_[it.row()];
    }
    a_.makeCompressed();
    column_norm_.resize(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double norm = a_.col(j).norm();
      column_norm_[j] = norm > 0.0 ? norm : 1.0;
    }
    max_iterations_ = max_iterations > 0 ? max_iterations : 50 * (m_ + n_) + 1000;
  }

  BackendResult Run() {
    BackendResult result;
    Crash();
    if (!Refactor()) return Failure(result, "singular starting basis");

    // Phase one.
    cost_.assign(n_ + num_artificials(), 0.0);
    for (Eigen::Index k = 0; k < num_artificials(); ++k) cost_[n_ + k] = 1.0;
    Outcome outcome = Optimize(/*phase_one=*/true);
    result.iterations = iterations_;
    if (outcome == Outcome::kFailure) return Failure(result, message_);
    if (PhaseOneInfeasibility() > kPhaseOneTolerance) {
      Eigen::VectorXd y = Duals();
      result.status = Status::kInfeasible;
      result.farkas.resize(m_);
      for (Eigen::Index i = 0; i < m_; ++i) result.farkas[i] = sign_[i] * y[i];
      result.message = "phase one optimum " + std::to_string(PhaseOneInfeasibility());
      return result;
    }

    // Phase two.
    if (!objective_.empty()) {
      std::fill(cost_.begin(), cost_.end(), 0.0);
      for (Eigen::Index j = 0; j < n_; ++j) cost_[j] = objective_[j];
      outcome = Optimize(/*phase_one=*/false);
      result.iterations = iterations_;
      if (outcome == Outcome::kFailure) return Failure(result, message_);
      if (outcome == Outcome::kUnbounded) {
        result.status = Status::kUnbounded;
        return result;
      }
    }
    if (!Refactor()) return Failure(result, "singular final basis");
    result.solution.assign(n_, 0.0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) result.solution[basis_[i]] = std::max(x_[i], 0.0);
    }
    result.status = Status::kFeasible;
    return result;
  }

 private:
  enum class Outcome { kOptimal, kUnbounded, kFailure };

  Eigen::Index num_artificials() const { return static_cast<Eigen::Index>(artificial_row_.size()); }
  bool IsArtificial(Eigen::Index var) const { return var >= n_; }

  BackendResult& Failure(BackendResult& result, const std::string& message) {
    result.status = Status::kNumericalFailure;
    result.iterations = iterations_;
    result.message = message;
    return result;
  }

  void Crash() {
    basis_.assign(m_, -1);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (a_.col(j).nonZeros() != 1) continue;
      SparseMatrix::InnerIterator it(a_, j);
      const Eigen::Index i = it.row();
      if (basis_[i] >= 0) continue;
      if (it.value() > 0.0 || b_[i] == 0.0) basis_[i] = j;
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] >= 0) continue;
      basis_[i] = n_ + num_artificials();
      artificial_row_.push_back(i);
    }
    position_.assign(n_ + num_artificials(), -1);
    for (Eigen::Index i = 0; i < m_; ++i) position_[basis_[i]] = i;
  }

  // Scatters column `var` into `out` (dense, length m).
  void LoadColumn(Eigen::Index var, Eigen::VectorXd& out) const {
    out.setZero(m_);
    if (IsArtificial(var)) {
      out[artificial_row_[var - n_]] = 1.0;
      return;
    }
    for (SparseMatrix::InnerIterator it(a_, var); it; ++it) out[it.row()] = it.value();
  }

  bool Refactor() {
    std::vector<Eigen::Triplet<double, int>> triplets;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index var = basis_[i];
      if (IsArtificial(var)) {
        triplets.emplace_back(static_cast<int>(artificial_row_[var - n_]), static_cast<int>(i), 1.0);
      } else {
        for (SparseMatrix::InnerIterator it(a_, var); it; ++it) {
          triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(i), it.value());
        }
      }
    }
    SparseMatrix basis_matrix(m_, m_);
    basis_matrix.setFromTriplets(triplets.begin(), triplets.end());
    basis_matrix.makeCompressed();
    lu_.analyzePattern(basis_matrix);
    lu_.factorize(basis_matrix);
    if (lu_.info() != Eigen::Success) {
      message_ = "basis factorization failed";
      return false;
    }
    etas_.clear();
    x_ = lu_.solve(b_);
    if (!x_.allFinite()) {
      message_ = "basis solve produced non-finite values";
      return false;
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (x_[i] < 0.0 && x_[i] > -kHarrisTolerance) x_[i] = 0.0;
    }
    return true;
  }

  void Ftran(Eigen::VectorXd& v) const {
    v = lu_.solve(v).eval();
    for (const Eta& eta : etas_) {
      const double xr = v[eta.row] / eta.pivot;
      if (xr != 0.0) {
        for (const auto& [i, a] : eta.entries) v[i] -= a * xr;
      }
      v[eta.row] = xr;
    }
  }

  void Btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double sum = v[it->row];
      for (const auto& [i, a] : it->entries) sum -= a * v[i];
      v[it->row] = sum / it->pivot;
    }
    v = lu_.transpose().solve(v).eval();
  }

  Eigen::VectorXd Duals() const {
    Eigen::VectorXd y(m_);
    for (Eigen::Index i = 0; i < m_; ++i) y[i] = cost_[basis_[i]];
    Btran(y);
    return y;
  }

  double PhaseOneInfeasibility() const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (IsArtificial(basis_[i])) sum += std::max(x_[i], 0.0);
    }
    return sum;
  }

  double ReducedCost(Eigen::Index j, const Eigen::VectorXd& y) const {
    double d = cost_[j];
    for (SparseMatrix::InnerIterator it(a_, j); it; ++it) d -= it.value() * y[it.row()];
    return d;
  }

  // Entering structural column, or -1 when the basis is optimal.
  Eigen::Index Price(const Eigen::VectorXd& y, double tolerance, bool bland) const {
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (position_[j] >= 0) continue;
      const double d = ReducedCost(j, y);
      if (d >= -tolerance) continue;
      if (bland) return j;
      const double score = -d / column_norm_[j];
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  // Leaving basis position for entering direction alpha, or -1 if unbounded.
  Eigen::Index RatioTest(const Eigen::VectorXd& alpha, bool phase_one, bool bland) const {
    if (!phase_one) {
      // Artificials still basic sit at zero and must stay there.
      Eigen::Index blocking = -1;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (IsArtificial(basis_[i]) && std::abs(alpha[i]) > kPivotTolerance &&
            (blocking < 0 || std::abs(alpha[i]) > std::abs(alpha[blocking]))) {
          blocking = i;
        }
      }
      if (blocking >= 0) return blocking;
    }
    double bound = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (alpha[i] > kPivotTolerance) bound = std::min(bound, (x_[i] + kHarrisTolerance) / alpha[i]);
    }
    if (!std::isfinite(bound)) return -1;
    Eigen::Index leaving = -1;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (alpha[i] <= kPivotTolerance || x_[i] / alpha[i] > bound) continue;
      if (leaving < 0) {
        leaving = i;
      } else if (bland) {
        if (basis_[i] < basis_[leaving]) leaving = i;
      } else if (alpha[i] > alpha[leaving]) {
        leaving = i;
      }
    }
    return leaving;
  }

  void Pivot(Eigen::Index entering, Eigen::Index r, const Eigen::VectorXd& alpha) {
    const double theta = std::max(x_[r] / alpha[r], 0.0);
    Eta eta{r, alpha[r], {}};
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      eta.entries.emplace_back(i, alpha[i]);
      x_[i] -= theta * alpha[i];
      if (x_[i] < 0.0) x_[i] = 0.0;
    }
    x_[r] = theta;
    const Eigen::Index leaving = basis_[r];
    position_[leaving] = -1;
    basis_[r] = entering;
    position_[entering] = r;
    etas_.push_back(std::move(eta));
    last_step_degenerate_ = theta <= 0.0;
  }

  Outcome Optimize(bool phase_one) {
    int degenerate_run = 0;
    Eigen::VectorXd alpha(m_);
    while (true) {
      if (static_cast<int>(etas_.size()) >= kRefactorInterval && !Refactor()) return Outcome::kFailure;
      if (phase_one && PhaseOneInfeasibility() <= 0.0) {
        if (!Refactor()) return Outcome::kFailure;
        if (PhaseOneInfeasibility() <= 0.0) return Outcome::kOptimal;
      }
      const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
      const Eigen::VectorXd y = Duals();
      const Eigen::Index entering =
          Price(y, phase_one ? kPhaseOneCostTolerance : kOptimalityTolerance, bland);
      if (entering < 0) {
        if (etas_.empty()) return Outcome::kOptimal;
        // Confirm optimality on a fresh factorization.
        if (!Refactor()) return Outcome::kFailure;
        continue;
      }
      LoadColumn(entering, alpha);
      Ftran(alpha);
      const Eigen::Index r = RatioTest(alpha, phase_one, bland);
      if (r < 0) {
        if (phase_one) {
          message_ = "unbounded direction in phase one";
          return Outcome::kFailure;
        }
        return Outcome::kUnbounded;
      }
      Pivot(entering, r, alpha);
      degenerate_run = last_step_degenerate_ ? degenerate_run + 1 : 0;
      if (++iterations_ > max_iterations_) {
        message_ = "iteration limit reached";
        return Outcome::kFailure;
      }
    }
  }

  Eigen::Index m_, n_;
  std::span<const double> objective_;
  std::vector<double> sign_;
  Eigen::VectorXd b_;
  SparseMatrix a_;
  std::vector<double> column_norm_;
  std::vector<Eigen::Index> artificial_row_;
  std::vector<Eigen::Index> basis_;     // variable in each basis position
  std::vector<Eigen::Index> position_;  // basis position of each variable, -1 if nonbasic
  std::vector<double> cost_;
  Eigen::VectorXd x_;                   // basic values by position
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  std::int64_t iterations_ = 0;
  std::int64_t max_iterations_ = 0;
  bool last_step_degenerate_ = false;
  std::string message_;
};

class RevisedSimplex final : public LpBackend {
 public:
  explicit RevisedSimplex(std::int64_t max_iterations) : max_iterations_(max_iterations) {}
  std::string_view name() const override { return "revised"; }

  BackendResult Minimize(const LinearSystem& system,
                         std::span<const double> objective) const override {
    Solver solver(system, objective, max_iterations_);
    return solver.Run();
  }

 private:
  std::int64_t max_iterations_;
};

}  // namespace

std::unique_ptr<LpBackend> MakeRevisedSimplex(std::int64_t max_iterations) {
  return std::make_unique<RevisedSimplex>(max_iterations);
}

}  // namespace raum::lp
