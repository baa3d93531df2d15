// Two-phase tableau simplex with Bland's rule. One artificial per row; the
// phase-one duals are read off the artificial reduced costs.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "raum/error.h"
#include "raum/lp.h"

namespace raum::lp {
namespace {

constexpr Eigen::Index kMaxColumns = 10000;
constexpr double kPivotTolerance = 1e-9;
constexpr double kCostTolerance = 1e-10;
constexpr double kPhaseOneTolerance = 1e-9;

class Tableau {
 public:
  Tableau(const LinearSystem& system) : m_(system.rows()), n_(system.cols()) {
    width_ = n_ + m_ + 1;
    data_.assign(static_cast<std::size_t>(m_ * width_), 0.0);
    sign_.assign(m_, 1.0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (system.rhs[i] < 0.0) sign_[i] = -1.0;
      at(i, width_ - 1) = sign_[i] * system.rhs[i];
      at(i, n_ + i) = 1.0;
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (SparseMatrix::InnerIterator it(system.matrix, j); it; ++it) {
        at(it.row(), j) = sign_[it.row()] * it.value();
      }
    }
    basis_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  double& at(Eigen::Index i, Eigen::Index j) { return data_[i * width_ + j]; }
  double at(Eigen::Index i, Eigen::Index j) const { return data_[i * width_ + j]; }

  // Minimizes cost over the current basis; columns >= `enterable` never
  // enter. Returns false when unbounded. Bland's rule on both choices.
  bool Optimize(const std::vector<double>& cost, Eigen::Index enterable, std::int64_t& iterations) {
    std::vector<double> reduced(width_ - 1);
    while (true) {
      ReducedCosts(cost, reduced);
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < enterable; ++j) {
        if (reduced[j] < -kCostTolerance && !IsBasic(j)) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;
      Eigen::Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = at(i, entering);
        if (a <= kPivotTolerance) continue;
        const double ratio = at(i, width_ - 1) / a;
        if (leaving < 0 || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[leaving])) {
          best_ratio = leaving < 0 ? ratio : std::min(ratio, best_ratio);
          leaving = i;
        }
      }
      if (leaving < 0) return false;
      Pivot(leaving, entering);
      ++iterations;
    }
  }

  void ReducedCosts(const std::vector<double>& cost, std::vector<double>& reduced) const {
    for (Eigen::Index j = 0; j + 1 < width_; ++j) reduced[j] = cost[j];
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &data_[i * width_];
      for (Eigen::Index j = 0; j + 1 < width_; ++j) reduced[j] -= cb * row[j];
    }
  }

  void Pivot(Eigen::Index r, Eigen::Index q) {
    double* prow = &data_[r * width_];
    const double p = prow[q];
    for (Eigen::Index j = 0; j < width_; ++j) prow[j] /= p;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &data_[i * width_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (Eigen::Index j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    basis_[r] = q;
  }

  bool IsBasic(Eigen::Index j) const {
    for (Eigen::Index b : basis_) {
      if (b == j) return true;
    }
    return false;
  }

  // Pivots basic artificials at level zero onto structural columns.
  void DriveOutArtificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(at(i, j)) > kPivotTolerance && !IsBasic(j)) {
          Pivot(i, j);
          break;
        }
      }
    }
  }

  double Value(Eigen::Index i) const { return at(i, width_ - 1); }

  Eigen::Index m_, n_, width_;
  std::vector<double> data_;
  std::vector<double> sign_;
  std::vector<Eigen::Index> basis_;
};

class DenseSimplex final : public LpBackend {
 public:
  std::string_view name() const override { return "dense"; }

  BackendResult Minimize(const LinearSystem& system,
                         std::span<const double> objective) const override {
    if (system.cols() >= kMaxColumns) {
      throw RaumError(ErrorCode::kInvalidArgument,
                      "dense simplex accepts fewer than 10000 columns");
    }
    BackendResult result;
    const Eigen::Index m = system.rows();
    const Eigen::Index n = system.cols();
    Tableau t(system);

    std::vector<double> phase_one(n + m, 0.0);
    for (Eigen::Index i = 0; i < m; ++i) phase_one[n + i] = 1.0;
    t.Optimize(phase_one, n, result.iterations);

    double infeasibility = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t.basis_[i] >= n) infeasibility += t.Value(i);
    }
    if (infeasibility > kPhaseOneTolerance) {
      std::vector<double> reduced(n + m);
      t.ReducedCosts(phase_one, reduced);
      result.status = Status::kInfeasible;
      result.farkas.resize(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        result.farkas[i] = t.sign_[i] * (1.0 - reduced[n + i]);
      }
      result.message = "phase one optimum " + std::to_string(infeasibility);
      return result;
    }
    t.DriveOutArtificials();

    if (!objective.empty()) {
      std::vector<double> cost(n + m, 0.0);
      for (Eigen::Index j = 0; j < n; ++j) cost[j] = objective[j];
      if (!t.Optimize(cost, n, result.iterations)) {
        result.status = Status::kUnbounded;
        return result;
      }
    }
    result.solution.assign(n, 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t.basis_[i] < n) result.solution[t.basis_[i]] = t.Value(i);
    }
    result.status = Status::kFeasible;
    return result;
  }
};

}  // namespace

std::unique_ptr<LpBackend> MakeDenseSimplex() { return std::make_unique<DenseSimplex>(); }

}  // namespace raum::lp
