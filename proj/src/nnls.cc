// Lawson-Hanson active-set nonnegative least squares. The passive columns are
// kept as an upper-triangular factor R with R'R = G_P'G_P, appended column by
// column and repaired by Givens rotations when a column leaves. Subproblem
// solves use one step of iterative refinement on the semi-normal equations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "raum/lp.h"

namespace raum::lp {
namespace {

constexpr double kDependenceTolerance = 1e-10;
constexpr double kGradientTolerance = 1e-13;

class ActiveSet {
 public:
  explicit ActiveSet(const LinearSystem& system) : g_(system.matrix), rhs_(system.rhs) {
    scatter_.setZero(g_.rows());
  }

  std::size_t size() const { return columns_.size(); }
  const std::vector<Eigen::Index>& columns() const { return columns_; }

  // Appends column j; returns false and leaves the set unchanged when j is
  // numerically dependent on the current columns.
  bool Append(Eigen::Index j) {
    const std::size_t p = columns_.size();
    for (SparseMatrix::InnerIterator it(g_, j); it; ++it) scatter_[it.row()] = it.value();
    std::vector<double> r(p + 1);
    for (std::size_t k = 0; k < p; ++k) {
      double dot = 0.0;
      for (SparseMatrix::InnerIterator it(g_, columns_[k]); it; ++it) {
        dot += it.value() * scatter_[it.row()];
      }
      r[k] = dot;
    }
    const double norm2 = g_.col(j).squaredNorm();
    for (SparseMatrix::InnerIterator it(g_, j); it; ++it) scatter_[it.row()] = 0.0;
    // Forward substitution R' r = G_P' g_j.
    for (std::size_t k = 0; k < p; ++k) {
      double s = r[k];
      for (std::size_t l = 0; l < k; ++l) s -= R(l, k) * r[l];
      r[k] = s / R(k, k);
    }
    double rest = norm2;
    for (std::size_t k = 0; k < p; ++k) rest -= r[k] * r[k];
    if (!(rest > kDependenceTolerance * norm2)) return false;
    r[p] = std::sqrt(rest);
    r_.push_back(std::move(r));
    columns_.push_back(j);
    return true;
  }

  // Removes the column at `slot`, restoring triangularity with rotations.
  void Remove(std::size_t slot) {
    const std::size_t p = columns_.size();
    r_.erase(r_.begin() + static_cast<std::ptrdiff_t>(slot));
    columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(slot));
    // Columns slot..p-2 now carry one subdiagonal entry at row k+1.
    for (std::size_t k = slot; k + 1 < p; ++k) {
      const double a = r_[k][k];
      const double b = r_[k][k + 1];
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      for (std::size_t col = k; col + 1 < p; ++col) {
        const double x = r_[col][k];
        const double y = r_[col][k + 1];
        r_[col][k] = c * x + s * y;
        r_[col][k + 1] = -s * x + c * y;
      }
    }
    for (std::size_t col = slot; col < r_.size(); ++col) r_[col].resize(col + 1);
  }

  // Least-squares coefficients of rhs on the passive columns.
  std::vector<double> Solve() const {
    const std::size_t p = columns_.size();
    std::vector<double> z = SolveNormal(ProjectRhs(rhs_));
    Eigen::VectorXd residual = rhs_;
    for (std::size_t k = 0; k < p; ++k) residual -= z[k] * g_.col(columns_[k]);
    const std::vector<double> dz = SolveNormal(ProjectRhs(residual));
    for (std::size_t k = 0; k < p; ++k) z[k] += dz[k];
    return z;
  }

 private:
  double R(std::size_t row, std::size_t col) const { return r_[col][row]; }

  std::vector<double> ProjectRhs(const Eigen::VectorXd& v) const {
    std::vector<double> out(columns_.size());
    for (std::size_t k = 0; k < columns_.size(); ++k) out[k] = g_.col(columns_[k]).dot(v);
    return out;
  }

  // Solves R'R z = q.
  std::vector<double> SolveNormal(std::vector<double> q) const {
    const std::size_t p = columns_.size();
    for (std::size_t k = 0; k < p; ++k) {
      double s = q[k];
      for (std::size_t l = 0; l < k; ++l) s -= R(l, k) * q[l];
      q[k] = s / R(k, k);
    }
    for (std::size_t k = p; k-- > 0;) {
      double s = q[k];
      for (std::size_t l = k + 1; l < p; ++l) s -= R(k, l) * q[l];
      q[k] = s / R(k, k);
    }
    return q;
  }

  const SparseMatrix& g_;
  const Eigen::VectorXd& rhs_;
  Eigen::VectorXd scatter_;
  std::vector<Eigen::Index> columns_;
  std::vector<std::vector<double>> r_;  // r_[col][row], row <= col
};

}  // namespace

Projection ProjectionDistance(const LinearSystem& system) {
  Projection out;
  const Eigen::Index n = system.cols();
  ActiveSet set(system);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  std::vector<char> passive(n, 0);
  std::vector<char> skip(n, 0);
  const std::int64_t max_iterations = 3 * (n + system.rows()) + 100;

  auto residual = [&] { return Eigen::VectorXd(system.rhs - system.matrix * v); };
  Eigen::VectorXd r = residual();
  while (true) {
    if (++out.iterations > max_iterations) return out;
    const Eigen::VectorXd w = system.matrix.transpose() * r;
    Eigen::Index entering = -1;
    double best = kGradientTolerance;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[j] || skip[j]) continue;
      if (w[j] > best) {
        best = w[j];
        entering = j;
      }
    }
    if (entering < 0) break;
    if (!set.Append(entering)) {
      skip[entering] = 1;
      continue;
    }
    passive[entering] = 1;

    std::vector<double> z = set.Solve();
    if (z.back() <= 0.0) {
      // The new column cannot carry weight; drop it for this round.
      set.Remove(set.size() - 1);
      passive[entering] = 0;
      skip[entering] = 1;
      continue;
    }
    while (true) {
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < z.size(); ++k) {
        if (z[k] > 0.0) continue;
        const double vk = v[set.columns()[k]];
        alpha = std::min(alpha, vk / (vk - z[k]));
      }
      if (!std::isfinite(alpha)) break;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const Eigen::Index j = set.columns()[k];
        v[j] += alpha * (z[k] - v[j]);
      }
      bool removed = false;
      for (std::size_t k = z.size(); k-- > 0;) {
        const Eigen::Index j = set.columns()[k];
        if (v[j] <= 1e-15) {
          v[j] = 0.0;
          passive[j] = 0;
          set.Remove(k);
          removed = true;
        }
      }
      if (!removed) break;
      std::fill(skip.begin(), skip.end(), 0);
      z = set.Solve();
    }
    for (std::size_t k = 0; k < z.size(); ++k) v[set.columns()[k]] = std::max(z[k], 0.0);
    r = residual();
  }
  out.status = Status::kFeasible;
  out.distance = r.squaredNorm();
  out.solution.assign(v.data(), v.data() + n);
  return out;
}

}  // namespace raum::lp
