// Assembly of the linear system g = G v whose nonnegative solutions are
// exactly the admissible rules for a dataset. v stacks the rule values
// pi_A(order, D) followed by one slack per monotonicity row.
//
// Row blocks, in this order:
//   B  data fit: one row per observed (a, A), dataset menu order, a ascending;
//   O  normalization: one row per nonempty menu, increasing mask;
//   F  feasibility (full mode only): pi_A(order, D) = 0 for D not inside A;
//   S  stability: marginal at A minus marginal at the reference menu;
//   M  monotonicity: pi_A(o, D) - pi_B(o, D) - slack = 0 for every cover
//      pair A inside B = A + {x}, every order, every nonempty D inside A.
// Entries are +1 or -1, rows are emitted with increasing column indices, and
// g is (rho, 1, 0) with ones exactly on the O rows.

#ifndef RAUM_CONSTRAINTS_H_
#define RAUM_CONSTRAINTS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raum/core.h"
#include "raum/lp.h"

namespace raum {

// kReduced creates only columns with D inside A; kFull creates every
// (A, order, D) column and pins the infeasible ones with F rows.
enum class AssemblyMode { kReduced, kFull };

// Menu every other menu's order marginal is tied to in the S block.
// kSingleton uses {first alternative}, whose marginal is a single column;
// kGrand uses X.
enum class StabilityReference { kSingleton, kGrand };

std::string_view ToString(AssemblyMode mode);
AssemblyMode ParseAssemblyMode(std::string_view text);

struct AssemblyOptions {
  AssemblyMode mode = AssemblyMode::kReduced;
  bool stability = true;
  bool monotonicity = true;
  StabilityReference reference = StabilityReference::kSingleton;
  // Ranks of the admissible orders; all orders when unset. Must be nonempty.
  std::optional<std::vector<std::uint64_t>> orders;
};

enum class RowBlock : std::uint8_t { kDataFit, kNormalization, kFeasibility, kStability, kMonotonicity };
std::string_view ToString(RowBlock block);

struct RowLabel {
  RowBlock block;
  // B: (alternative, menu). O: menu. F: (menu, order, set).
  // S: (menu, other = reference, order). M: (menu, other = superset, order, set).
  int alternative = -1;
  Subset menu;
  Subset other;
  std::uint64_t order_rank = 0;
  Subset set;
};

struct ColumnLabel {
  bool slack = false;
  Subset menu;
  std::uint64_t order_rank = 0;
  Subset set;
  // Superset menu of the monotonicity row when slack.
  Subset other;
};

// Bijection between (menu, order, set) triples and pi columns.
class ColumnLayout {
 public:
  ColumnLayout(const Universe& universe, AssemblyMode mode,
               std::vector<std::uint64_t> order_ranks);

  AssemblyMode mode() const { return mode_; }
  int n() const { return n_; }
  const std::vector<std::uint64_t>& order_ranks() const { return order_ranks_; }
  std::size_t num_pi_columns() const { return num_pi_columns_; }

  // Column of pi_A(order, D), or nullopt when the column does not exist
  // (order excluded, or D not inside A in reduced mode).
  std::optional<std::size_t> Find(Subset menu, std::uint64_t order_rank, Subset set) const;
  // Requires the column to exist.
  std::size_t Column(Subset menu, std::size_t order_position, Subset set) const;
  // Columns of menu A for the order at `order_position`, in increasing
  // index: sets D in increasing mask order (all D in full mode).
  std::size_t MenuOrderBegin(Subset menu, std::size_t order_position) const;
  std::size_t SetsPerMenuOrder(Subset menu) const;
  ColumnLabel Decode(std::size_t column) const;

 private:
  int n_;
  AssemblyMode mode_;
  std::vector<std::uint64_t> order_ranks_;
  std::vector<std::int64_t> order_position_;  // by rank, -1 when excluded
  std::vector<std::size_t> menu_offset_;      // by menu index
  std::size_t num_pi_columns_ = 0;
};

struct BlockCounts {
  std::size_t data_fit = 0;
  std::size_t normalization = 0;
  std::size_t feasibility = 0;
  std::size_t stability = 0;
  std::size_t monotonicity = 0;
};

struct SystemStats {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t nnz = 0;
  double sparsity = 0.0;  // nnz / (rows * cols)
  BlockCounts blocks;
};

// Immutable compressed-row storage of G with labels and g.
class ConstraintSystem {
 public:
  const Universe& universe() const { return universe_; }
  const AssemblyOptions& options() const { return options_; }
  const ColumnLayout& layout() const { return layout_; }

  std::size_t rows() const { return rhs_.size(); }
  std::size_t cols() const { return layout_.num_pi_columns() + slack_rows_.size(); }
  std::size_t nnz() const { return columns_.size(); }
  std::size_t num_slacks() const { return slack_rows_.size(); }

  std::span<const double> rhs() const { return rhs_; }
  const RowLabel& row_label(std::size_t row) const { return row_labels_[row]; }
  ColumnLabel column_label(std::size_t column) const;
  const BlockCounts& blocks() const { return blocks_; }

  // Entries of one row, columns strictly increasing.
  std::span<const std::uint32_t> row_columns(std::size_t row) const;
  std::span<const std::int8_t> row_values(std::size_t row) const;

  // Row of the O block for `menu`.
  std::size_t NormalizationRow(Subset menu) const;

  lp::LinearSystem ToLinearSystem() const;

 private:
  friend class SystemBuilder;
  friend ConstraintSystem BuildSystem(const ChoiceDataset&, const AssemblyOptions&);
  ConstraintSystem(Universe universe, AssemblyOptions options, ColumnLayout layout);

  Universe universe_;
  AssemblyOptions options_;
  ColumnLayout layout_;
  std::vector<std::int64_t> row_begin_;
  std::vector<std::uint32_t> columns_;
  std::vector<std::int8_t> values_;
  std::vector<double> rhs_;
  std::vector<RowLabel> row_labels_;
  std::vector<std::size_t> slack_rows_;  // M row of each slack column
  std::size_t first_normalization_row_ = 0;
  BlockCounts blocks_;
};

// Throws RaumError(kInvalidArgument) on an empty or out-of-range whitelist.
ConstraintSystem BuildSystem(const ChoiceDataset& dataset, const AssemblyOptions& options = {});

SystemStats ComputeStats(const ConstraintSystem& system);

// Dimensions of the system BuildSystem would produce for a complete dataset
// on n alternatives, counted without materializing it.
SystemStats CountCompleteSystem(int n, const AssemblyOptions& options = {});

// "rows cols nnz", then one "row col value" line per entry (0-based, row
// major), then g one value per line.
void ExportSystem(const ConstraintSystem& system, std::ostream& out);

// v = (pi, slacks) for a rule; slacks are pi_A - pi_B on each M row.
std::vector<double> AssembleSolution(const ConstraintSystem& system, const RaumRule& rule);

// The rule held in the pi columns of v; absent columns are zero.
RaumRule ExtractRule(const ConstraintSystem& system, std::span<const double> v);

// G v - g, one entry per row.
std::vector<double> RowResiduals(const ConstraintSystem& system, std::span<const double> v);

}  // namespace raum

#endif  // RAUM_CONSTRAINTS_H_
