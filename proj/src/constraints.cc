#include "raum/constraints.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>

#include "raum/error.h"

namespace raum {
namespace {

// Inverse of SubsetRankWithin: spreads the bits of rank + 1 over `set`.
Subset ExpandRank(std::size_t rank, Subset set) {
  std::uint32_t compressed = static_cast<std::uint32_t>(rank + 1);
  std::uint32_t bits = 0;
  for (std::uint32_t rest = set.bits(); rest != 0 && compressed != 0; rest &= rest - 1) {
    if (compressed & 1u) bits |= rest & (~rest + 1);
    compressed >>= 1;
  }
  return Subset(bits);
}

std::vector<std::uint64_t> ResolveOrders(const Universe& universe,
                                         const AssemblyOptions& options) {
  const std::uint64_t total = universe.num_orders();
  if (!options.orders) {
    std::vector<std::uint64_t> all(total);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    return all;
  }
  std::vector<std::uint64_t> ranks = *options.orders;
  if (ranks.empty()) {
    throw RaumError(ErrorCode::kInvalidArgument, "empty preference whitelist");
  }
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  if (ranks.back() >= total) {
    throw RaumError(ErrorCode::kInvalidArgument, "order rank out of range");
  }
  return ranks;
}

Subset ReferenceMenu(const Universe& universe, StabilityReference reference) {
  return reference == StabilityReference::kGrand ? universe.grand() : Subset::Singleton(0);
}

// Streams the rows of the system, in final order, to a sink with
//   void Row(const RowLabel&, double rhs, span<const uint32_t>, span<const int8_t>);
template <typename Sink>
void EmitRows(const ChoiceDataset& dataset, const AssemblyOptions& options,
              const ColumnLayout& layout, Sink& sink) {
  const Universe& universe = dataset.universe();
  const int n = universe.size();
  const std::vector<std::uint64_t>& ranks = layout.order_ranks();
  const std::size_t num_orders = ranks.size();
  const std::vector<Subset> all_menus = EnumerateSets(universe);
  const std::vector<PreferenceOrder> orders = [&] {
    std::vector<PreferenceOrder> out;
    out.reserve(num_orders);
    for (std::uint64_t r : ranks) out.push_back(PreferenceOrder::FromRank(n, r));
    return out;
  }();

  std::vector<std::uint32_t> cols;
  std::vector<std::int8_t> vals;
  auto flush = [&](const RowLabel& label, double rhs) {
    sink.Row(label, rhs, std::span<const std::uint32_t>(cols),
             std::span<const std::int8_t>(vals));
    cols.clear();
    vals.clear();
  };
  auto push = [&](std::size_t col, std::int8_t value) {
    cols.push_back(static_cast<std::uint32_t>(col));
    vals.push_back(value);
  };

  // B block.
  for (std::size_t k = 0; k < dataset.num_menus(); ++k) {
    const Subset menu = dataset.menus()[k];
    const std::vector<Subset> subsets = NonemptySubsetsOf(menu);
    std::vector<std::vector<std::uint32_t>> by_alternative(n);
    for (std::size_t p = 0; p < num_orders; ++p) {
      for (Subset d : subsets) {
        by_alternative[Best(orders[p], d)].push_back(
            static_cast<std::uint32_t>(layout.Column(menu, p, d)));
      }
    }
    for (int a : menu.members()) {
      for (std::uint32_t c : by_alternative[a]) push(c, 1);
      flush(RowLabel{.block = RowBlock::kDataFit, .alternative = a, .menu = menu},
            dataset.prob(k, a));
    }
  }

  // O block.
  for (Subset menu : all_menus) {
    const std::size_t per = layout.SetsPerMenuOrder(menu);
    for (std::size_t p = 0; p < num_orders; ++p) {
      const std::size_t begin = layout.MenuOrderBegin(menu, p);
      for (std::size_t j = 0; j < per; ++j) push(begin + j, 1);
    }
    flush(RowLabel{.block = RowBlock::kNormalization, .menu = menu}, 1.0);
  }

  // F block.
  if (layout.mode() == AssemblyMode::kFull) {
    for (Subset menu : all_menus) {
      for (std::size_t p = 0; p < num_orders; ++p) {
        for (Subset d : all_menus) {
          if (d.IsSubsetOf(menu)) continue;
          push(layout.Column(menu, p, d), 1);
          flush(RowLabel{.block = RowBlock::kFeasibility, .menu = menu,
                         .order_rank = ranks[p], .set = d},
                0.0);
        }
      }
    }
  }

  // S block.
  if (options.stability) {
    const Subset reference = ReferenceMenu(universe, options.reference);
    for (Subset menu : all_menus) {
      if (menu == reference) continue;
      const std::size_t per = layout.SetsPerMenuOrder(menu);
      const std::size_t ref_per = layout.SetsPerMenuOrder(reference);
      for (std::size_t p = 0; p < num_orders; ++p) {
        const std::size_t begin = layout.MenuOrderBegin(menu, p);
        const std::size_t ref_begin = layout.MenuOrderBegin(reference, p);
        auto own = [&] { for (std::size_t j = 0; j < per; ++j) push(begin + j, 1); };
        auto ref = [&] { for (std::size_t j = 0; j < ref_per; ++j) push(ref_begin + j, -1); };
        if (begin < ref_begin) {
          own();
          ref();
        } else {
          ref();
          own();
        }
        flush(RowLabel{.block = RowBlock::kStability, .menu = menu, .other = reference,
                       .order_rank = ranks[p]},
              0.0);
      }
    }
  }

  // M block.
  if (options.monotonicity) {
    std::size_t slack = layout.num_pi_columns();
    for (Subset menu : all_menus) {
      const std::vector<Subset> subsets = NonemptySubsetsOf(menu);
      for (int x = 0; x < n; ++x) {
        if (menu.contains(x)) continue;
        const Subset superset = menu | Subset::Singleton(x);
        for (std::size_t p = 0; p < num_orders; ++p) {
          for (Subset d : subsets) {
            push(layout.Column(menu, p, d), 1);
            push(layout.Column(superset, p, d), -1);
            push(slack++, -1);
            flush(RowLabel{.block = RowBlock::kMonotonicity, .menu = menu, .other = superset,
                           .order_rank = ranks[p], .set = d},
                  0.0);
          }
        }
      }
    }
  }
}

void CountBlock(BlockCounts& counts, RowBlock block) {
  switch (block) {
    case RowBlock::kDataFit: ++counts.data_fit; break;
    case RowBlock::kNormalization: ++counts.normalization; break;
    case RowBlock::kFeasibility: ++counts.feasibility; break;
    case RowBlock::kStability: ++counts.stability; break;
    case RowBlock::kMonotonicity: ++counts.monotonicity; break;
  }
}

struct CountingSink {
  std::size_t rows = 0;
  std::size_t nnz = 0;
  std::size_t slacks = 0;
  BlockCounts blocks;

  void Row(const RowLabel& label, double, std::span<const std::uint32_t> cols,
           std::span<const std::int8_t>) {
    ++rows;
    nnz += cols.size();
    if (label.block == RowBlock::kMonotonicity) ++slacks;
    CountBlock(blocks, label.block);
  }
};

}  // namespace

std::string_view ToString(AssemblyMode mode) {
  return mode == AssemblyMode::kFull ? "full" : "reduced";
}

AssemblyMode ParseAssemblyMode(std::string_view text) {
  if (text == "full") return AssemblyMode::kFull;
  if (text == "reduced") return AssemblyMode::kReduced;
  throw RaumError(ErrorCode::kInput, "unknown assembly mode: " + std::string(text));
}

std::string_view ToString(RowBlock block) {
  switch (block) {
    case RowBlock::kDataFit: return "B";
    case RowBlock::kNormalization: return "O";
    case RowBlock::kFeasibility: return "F";
    case RowBlock::kStability: return "S";
    case RowBlock::kMonotonicity: return "M";
  }
  return "?";
}

ColumnLayout::ColumnLayout(const Universe& universe, AssemblyMode mode,
                           std::vector<std::uint64_t> order_ranks)
    : n_(universe.size()), mode_(mode), order_ranks_(std::move(order_ranks)) {
  order_position_.assign(universe.num_orders(), -1);
  for (std::size_t p = 0; p < order_ranks_.size(); ++p) {
    order_position_[order_ranks_[p]] = static_cast<std::int64_t>(p);
  }
  const std::size_t num_sets = universe.num_sets();
  menu_offset_.resize(num_sets + 1);
  std::size_t offset = 0;
  for (std::size_t m = 0; m < num_sets; ++m) {
    menu_offset_[m] = offset;
    offset += order_ranks_.size() * SetsPerMenuOrder(Subset(static_cast<std::uint32_t>(m + 1)));
  }
  menu_offset_[num_sets] = offset;
  num_pi_columns_ = offset;
  if (num_pi_columns_ > std::numeric_limits<std::uint32_t>::max()) {
    throw RaumError(ErrorCode::kInvalidArgument, "system exceeds 32-bit column indices");
  }
}

std::size_t ColumnLayout::SetsPerMenuOrder(Subset menu) const {
  return mode_ == AssemblyMode::kFull ? (std::size_t{1} << n_) - 1
                                      : (std::size_t{1} << menu.size()) - 1;
}

std::size_t ColumnLayout::MenuOrderBegin(Subset menu, std::size_t order_position) const {
  return menu_offset_[menu.index()] + order_position * SetsPerMenuOrder(menu);
}

std::size_t ColumnLayout::Column(Subset menu, std::size_t order_position, Subset set) const {
  const std::size_t local =
      mode_ == AssemblyMode::kFull ? set.index() : SubsetRankWithin(set, menu);
  return MenuOrderBegin(menu, order_position) + local;
}

std::optional<std::size_t> ColumnLayout::Find(Subset menu, std::uint64_t order_rank,
                                              Subset set) const {
  if (order_rank >= order_position_.size() || order_position_[order_rank] < 0) {
    return std::nullopt;
  }
  if (mode_ == AssemblyMode::kReduced && !set.IsSubsetOf(menu)) return std::nullopt;
  return Column(menu, static_cast<std::size_t>(order_position_[order_rank]), set);
}

ColumnLabel ColumnLayout::Decode(std::size_t column) const {
  const auto it = std::upper_bound(menu_offset_.begin(), menu_offset_.end(), column);
  const std::size_t m = static_cast<std::size_t>(it - menu_offset_.begin()) - 1;
  const Subset menu(static_cast<std::uint32_t>(m + 1));
  const std::size_t per = SetsPerMenuOrder(menu);
  const std::size_t local = column - menu_offset_[m];
  const std::size_t p = local / per;
  const std::size_t r = local % per;
  const Subset set = mode_ == AssemblyMode::kFull ? Subset(static_cast<std::uint32_t>(r + 1))
                                                  : ExpandRank(r, menu);
  return ColumnLabel{.menu = menu, .order_rank = order_ranks_[p], .set = set};
}

ConstraintSystem::ConstraintSystem(Universe universe, AssemblyOptions options,
                                   ColumnLayout layout)
    : universe_(std::move(universe)), options_(std::move(options)), layout_(std::move(layout)) {}

ColumnLabel ConstraintSystem::column_label(std::size_t column) const {
  if (column < layout_.num_pi_columns()) return layout_.Decode(column);
  const RowLabel& row = row_labels_[slack_rows_[column - layout_.num_pi_columns()]];
  return ColumnLabel{.slack = true, .menu = row.menu, .order_rank = row.order_rank,
                     .set = row.set, .other = row.other};
}

std::span<const std::uint32_t> ConstraintSystem::row_columns(std::size_t row) const {
  return std::span<const std::uint32_t>(columns_).subspan(
      row_begin_[row], row_begin_[row + 1] - row_begin_[row]);
}

std::span<const std::int8_t> ConstraintSystem::row_values(std::size_t row) const {
  return std::span<const std::int8_t>(values_).subspan(row_begin_[row],
                                                       row_begin_[row + 1] - row_begin_[row]);
}

std::size_t ConstraintSystem::NormalizationRow(Subset menu) const {
  return first_normalization_row_ + menu.index();
}

lp::LinearSystem ConstraintSystem::ToLinearSystem() const {
  using Triplet = Eigen::Triplet<double, int>;
  std::vector<Triplet> triplets;
  triplets.reserve(nnz());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::int64_t e = row_begin_[r]; e < row_begin_[r + 1]; ++e) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(columns_[e]),
                            static_cast<double>(values_[e]));
    }
  }
  lp::LinearSystem system;
  system.matrix.resize(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.matrix.makeCompressed();
  system.rhs = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
  return system;
}

class SystemBuilder {
 public:
  explicit SystemBuilder(ConstraintSystem& system) : system_(system) {
    system_.row_begin_.push_back(0);
  }

  void Row(const RowLabel& label, double rhs, std::span<const std::uint32_t> cols,
           std::span<const std::int8_t> vals) {
    if (label.block == RowBlock::kNormalization && system_.blocks_.normalization == 0) {
      system_.first_normalization_row_ = system_.rhs_.size();
    }
    if (label.block == RowBlock::kMonotonicity) system_.slack_rows_.push_back(system_.rhs_.size());
    CountBlock(system_.blocks_, label.block);
    system_.columns_.insert(system_.columns_.end(), cols.begin(), cols.end());
    system_.values_.insert(system_.values_.end(), vals.begin(), vals.end());
    system_.row_begin_.push_back(static_cast<std::int64_t>(system_.columns_.size()));
    system_.rhs_.push_back(rhs);
    system_.row_labels_.push_back(label);
  }

 private:
  ConstraintSystem& system_;
};

ConstraintSystem BuildSystem(const ChoiceDataset& dataset, const AssemblyOptions& options) {
  const Universe& universe = dataset.universe();
  ColumnLayout layout(universe, options.mode, ResolveOrders(universe, options));
  ConstraintSystem system(universe, options, layout);
  SystemBuilder builder(system);
  EmitRows(dataset, options, system.layout(), builder);
  return system;
}

SystemStats ComputeStats(const ConstraintSystem& system) {
  SystemStats stats;
  stats.rows = system.rows();
  stats.cols = system.cols();
  stats.nnz = system.nnz();
  stats.blocks = system.blocks();
  stats.sparsity = static_cast<double>(stats.nnz) /
                   (static_cast<double>(stats.rows) * static_cast<double>(stats.cols));
  return stats;
}

SystemStats CountCompleteSystem(int n, const AssemblyOptions& options) {
  const Universe universe = Universe::Letters(n);
  std::vector<Subset> menus = EnumerateSets(universe);
  std::vector<std::vector<double>> probs;
  probs.reserve(menus.size());
  for (Subset menu : menus) {
    std::vector<double> row(n, 0.0);
    for (int a : menu.members()) row[a] = 1.0 / menu.size();
    probs.push_back(std::move(row));
  }
  const ChoiceDataset dataset(universe, std::move(menus), std::move(probs));
  const ColumnLayout layout(universe, options.mode, ResolveOrders(universe, options));
  CountingSink sink;
  EmitRows(dataset, options, layout, sink);
  SystemStats stats;
  stats.rows = sink.rows;
  stats.cols = layout.num_pi_columns() + sink.slacks;
  stats.nnz = sink.nnz;
  stats.blocks = sink.blocks;
  stats.sparsity = static_cast<double>(stats.nnz) /
                   (static_cast<double>(stats.rows) * static_cast<double>(stats.cols));
  return stats;
}

void ExportSystem(const ConstraintSystem& system, std::ostream& out) {
  out << system.rows() << ' ' << system.cols() << ' ' << system.nnz() << '\n';
  for (std::size_t r = 0; r < system.rows(); ++r) {
    const auto cols = system.row_columns(r);
    const auto vals = system.row_values(r);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      out << r << ' ' << cols[e] << ' ' << static_cast<int>(vals[e]) << '\n';
    }
  }
  const auto precision = out.precision(17);
  for (double g : system.rhs()) out << g << '\n';
  out.precision(precision);
}

std::vector<double> AssembleSolution(const ConstraintSystem& system, const RaumRule& rule) {
  if (!(rule.universe() == system.universe())) {
    throw RaumError(ErrorCode::kInvalidArgument, "rule and system universes differ");
  }
  std::vector<double> v(system.cols(), 0.0);
  const ColumnLayout& layout = system.layout();
  for (std::size_t c = 0; c < layout.num_pi_columns(); ++c) {
    const ColumnLabel label = layout.Decode(c);
    v[c] = rule.at(label.menu, label.order_rank, label.set);
  }
  for (std::size_t c = layout.num_pi_columns(); c < system.cols(); ++c) {
    const ColumnLabel label = system.column_label(c);
    v[c] = rule.at(label.menu, label.order_rank, label.set) -
           rule.at(label.other, label.order_rank, label.set);
  }
  return v;
}

RaumRule ExtractRule(const ConstraintSystem& system, std::span<const double> v) {
  if (v.size() != system.cols()) {
    throw RaumError(ErrorCode::kInvalidArgument, "solution length does not match system");
  }
  RaumRule rule(system.universe());
  const ColumnLayout& layout = system.layout();
  for (std::size_t c = 0; c < layout.num_pi_columns(); ++c) {
    const ColumnLabel label = layout.Decode(c);
    rule.at(label.menu, label.order_rank, label.set) = v[c];
  }
  return rule;
}

std::vector<double> RowResiduals(const ConstraintSystem& system, std::span<const double> v) {
  if (v.size() != system.cols()) {
    throw RaumError(ErrorCode::kInvalidArgument, "solution length does not match system");
  }
  std::vector<double> out(system.rows());
  for (std::size_t r = 0; r < system.rows(); ++r) {
    const auto cols = system.row_columns(r);
    const auto vals = system.row_values(r);
    double sum = -system.rhs()[r];
    for (std::size_t e = 0; e < cols.size(); ++e) sum += vals[e] * v[cols[e]];
    out[r] = sum;
  }
  return out;
}

}  // namespace raum
