#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qmeasure {

struct Factor {
  std::string label;
  std::size_t dim = 1;

  bool operator==(const Factor&) const = default;
};

/// Ordered tensor-product structure of a Hilbert space. The leftmost factor is
/// the most significant digit of a joint basis index (row-major over factors).
class SubsystemLayout {
 public:
  SubsystemLayout() = default;
  explicit SubsystemLayout(std::vector<Factor> factors);

  static SubsystemLayout single(std::string label, std::size_t dim);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  std::size_t total_dim() const { return total_dim_; }
  std::vector<std::size_t> dims() const;

  bool contains(const std::string& label) const;
  /// Position of `label` in the factor list; throws LayoutError if absent.
  std::size_t position(const std::string& label) const;
  std::size_t dim(const std::string& label) const { return factors_[position(label)].dim; }

  /// Concatenation; a repeated label raises LayoutError.
  SubsystemLayout concat(const SubsystemLayout& other) const;
  /// Sub-layout of the named factors, kept in this layout's order.
  SubsystemLayout select(std::span<const std::string> labels) const;

  bool operator==(const SubsystemLayout& other) const { return factors_ == other.factors_; }

 private:
  std::vector<Factor> factors_;
  std::size_t total_dim_ = 1;
};

/// Joint-index bookkeeping for acting on a subset of factors.
///
/// For a layout and an ordered list of target labels, `target_offsets[t]` is the
/// contribution of target multi-index t (row-major in the given label order) to
/// the joint index, and `rest_offsets[r]` the contribution of the remaining
/// factors. Every joint index is uniquely target_offsets[t] + rest_offsets[r].
struct FactorSplit {
  std::vector<std::size_t> target_offsets;
  std::vector<std::size_t> rest_offsets;
};

FactorSplit split_factors(const SubsystemLayout& layout, std::span<const std::string> targets);

}  // namespace qmeasure
