#include "qmeasure/layout.hpp"

#include <algorithm>
#include <unordered_set>

#include "qmeasure/errors.hpp"

namespace qmeasure {

SubsystemLayout::SubsystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::unordered_set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.label.empty()) throw LayoutError("factor label must not be empty");
    if (f.dim == 0) throw LayoutError("factor '" + f.label + "' has dimension 0");
    if (!seen.insert(f.label).second) throw LayoutError("duplicate factor label '" + f.label + "'");
    total_dim_ *= f.dim;
  }
}

SubsystemLayout SubsystemLayout::single(std::string label, std::size_t dim) {
  return SubsystemLayout({Factor{std::move(label), dim}});
}

std::vector<std::size_t> SubsystemLayout::dims() const {
  std::vector<std::size_t> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) out.push_back(f.dim);
  return out;
}

bool SubsystemLayout::contains(const std::string& label) const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

std::size_t SubsystemLayout::position(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  throw LayoutError("unknown factor label '" + label + "'");
}

SubsystemLayout SubsystemLayout::concat(const SubsystemLayout& other) const {
  std::vector<Factor> joined = factors_;
  joined.insert(joined.end(), other.factors_.begin(), other.factors_.end());
  return SubsystemLayout(std::move(joined));
}

SubsystemLayout SubsystemLayout::select(std::span<const std::string> labels) const {
  std::vector<bool> wanted(factors_.size(), false);
  for (const auto& l : labels) wanted[position(l)] = true;
  std::vector<Factor> kept;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (wanted[i]) kept.push_back(factors_[i]);
  }
  return SubsystemLayout(std::move(kept));
}

FactorSplit split_factors(const SubsystemLayout& layout, std::span<const std::string> targets) {
  const auto& factors = layout.factors();
  const std::size_t n = factors.size();

  // Stride of factor k in the joint index (leftmost most significant).
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t k = n; k-- > 1;) stride[k - 1] = stride[k] * factors[k].dim;

  std::vector<bool> is_target(n, false);
  std::vector<std::size_t> target_pos;
  for (const auto& label : targets) {
    const std::size_t p = layout.position(label);
    if (is_target[p]) throw LayoutError("factor '" + label + "' listed twice");
    is_target[p] = true;
    target_pos.push_back(p);
  }
  std::vector<std::size_t> rest_pos;
  for (std::size_t k = 0; k < n; ++k) {
    if (!is_target[k]) rest_pos.push_back(k);
  }

  auto offsets = [&](const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> out{0};
    for (std::size_t p : positions) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * factors[p].dim);
      for (std::size_t base : out) {
        for (std::size_t d = 0; d < factors[p].dim; ++d) next.push_back(base + d * stride[p]);
      }
      out = std::move(next);
    }
    return out;
  };
  return FactorSplit{offsets(target_pos), offsets(rest_pos)};
}

}  // namespace qmeasure
