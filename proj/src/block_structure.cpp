#include <algorithm>
#include <functional>
#include <numeric>
#include <string>

#include "wcm/block_model.hpp"

namespace wcm {

BlockStructure::BlockStructure(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw DomainError("BlockStructure: at least one block is required");
  }
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t j = 0; j < sizes_.size(); ++j) {
    if (sizes_[j] < 1) {
      throw DomainError("BlockStructure: block " + std::to_string(j) +
                        " has non-positive size " + std::to_string(sizes_[j]));
    }
    offsets_.push_back(offsets_.back() + sizes_[j]);
  }
}

BlockStructure BlockStructure::uniform(Index block_size, Index num_blocks) {
  if (num_blocks < 1) {
    throw DomainError("BlockStructure: at least one block is required");
  }
  return BlockStructure(std::vector<Index>(static_cast<std::size_t>(num_blocks), block_size));
}

Index BlockStructure::block_of(Index atom) const {
  if (atom < 0 || atom >= num_atoms()) {
    throw DomainError("BlockStructure: atom index out of range");
  }
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), atom);
  return static_cast<Index>(it - offsets_.begin()) - 1;
}

bool BlockStructure::is_uniform() const {
  return std::adjacent_find(sizes_.begin(), sizes_.end(), std::not_equal_to<>()) ==
         sizes_.end();
}

Index BlockStructure::uniform_size() const {
  if (sizes_.empty() || !is_uniform()) {
    throw DomainError("BlockStructure: block sizes are not all equal");
  }
  return sizes_.front();
}

BlockStructure BlockStructure::permuted(const std::vector<Index>& order) const {
  if (order.size() != sizes_.size()) {
    throw DimensionError("BlockStructure::permuted: order has wrong length");
  }
  std::vector<bool> seen(sizes_.size(), false);
  std::vector<Index> out;
  out.reserve(order.size());
  for (Index j : order) {
    if (j < 0 || j >= num_blocks() || seen[static_cast<std::size_t>(j)]) {
      throw DomainError("BlockStructure::permuted: order is not a permutation");
    }
    seen[static_cast<std::size_t>(j)] = true;
    out.push_back(size(j));
  }
  return BlockStructure(std::move(out));
}

}  // namespace wcm
