#include "gnep/block_vector.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gnep/error.hpp"

namespace gnep {

namespace {

std::vector<int> offsets_of(const std::vector<int>& dims) {
  std::vector<int> offsets(dims.size(), 0);
  int acc = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] <= 0)
      throw DimensionError("block " + std::to_string(i) + " has non-positive dimension",
                           static_cast<int>(i));
    offsets[i] = acc;
    acc += dims[i];
  }
  return offsets;
}

}  // namespace

BlockVector::BlockVector(std::vector<int> dims)
    : dims_(std::move(dims)), offsets_(offsets_of(dims_)) {
  values_ = Vec::Zero(std::accumulate(dims_.begin(), dims_.end(), 0));
}

BlockVector::BlockVector(std::vector<int> dims, Vec values)
    : dims_(std::move(dims)), offsets_(offsets_of(dims_)), values_(std::move(values)) {
  const int total = std::accumulate(dims_.begin(), dims_.end(), 0);
  if (values_.size() != total)
    throw DimensionError("bundle has " + std::to_string(values_.size()) +
                         " entries, block dims sum to " + std::to_string(total));
  if (!values_.allFinite()) throw DimensionError("bundle contains non-finite entries");
}

BlockVector BlockVector::from_blocks(const std::vector<Vec>& blocks) {
  std::vector<int> dims;
  int total = 0;
  for (const auto& b : blocks) {
    dims.push_back(static_cast<int>(b.size()));
    total += static_cast<int>(b.size());
  }
  Vec values(total);
  int at = 0;
  for (const auto& b : blocks) {
    values.segment(at, b.size()) = b;
    at += static_cast<int>(b.size());
  }
  return BlockVector(std::move(dims), std::move(values));
}

BlockVector BlockVector::with_block(int i, const Vec& xi) const {
  BlockVector out = *this;
  out.set_block(i, xi);
  return out;
}

void BlockVector::set_block(int i, const Vec& xi) {
  if (i < 0 || i >= num_blocks())
    throw DimensionError("player index " + std::to_string(i) + " out of range", i);
  if (xi.size() != dim(i))
    throw DimensionError("block " + std::to_string(i) + " expects dimension " +
                             std::to_string(dim(i)) + ", got " + std::to_string(xi.size()),
                         i);
  if (!xi.allFinite()) throw DimensionError("block contains non-finite entries", i);
  values_.segment(offset(i), dim(i)) = xi;
}

}  // namespace gnep
