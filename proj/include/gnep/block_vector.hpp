#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gnep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A strategy bundle x = (x_1, ..., x_N) stored as one contiguous vector with
/// per-player block dimensions. Player indices are zero-based.
class BlockVector {
 public:
  BlockVector() = default;
  /// Zero bundle with the given block dimensions.
  explicit BlockVector(std::vector<int> dims);
  BlockVector(std::vector<int> dims, Vec values);

  static BlockVector from_blocks(const std::vector<Vec>& blocks);

  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int size() const { return static_cast<int>(values_.size()); }
  int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
  int offset(int i) const { return offsets_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& dims() const { return dims_; }
  const Vec& values() const { return values_; }

  Vec block(int i) const { return values_.segment(offset(i), dim(i)); }

  /// The bundle (x_i', x_{-i}): block i replaced, everything else untouched.
  BlockVector with_block(int i, const Vec& xi) const;
  void set_block(int i, const Vec& xi);

  bool same_shape(const BlockVector& other) const { return dims_ == other.dims_; }

  friend bool operator==(const BlockVector& a, const BlockVector& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  Vec values_;
};

}  // namespace gnep
