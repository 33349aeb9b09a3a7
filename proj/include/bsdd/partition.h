#pragma once

#include <vector>

#include "bsdd/linalg.h"

namespace bsdd {

/// Sizes k_1..k_n of an alpha-partition; every k_i >= 1, n >= 1.
class BlockPartition {
 public:
  /// Throws kSizeMismatch on an empty list or a nonpositive size.
  explicit BlockPartition(std::vector<Index> sizes);

  /// n copies of a block of size k.
  static BlockPartition uniform(Index n, Index k);

  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index total() const { return offsets_.back(); }
  Index size(Index i) const { return sizes_.at(i); }
  Index offset(Index i) const { return offsets_.at(i); }
  const std::vector<Index>& sizes() const { return sizes_; }

  bool operator==(const BlockPartition& other) const {
    return sizes_ == other.sizes_;
  }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

/// A square matrix viewed through an alpha-partition. Block indices are
/// 0-based in this API.
class PartitionedMatrix {
 public:
  /// Throws kNonSquare, kSizeMismatch (sum of sizes != order) or kNonFinite.
  PartitionedMatrix(Matrix matrix, BlockPartition partition);

  const Matrix& matrix() const { return matrix_; }
  const BlockPartition& partition() const { return partition_; }
  Index num_blocks() const { return partition_.num_blocks(); }

  /// Copy of block A_ij (k_i x k_j). Throws kIndexOutOfRange.
  Matrix block(Index i, Index j) const;
  /// True when every entry of A_ij is exactly zero.
  bool is_zero_block(Index i, Index j) const;

 private:
  Matrix matrix_;
  BlockPartition partition_;
};

PartitionedMatrix make_partitioned(const Matrix& a,
                                   const std::vector<Index>& sizes);

/// diag{B_1, ..., B_n}. Throws kNonSquareBlock.
Matrix assemble_block_diagonal(const std::vector<Matrix>& blocks);

}  // namespace bsdd
