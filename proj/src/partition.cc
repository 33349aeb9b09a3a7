#include "bsdd/partition.h"

#include <string>
#include <utility>

#include "bsdd/error.h"

namespace bsdd {

BlockPartition::BlockPartition(std::vector<Index> sizes)
    : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw Error(ErrorCode::kSizeMismatch, "partition has no blocks");
  }
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (Index k : sizes_) {
    if (k < 1) {
      throw Error(ErrorCode::kSizeMismatch,
                  "block size " + std::to_string(k) + " is not positive");
    }
    offsets_.push_back(offsets_.back() + k);
  }
}

BlockPartition BlockPartition::uniform(Index n, Index k) {
  return BlockPartition(std::vector<Index>(static_cast<std::size_t>(n), k));
}

PartitionedMatrix::PartitionedMatrix(Matrix matrix, BlockPartition partition)
    : matrix_(std::move(matrix)), partition_(std::move(partition)) {
  require_square(matrix_, "partitioned matrix");
  if (matrix_.rows() != partition_.total()) {
    throw Error(ErrorCode::kSizeMismatch,
                "partition sums to " + std::to_string(partition_.total()) +
                    " but the matrix has order " +
                    std::to_string(matrix_.rows()));
  }
  require_finite(matrix_, "partitioned matrix");
}

Matrix PartitionedMatrix::block(Index i, Index j) const {
  const Index n = num_blocks();
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "block (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") outside a " + std::to_string(n) + "x" +
                    std::to_string(n) + " grid");
  }
  return matrix_.block(partition_.offset(i), partition_.offset(j),
                       partition_.size(i), partition_.size(j));
}

bool PartitionedMatrix::is_zero_block(Index i, Index j) const {
  return (block(i, j).array() == 0.0).all();
}

PartitionedMatrix make_partitioned(const Matrix& a,
                                   const std::vector<Index>& sizes) {
  require_square(a, "matrix");
  return PartitionedMatrix(a, BlockPartition(sizes));
}

Matrix assemble_block_diagonal(const std::vector<Matrix>& blocks) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != blocks[i].cols() || blocks[i].size() == 0) {
      throw Error(ErrorCode::kNonSquareBlock,
                  "diagonal block " + std::to_string(i) + " is " +
                      std::to_string(blocks[i].rows()) + "x" +
                      std::to_string(blocks[i].cols()));
    }
  }
  return block_diagonal(blocks);
}

}  // namespace bsdd
