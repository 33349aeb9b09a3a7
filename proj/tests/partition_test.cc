#include "bsdd/partition.h"

#include <gtest/gtest.h>

#include "bsdd/error.h"
#include "test_util.h"

namespace bsdd {
namespace {

using testing::Rng;

Matrix triangular6() {
  Matrix a(6, 6);
  a << -6, 4, 0, 0, 0, 0,
       8, -7, 0, 0, 0, 0,
       4, 6, -1, -2, 4, 0,
       7, -2, 3, -1, 6, 0,
       1, 2, 1, 0, -7, 0,
       -1, 7, 4, 6, -5, -2;
  return a;
}

TEST(BlockPartition, Validation) {
  EXPECT_THROW(BlockPartition({}), Error);
  EXPECT_THROW(BlockPartition({2, 0}), Error);
  const BlockPartition p({2, 3, 1});
  EXPECT_EQ(p.total(), 6);
  EXPECT_EQ(p.num_blocks(), 3);
  EXPECT_EQ(p.offset(2), 5);
  EXPECT_EQ(BlockPartition::uniform(3, 2), BlockPartition({2, 2, 2}));
}

TEST(MakePartitioned, Sizes) {
  EXPECT_NO_THROW(make_partitioned(triangular6(), {2, 3, 1}));
  EXPECT_NO_THROW(make_partitioned(Matrix::Zero(4, 4), {2, 2}));
  try {
    make_partitioned(Matrix::Zero(5, 5), {2, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSizeMismatch);
  }
  try {
    make_partitioned(Matrix::Zero(4, 5), {2, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonSquare);
  }
}

TEST(PartitionedMatrix, Blocks) {
  const PartitionedMatrix p = make_partitioned(triangular6(), {2, 3, 1});
  Matrix a31(1, 2);
  a31 << -1, 7;
  EXPECT_EQ(p.block(2, 0), a31);
  EXPECT_EQ(p.block(1, 2), Matrix::Zero(3, 1));
  EXPECT_TRUE(p.is_zero_block(1, 2));
  EXPECT_FALSE(p.is_zero_block(2, 0));
  try {
    p.block(3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
  const PartitionedMatrix whole = make_partitioned(triangular6(), {6});
  EXPECT_EQ(whole.block(0, 0), triangular6());
}

TEST(PartitionedMatrix, BlockIsACopy) {
  const PartitionedMatrix p = make_partitioned(triangular6(), {2, 3, 1});
  Matrix b = p.block(0, 0);
  b(0, 0) = 100;
  EXPECT_EQ(p.matrix()(0, 0), -6);
}

TEST(AssembleBlockDiagonal, Examples) {
  Matrix q1(2, 2);
  q1 << 7, 7, 7, 11;
  const Matrix q = assemble_block_diagonal({q1, q1});
  EXPECT_EQ(q.topLeftCorner(2, 2), q1);
  EXPECT_EQ(q.bottomRightCorner(2, 2), q1);
  EXPECT_EQ(q.topRightCorner(2, 2), Matrix::Zero(2, 2));
  EXPECT_EQ(assemble_block_diagonal({Matrix::Constant(1, 1, -1)}), Matrix::Constant(1, 1, -1));
  EXPECT_EQ(assemble_block_diagonal({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}),
            Matrix::Identity(5, 5));
  EXPECT_THROW(assemble_block_diagonal({Matrix::Zero(2, 3)}), Error);
}

TEST(PartitionProperties, RoundTrips) {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<Index> sizes = testing::random_sizes(rng, 6, 4);
    const BlockPartition part(sizes);
    const Matrix a = testing::gaussian(part.total(), part.total(), rng);
    const PartitionedMatrix p(a, part);

    Matrix rebuilt(a.rows(), a.cols());
    Index row = 0;
    for (Index i = 0; i < part.num_blocks(); ++i) {
      Index col = 0;
      for (Index j = 0; j < part.num_blocks(); ++j) {
        const Matrix b = p.block(i, j);
        ASSERT_EQ(b.rows(), sizes[static_cast<std::size_t>(i)]);
        ASSERT_EQ(b.cols(), sizes[static_cast<std::size_t>(j)]);
        rebuilt.block(row, col, b.rows(), b.cols()) = b;
        col += b.cols();
      }
      row += sizes[static_cast<std::size_t>(i)];
    }
    EXPECT_EQ(rebuilt, a);

    std::vector<Matrix> diag;
    for (Index i = 0; i < part.num_blocks(); ++i) diag.push_back(p.block(i, i));
    const Matrix d = assemble_block_diagonal(diag);
    const PartitionedMatrix pd(d, part);
    std::vector<Matrix> again;
    for (Index i = 0; i < part.num_blocks(); ++i) again.push_back(pd.block(i, i));
    EXPECT_EQ(assemble_block_diagonal(again), d);
  }
}

}  // namespace
}  // namespace bsdd
