#include "tcbm/partition.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace tcbm;

TEST(BuildPartition, DivisibleBlocks) {
  const auto p = build_partition(6, 3);
  EXPECT_EQ(p.s, 2);
  EXPECT_EQ(p.updated_indices, (std::vector<int>{0, 1, 3, 5, 7}));
  EXPECT_EQ(p.block_of[2], 1);
  EXPECT_EQ(p.block_of[4], 3);
  EXPECT_EQ(p.block_of[6], 5);
  EXPECT_EQ(p.num_reduced(), 5);
}

TEST(BuildPartition, SingleBlock) {
  const auto p = build_partition(4, 1);
  EXPECT_EQ(p.updated_indices, (std::vector<int>{0, 1, 5}));
  for (int i = 2; i <= 4; ++i) EXPECT_EQ(p.block_of[i], 1);
}

TEST(BuildPartition, NonDivisibleBlocksTakeCeilingFirst) {
  const auto p = build_partition(5, 2);
  EXPECT_EQ(p.updated_indices, (std::vector<int>{0, 1, 4, 6}));
  EXPECT_EQ(p.block_of[2], 1);
  EXPECT_EQ(p.block_of[3], 1);
  EXPECT_EQ(p.block_of[5], 4);
}

TEST(BuildPartition, BlocksCoverEveryPreCopyRoundOnce) {
  for (int i_max = 1; i_max <= 29; ++i_max) {
    for (int q = 1; q <= i_max; ++q) {
      const auto p = build_partition(i_max, q);
      ASSERT_EQ(p.num_reduced(), q + 2);
      std::vector<int> sizes(static_cast<std::size_t>(i_max) + 2, 0);
      int previous_leader = 0;
      for (int i = 1; i <= i_max; ++i) {
        const int leader = p.block_of[i];
        ++sizes[static_cast<std::size_t>(leader)];
        ASSERT_LE(leader, i);
        ASSERT_GE(leader, previous_leader);  // contiguous blocks
        previous_leader = leader;
      }
      int blocks = 0;
      for (int s : sizes) blocks += s > 0 ? 1 : 0;
      EXPECT_EQ(blocks, q);
    }
  }
}

TEST(BuildPartition, RejectsQOutOfRange) {
  EXPECT_THROW(build_partition(4, 0), Error);
  EXPECT_THROW(build_partition(4, 5), Error);
  EXPECT_THROW(build_partition(-1, 1), Error);
  EXPECT_NO_THROW(build_partition(0, 0));
}

TEST(Expand, FigureTwoCase) {
  const auto p = build_partition(6, 3);
  const std::vector<double> reduced{10, 11, 13, 15, 17};
  const auto s = expand(p, reduced);
  EXPECT_EQ(s.rates, (std::vector<double>{10, 11, 11, 13, 13, 15, 15, 17}));
  EXPECT_EQ(reduce(p, s), reduced);
}

TEST(Expand, FullPartitionIsIdentity) {
  const auto p = build_partition(4, 4);
  const std::vector<double> reduced{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(expand(p, reduced).rates, reduced);
}

TEST(Expand, SingleLeader) {
  const auto p = build_partition(4, 1);
  const std::vector<double> reduced{1.0, 2.0, 3.0};
  EXPECT_EQ(expand(p, reduced).rates, (std::vector<double>{1, 2, 2, 2, 2, 3}));
}

TEST(Expand, LengthMismatch) {
  const auto p = build_partition(4, 1);
  const std::vector<double> reduced{1.0, 2.0};
  EXPECT_THROW(expand(p, reduced), Error);
}

TEST(ConstantPartition, EveryRoundCopiesRoundZero) {
  const auto p = constant_partition(3);
  EXPECT_EQ(p.num_reduced(), 1);
  const std::vector<double> reduced{7.0};
  EXPECT_EQ(expand(p, reduced).rates, (std::vector<double>{7, 7, 7, 7, 7}));
}
