#ifndef TCBM_PARTITION_HPP
#define TCBM_PARTITION_HPP

#include "tcbm/model.hpp"

#include <span>
#include <vector>

namespace tcbm {

/// Splits pre-copy rounds 1..i_max into q contiguous blocks. The first
/// round of each block carries an updated rate; the remaining rounds of the
/// block hold it. Rounds 0 and i_max+1 are always updated.
///
/// When q does not divide i_max the first (i_max mod q) blocks get
/// ceil(i_max/q) rounds and the rest floor(i_max/q).
struct RatePartition {
  int i_max = 0;
  int q = 0;
  int s = 0;  // nominal block size i_max / q (integer division)
  std::vector<int> updated_indices;  // ascending: 0, block leaders..., i_max+1
  std::vector<int> block_of;         // round -> updated round it copies; size i_max + 2

  int num_reduced() const { return static_cast<int>(updated_indices.size()); }
  /// Position of `round`'s governing rate within the reduced variable vector.
  int reduced_index_of(int round) const;
};

/// Requires 1 <= q <= i_max, or q == 0 when i_max == 0.
RatePartition build_partition(int i_max, int q);

/// Degenerate partition for single-rate schedules: every round, the final
/// one included, copies round 0's rate.
RatePartition constant_partition(int i_max);

RateSchedule expand(const RatePartition& partition, std::span<const double> reduced_rates);

/// Inverse of expand on the updated rounds.
std::vector<double> reduce(const RatePartition& partition, const RateSchedule& schedule);

}  // namespace tcbm

#endif
