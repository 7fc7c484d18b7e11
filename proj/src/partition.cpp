#include "tcbm/partition.hpp"

#include <algorithm>
#include <sstream>

namespace tcbm {

int RatePartition::reduced_index_of(int round) const {
  const int leader = block_of.at(static_cast<std::size_t>(round));
  const auto it = std::lower_bound(updated_indices.begin(), updated_indices.end(), leader);
  return static_cast<int>(it - updated_indices.begin());
}

RatePartition build_partition(int i_max, int q) {
  const bool ok = (i_max == 0 && q == 0) || (i_max >= 1 && q >= 1 && q <= i_max);
  if (!ok) {
    std::ostringstream os;
    os << "partition requires 1 <= q <= i_max (got i_max = " << i_max << ", q = " << q << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }

  RatePartition p;
  p.i_max = i_max;
  p.q = q;
  p.s = q > 0 ? i_max / q : 0;
  p.block_of.resize(static_cast<std::size_t>(i_max) + 2);
  p.updated_indices.push_back(0);
  p.block_of[0] = 0;

  const int remainder = q > 0 ? i_max % q : 0;
  int round = 1;
  for (int j = 0; j < q; ++j) {
    const int size = p.s + (j < remainder ? 1 : 0);
    const int leader = round;
    p.updated_indices.push_back(leader);
    for (int k = 0; k < size; ++k) p.block_of[static_cast<std::size_t>(round++)] = leader;
  }
  p.updated_indices.push_back(i_max + 1);
  p.block_of[static_cast<std::size_t>(i_max) + 1] = i_max + 1;
  return p;
}

RatePartition constant_partition(int i_max) {
  if (i_max < 0) throw Error(ErrorKind::InvalidArgument, "i_max must be >= 0");
  RatePartition p;
  p.i_max = i_max;
  p.q = 0;
  p.s = 0;
  p.updated_indices = {0};
  p.block_of.assign(static_cast<std::size_t>(i_max) + 2, 0);
  return p;
}

RateSchedule expand(const RatePartition& partition, std::span<const double> reduced_rates) {
  if (reduced_rates.size() != partition.updated_indices.size()) {
    std::ostringstream os;
    os << "expected " << partition.updated_indices.size() << " reduced rates, got " << reduced_rates.size();
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  RateSchedule schedule;
  schedule.i_max = partition.i_max;
  schedule.rates.resize(partition.block_of.size());
  for (std::size_t i = 0; i < schedule.rates.size(); ++i) {
    schedule.rates[i] = reduced_rates[static_cast<std::size_t>(partition.reduced_index_of(static_cast<int>(i)))];
  }
  return schedule;
}

std::vector<double> reduce(const RatePartition& partition, const RateSchedule& schedule) {
  if (schedule.i_max != partition.i_max) throw Error(ErrorKind::InvalidArgument, "schedule and partition disagree on i_max");
  std::vector<double> out;
  out.reserve(partition.updated_indices.size());
  for (int i : partition.updated_indices) out.push_back(schedule.rates.at(static_cast<std::size_t>(i)));
  return out;
}

}  // namespace tcbm
