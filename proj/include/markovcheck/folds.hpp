#pragma once

#include <cstdint>
#include <vector>

#include "markovcheck/common.hpp"

namespace markovcheck {

// Partition of trajectory indices {0,...,n-1} into folds 0..L-1 whose sizes
// differ by at most one. Folds split whole trajectories, never time points.
struct FoldAssignment {
    std::vector<int> fold_of_trajectory;  // size n, values in [0, fold_count)
    int fold_count = 0;

    int n() const { return static_cast<int>(fold_of_trajectory.size()); }
    std::vector<int> fold_members(int fold) const;
    std::vector<int> fold_complement(int fold) const;
    void validate() const;
};

// Uniformly random partition, reproducible under seed. If fold_count exceeds
// n it is clamped to n. Requires n >= 2.
FoldAssignment make_folds(int n, int fold_count, std::uint64_t seed);

}  // namespace markovcheck
