#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "markovcheck/trajectory.hpp"

namespace markovcheck {

// Column declaration for the trajectory CSV format:
//   traj_id,t,s_1,...,s_p,action,reward
// `t` is a 0-based contiguous integer per trajectory; `reward` may be empty on
// the last row of each trajectory.
struct CsvSchema {
    int state_dim = 0;
    int action_count = 0;
    // Target horizon T. Defaults to the minimum horizon across trajectories;
    // longer trajectories are truncated either way.
    std::optional<int> horizon;
};

struct LoadResult {
    Dataset data;
    int truncated_trajectories = 0;
};

LoadResult load_dataset(std::istream& in, const CsvSchema& schema);
LoadResult load_dataset_file(const std::string& path, const CsvSchema& schema);

void write_dataset(std::ostream& out, const Dataset& d);
void write_dataset_file(const std::string& path, const Dataset& d);

}  // namespace markovcheck
