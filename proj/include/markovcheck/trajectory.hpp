#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "markovcheck/common.hpp"

namespace markovcheck {

// One trajectory of (state, action, reward) over decision points 0..T.
// Row t of `states` is S_t; `actions` holds A_0..A_T; `rewards` holds
// R_0..R_{T-1}, the reward received after taking A_t.
struct Trajectory {
    Eigen::MatrixXd states;       // (T+1) x p
    std::vector<int> actions;     // length T+1
    std::vector<double> rewards;  // length T
    std::string id;

    int horizon() const { return static_cast<int>(actions.size()) - 1; }
};

struct Dataset {
    std::vector<Trajectory> trajectories;
    int state_dim = 0;     // p
    int action_count = 0;  // |A|
    int horizon = 0;       // T, common across trajectories

    int n() const { return static_cast<int>(trajectories.size()); }

    // State-action pair X_{j,t} = (S_{j,t}, A_{j,t}) as a (p+1)-vector.
    Eigen::VectorXd state_action(int j, int t) const;

    // Throws DataError if any structural invariant is violated.
    void validate() const;
};

// Lag embedding. Level 1 returns the data unchanged. Level k >= 2 builds the
// state (S_t, A_t, S_{t+1}, A_{t+1}, ..., S_{t+k-1}) with the action cast to a
// real coordinate, action A_{t+k-1}, reward R_{t+k-1}, and horizon T-k+1.
Dataset lag_embed(const Dataset& d, int embed_level);

struct NormalizeResult {
    Dataset data;
    Eigen::VectorXd scale;               // per-coordinate divisor applied
    std::vector<int> degenerate_coords;  // constant coordinates left unscaled
};

// Divides each state coordinate by its pooled sample standard deviation
// across all (trajectory, time) points. Actions and rewards are untouched.
NormalizeResult normalize(const Dataset& d);

// Appends the previous reward as an extra state coordinate: the state at time
// t becomes (S_t, R_{t-1}) with R_{-1} taken as 0.
Dataset append_reward_to_state(const Dataset& d);

}  // namespace markovcheck
