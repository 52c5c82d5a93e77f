#pragma once

#include <cstdint>

#include "markovcheck/trajectory.hpp"

namespace markovcheck::envs {

// Tiger problem. Actions: 0 = open left, 1 = open right, 2 = listen.
// The hidden tiger location is fixed per episode; listening yields a noisy
// observation of it. The behaviour policy listens at t = 0..T-1 and opens a
// uniformly random door at T.
struct TigerConfig {
    double listen_accuracy = 0.7;
    double penalty = -100.0;  // opening the tiger door
    double reward = 10.0;     // opening the other door
    int horizon = 20;
    // If set, the state is (observation, hidden location) and the Markov
    // property holds; otherwise the state is the observation alone.
    bool augment_hidden = false;

    void validate() const;
};

// Episodes come out as fixed-length trajectories over t = 0..T with zero
// rewards everywhere except the final reward slot, which carries the payoff
// of the door opened at time T.
Dataset simulate_tiger(const TigerConfig& cfg, int n_traj, std::uint64_t seed);

}  // namespace markovcheck::envs
