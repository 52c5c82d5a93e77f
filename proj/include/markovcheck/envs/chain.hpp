#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "markovcheck/ccf.hpp"
#include "markovcheck/trajectory.hpp"

namespace markovcheck::envs {

// Finite Markov chain with a discrete behavior policy, used as an analytic
// oracle. Transitions may depend on the last `order` states and the current
// action: P(s' | s_t, s_{t-1}, ..., s_{t-order+1}, a_t).
struct ChainSpec {
    int state_count = 2;
    int order = 1;
    int action_count = 1;
    // Row-stochastic tensor, flattened as ((hist * A) + a) * S + s' where
    // hist = s_t * S^{order-1} + s_{t-1} * S^{order-2} + ... + s_{t-order+1}.
    std::vector<double> transition;
    // pi(a | s_t), flattened as s * A + a.
    std::vector<double> behavior;
    // Distribution of the initial state(s); empty means the stationary
    // distribution (order-1 chains only).
    std::vector<double> initial;
    // Real encoding of each state; empty means 0, 1, ..., S-1.
    std::vector<double> state_values;

    void validate() const;
    double value_of(int state) const;
    int state_of_value(double v) const;
};

Dataset simulate_chain(const ChainSpec& spec, int n_traj, int horizon,
                       std::uint64_t seed);

// Stationary distribution of the observed state under the behavior policy
// (order-1 chains).
Eigen::VectorXd chain_stationary_distribution(const ChainSpec& spec);

// Exact forward and backward CCFs of an order-1 chain under stationarity:
//   forward(mu | s, a)  = sum_{s'} P(s'|s,a) e^{i mu v(s')}
//   backward(nu | s, a) = sum_{s0,a0} P(X_{t-1}=(s0,a0) | S_t=s) e^{i nu.(v(s0),a0)}
struct ExactChainCcfs {
    std::shared_ptr<const CcfLearnerBase> forward;
    std::shared_ptr<const CcfLearnerBase> backward;
    Eigen::VectorXd stationary;
};

ExactChainCcfs exact_ccfs(const ChainSpec& spec);

}  // namespace markovcheck::envs
