#include "markovcheck/trajectory.hpp"

#include <cmath>

namespace markovcheck {

Eigen::VectorXd Dataset::state_action(int j, int t) const {
    const Trajectory& traj = trajectories.at(j);
    Eigen::VectorXd x(state_dim + 1);
    x.head(state_dim) = traj.states.row(t).transpose();
    x(state_dim) = static_cast<double>(traj.actions.at(t));
    return x;
}

void Dataset::validate() const {
    if (trajectories.empty()) throw DataError("dataset holds no trajectories");
    if (state_dim < 1) throw DataError("state dimension must be positive");
    if (action_count < 1) throw DataError("action count must be positive");
    for (int j = 0; j < n(); ++j) {
        const Trajectory& traj = trajectories[j];
        const std::string where = "trajectory '" + traj.id + "'";
        if (traj.states.cols() != state_dim)
            throw DataError(where + ": state dimension mismatch");
        if (traj.horizon() != horizon)
            throw DataError(where + ": horizon mismatch");
        if (traj.states.rows() != horizon + 1)
            throw DataError(where + ": states and actions have different lengths");
        if (static_cast<int>(traj.rewards.size()) != horizon)
            throw DataError(where + ": rewards must have exactly one fewer entry");
        for (int a : traj.actions)
            if (a < 0 || a >= action_count)
                throw DataError(where + ": action outside declared set");
        if (!traj.states.allFinite())
            throw DataError(where + ": non-finite state value");
        for (double r : traj.rewards)
            if (!std::isfinite(r)) throw DataError(where + ": non-finite reward");
    }
}

Dataset lag_embed(const Dataset& d, int embed_level) {
    if (embed_level < 1) throw DataError("embed level must be at least 1");
    if (embed_level > d.horizon)
        throw DataError("embed level " + std::to_string(embed_level) +
                        " exhausts horizon T=" + std::to_string(d.horizon));
    if (embed_level == 1) return d;

    const int k = embed_level;
    const int p = d.state_dim;
    const int new_dim = k * p + (k - 1);
    const int new_horizon = d.horizon - k + 1;

    Dataset out;
    out.state_dim = new_dim;
    out.action_count = d.action_count;
    out.horizon = new_horizon;
    out.trajectories.reserve(d.trajectories.size());
    for (const Trajectory& traj : d.trajectories) {
        Trajectory e;
        e.id = traj.id;
        e.states.resize(new_horizon + 1, new_dim);
        e.actions.resize(new_horizon + 1);
        e.rewards.resize(new_horizon);
        for (int t = 0; t <= new_horizon; ++t) {
            int col = 0;
            for (int lag = 0; lag < k; ++lag) {
                e.states.row(t).segment(col, p) = traj.states.row(t + lag);
                col += p;
                if (lag + 1 < k) e.states(t, col++) = static_cast<double>(traj.actions[t + lag]);
            }
            e.actions[t] = traj.actions[t + k - 1];
            if (t < new_horizon) e.rewards[t] = traj.rewards[t + k - 1];
        }
        out.trajectories.push_back(std::move(e));
    }
    return out;
}

NormalizeResult normalize(const Dataset& d) {
    d.validate();
    const int p = d.state_dim;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(p);
    long long count = 0;
    for (const Trajectory& traj : d.trajectories) {
        sum += traj.states.colwise().sum().transpose();
        sumsq += traj.states.array().square().colwise().sum().matrix().transpose();
        count += traj.states.rows();
    }

    NormalizeResult result;
    result.scale = Eigen::VectorXd::Ones(p);
    for (int c = 0; c < p; ++c) {
        double mean = sum(c) / static_cast<double>(count);
        double ss = sumsq(c) - static_cast<double>(count) * mean * mean;
        double var = count > 1 ? ss / static_cast<double>(count - 1) : 0.0;
        if (var > 0.0 && std::isfinite(var)) {
            result.scale(c) = std::sqrt(var);
        } else {
            result.degenerate_coords.push_back(c);
        }
    }

    result.data = d;
    for (Trajectory& traj : result.data.trajectories)
        traj.states.array().rowwise() /= result.scale.transpose().array();
    return result;
}

Dataset append_reward_to_state(const Dataset& d) {
    Dataset out;
    out.state_dim = d.state_dim + 1;
    out.action_count = d.action_count;
    out.horizon = d.horizon;
    out.trajectories.reserve(d.trajectories.size());
    for (const Trajectory& traj : d.trajectories) {
        Trajectory a;
        a.id = traj.id;
        a.actions = traj.actions;
        a.rewards = traj.rewards;
        a.states.resize(traj.states.rows(), d.state_dim + 1);
        a.states.leftCols(d.state_dim) = traj.states;
        a.states(0, d.state_dim) = 0.0;
        for (int t = 1; t < traj.states.rows(); ++t)
            a.states(t, d.state_dim) = traj.rewards[t - 1];
        out.trajectories.push_back(std::move(a));
    }
    return out;
}

}  // namespace markovcheck
