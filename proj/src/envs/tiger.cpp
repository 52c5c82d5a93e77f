#include "markovcheck/envs/tiger.hpp"

#include <random>

namespace markovcheck::envs {

void TigerConfig::validate() const {
    if (!(listen_accuracy >= 0.5 && listen_accuracy <= 1.0))
        throw DataError("tiger: listen_accuracy must be in [0.5, 1]");
    if (horizon < 1) throw DataError("tiger: horizon must be positive");
}

Dataset simulate_tiger(const TigerConfig& cfg, int n_traj, std::uint64_t seed) {
    cfg.validate();
    if (n_traj < 1) throw DataError("tiger: need at least one episode");
    const int T = cfg.horizon;

    Dataset d;
    d.state_dim = cfg.augment_hidden ? 2 : 1;
    d.action_count = 3;
    d.horizon = T;
    d.trajectories.resize(n_traj);
    for (int j = 0; j < n_traj; ++j) {
        std::mt19937_64 rng(derive_seed(seed, 0x7469676572ULL, j));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Trajectory& traj = d.trajectories[j];
        traj.id = "tiger" + std::to_string(j);
        traj.states.resize(T + 1, d.state_dim);
        traj.actions.resize(T + 1);
        traj.rewards.assign(T, 0.0);

        const int hidden = unif(rng) < 0.5 ? 0 : 1;
        for (int t = 0; t <= T; ++t) {
            const int obs = unif(rng) < cfg.listen_accuracy ? hidden : 1 - hidden;
            traj.states(t, 0) = static_cast<double>(obs);
            if (cfg.augment_hidden) traj.states(t, 1) = static_cast<double>(hidden);
            traj.actions[t] = t < T ? 2 : (unif(rng) < 0.5 ? 0 : 1);
        }
        traj.rewards[T - 1] = traj.actions[T] == hidden ? cfg.penalty : cfg.reward;
    }
    return d;
}

}  // namespace markovcheck::envs
