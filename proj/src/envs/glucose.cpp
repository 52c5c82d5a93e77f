#include "markovcheck/envs/glucose.hpp"

#include <cmath>
#include <random>

namespace markovcheck::envs {

GlucoseConfig GlucoseConfig::defaults(int lag_order) {
    if (lag_order < 1) throw DataError("glucose: lag order must be positive");
    GlucoseConfig cfg;
    cfg.lag_order = lag_order;
    const double g0 = 0.5, c0 = 0.3, e0 = -0.4, a0 = -25.0;
    double decay = 1.0;
    for (int lag = 0; lag < lag_order; ++lag) {
        // Glucose weights follow the published-style sequence 0.5, 0.25,
        // 0.12, 0.06; the rest halve per lag.
        double g = lag == 2 ? 0.12 : (lag == 3 ? 0.06 : g0 * decay);
        cfg.state_coef.push_back({g, c0 * decay, e0 * decay});
        cfg.action_coef.push_back(a0 * decay);
        decay *= 0.5;
    }
    return cfg;
}

void GlucoseConfig::validate() const {
    if (lag_order < 1) throw DataError("glucose: lag order must be positive");
    if (static_cast<int>(state_coef.size()) != lag_order ||
        static_cast<int>(action_coef.size()) != lag_order)
        throw DataError("glucose: coefficient arrays must have lag_order entries");
    if (noise_sd < 0.0) throw DataError("glucose: noise sd must be nonnegative");
    for (double prob : {meal_prob, exercise_prob})
        if (!(prob >= 0.0 && prob <= 1.0))
            throw DataError("glucose: probabilities must lie in [0, 1]");
    if (action_probs.empty()) throw DataError("glucose: empty action distribution");
    double sum = 0.0;
    for (double prob : action_probs) {
        if (!(prob >= 0.0)) throw DataError("glucose: negative action probability");
        sum += prob;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("glucose: action probabilities must sum to 1");
    if (burn_in < 0) throw DataError("glucose: burn_in must be nonnegative");
    if (meal_sd < 0.0 || exercise_sd < 0.0 || init_glucose_sd < 0.0)
        throw DataError("glucose: standard deviations must be nonnegative");
}

double glucose_linear_mean(const GlucoseConfig& cfg,
                           const std::vector<std::array<double, 3>>& recent_states,
                           const std::vector<int>& recent_actions) {
    if (static_cast<int>(recent_states.size()) < cfg.lag_order ||
        static_cast<int>(recent_actions.size()) < cfg.lag_order)
        throw DataError("glucose: need lag_order recent states and actions");
    double mean = cfg.intercept;
    for (int i = 0; i < cfg.lag_order; ++i) {
        const auto& s = recent_states[i];
        const auto& beta = cfg.state_coef[i];
        mean += beta[0] * s[0] + beta[1] * s[1] + beta[2] * s[2];
        mean += cfg.action_coef[i] * static_cast<double>(recent_actions[i]);
    }
    return mean;
}

Dataset simulate_glucose(const GlucoseConfig& cfg, int n_traj, int horizon,
                         std::uint64_t seed) {
    cfg.validate();
    if (n_traj < 1) throw DataError("glucose: need at least one trajectory");
    if (horizon < 1) throw DataError("glucose: horizon must be positive");

    const int kappa = cfg.lag_order;
    const int total = kappa + cfg.burn_in + horizon + 1;
    const int emit_from = kappa + cfg.burn_in;

    Dataset d;
    d.state_dim = 3;
    d.action_count = static_cast<int>(cfg.action_probs.size());
    d.horizon = horizon;
    d.trajectories.resize(n_traj);
    for (int j = 0; j < n_traj; ++j) {
        std::mt19937_64 rng(derive_seed(seed, 0x676c75636fULL, j));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        auto draw_action = [&]() {
            double u = unif(rng);
            double acc = 0.0;
            for (std::size_t a = 0; a < cfg.action_probs.size(); ++a) {
                acc += cfg.action_probs[a];
                if (u <= acc) return static_cast<int>(a);
            }
            return static_cast<int>(cfg.action_probs.size()) - 1;
        };

        std::vector<std::array<double, 3>> states(total);
        std::vector<int> actions(total);
        std::vector<std::array<double, 3>> recent(kappa);
        std::vector<int> recent_actions(kappa);
        for (int t = 0; t < total; ++t) {
            double meal = unif(rng) < cfg.meal_prob
                              ? cfg.meal_mean + cfg.meal_sd * gauss(rng)
                              : 0.0;
            double exercise = unif(rng) < cfg.exercise_prob
                                  ? cfg.exercise_mean + cfg.exercise_sd * gauss(rng)
                                  : 0.0;
            double glucose;
            if (t < kappa) {
                glucose = cfg.init_glucose_mean + cfg.init_glucose_sd * gauss(rng);
            } else {
                for (int i = 0; i < kappa; ++i) {
                    recent[i] = states[t - 1 - i];
                    recent_actions[i] = actions[t - 1 - i];
                }
                glucose = glucose_linear_mean(cfg, recent, recent_actions) +
                          cfg.noise_sd * gauss(rng);
            }
            states[t] = {glucose, meal, exercise};
            actions[t] = draw_action();
        }

        Trajectory& traj = d.trajectories[j];
        traj.id = "glucose" + std::to_string(j);
        traj.states.resize(horizon + 1, 3);
        traj.actions.resize(horizon + 1);
        traj.rewards.resize(horizon);
        for (int t = 0; t <= horizon; ++t) {
            const auto& s = states[emit_from + t];
            traj.states(t, 0) = s[0];
            traj.states(t, 1) = s[1];
            traj.states(t, 2) = s[2];
            traj.actions[t] = actions[emit_from + t];
            if (t < horizon) traj.rewards[t] = igc_reward(states[emit_from + t + 1][0]);
        }
    }
    return d;
}

int discretize_insulin(double insulin) {
    if (insulin < 0.0) throw DataError("insulin dose must be nonnegative");
    if (insulin == 0.0) return 0;
    if (insulin <= 4.0) return 1;
    if (insulin <= 8.0) return 2;
    if (insulin <= 12.0) return 3;
    return 4;
}

double igc_reward(double next_glucose) {
    if (next_glucose < 80.0) {
        double gap = 80.0 - next_glucose;
        return -gap * gap / 30.0;
    }
    if (next_glucose <= 140.0) return 0.0;
    return -std::pow(next_glucose - 140.0, 1.35) / 30.0;
}

}  // namespace markovcheck::envs
