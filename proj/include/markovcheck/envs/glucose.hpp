#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "markovcheck/trajectory.hpp"

namespace markovcheck::envs {

// Synthetic type-1-diabetes generator. The state is S_t = (G_t, C_t, Ex_t):
// blood glucose, carbohydrate intake, exercise intensity. Glucose follows a
// linear model over the last `lag_order` state-action pairs:
//   G_t = intercept + sum_i (beta_i . S_{t-i} + c_i A_{t-i}) + E_t,
// with E_t ~ N(0, noise_sd^2). Meals and exercise arrive as independent
// Bernoulli events with Gaussian amounts; actions are i.i.d. multinoulli over
// five insulin levels. The reward is igc_reward(G_{t+1}).
struct GlucoseConfig {
    int lag_order = 4;         // kappa
    double intercept = 100.0;  // alpha
    // Per-lag coefficients on (G, C, Ex); index 0 is lag 1.
    std::vector<std::array<double, 3>> state_coef;
    std::vector<double> action_coef;  // c_i, index 0 is lag 1
    double noise_sd = 3.0;
    double meal_prob = 0.3;
    double exercise_prob = 0.2;
    double meal_mean = 50.0, meal_sd = 10.0;
    double exercise_mean = 30.0, exercise_sd = 10.0;
    std::vector<double> action_probs = {0.2, 0.2, 0.2, 0.2, 0.2};
    int burn_in = 10;
    double init_glucose_mean = 120.0, init_glucose_sd = 15.0;

    // Documented synthetic defaults with geometrically decaying lag effects:
    // positive glucose autoregression and meal effects, negative insulin and
    // exercise effects.
    static GlucoseConfig defaults(int lag_order = 4);
    void validate() const;
};

// The linear predictor of the next glucose given the last lag_order states
// and actions, most recent first. Exposes the generator's coefficient
// support: entries beyond lag_order never enter.
double glucose_linear_mean(const GlucoseConfig& cfg,
                           const std::vector<std::array<double, 3>>& recent_states,
                           const std::vector<int>& recent_actions);

// Horizon T means T+1 emitted decision points after the burn-in is dropped.
Dataset simulate_glucose(const GlucoseConfig& cfg, int n_traj, int horizon,
                         std::uint64_t seed);

// Insulin dose -> action level in {0..4}: 0 for zero insulin, m when
// 4m-4 < dose <= 4m (m = 1, 2, 3), and 4 above 12.
int discretize_insulin(double insulin);

// Index of Glycemic Control penalty of the next glucose value; zero on the
// target band [80, 140], negative outside it.
double igc_reward(double next_glucose);

}  // namespace markovcheck::envs
