#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "markovcheck/envs/glucose.hpp"
#include "markovcheck/forest.hpp"
#include "markovcheck/ma_test.hpp"
#include "markovcheck/trajectory.hpp"

namespace markovcheck {

class Regressor {
  public:
    virtual ~Regressor() = default;
    virtual void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) = 0;
    virtual double predict(const double* x) const = 0;
};

// Forest regression with leaf-mean prediction.
class ForestRegressor : public Regressor {
  public:
    explicit ForestRegressor(ForestParams params) : params_(std::move(params)) {}
    void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) override;
    double predict(const double* x) const override;

    const Forest& forest() const { return forest_; }
    const Eigen::VectorXd& responses() const { return responses_; }
    void restore(Forest forest, Eigen::VectorXd responses);

  private:
    void cache_leaf_means();
    ForestParams params_;
    Forest forest_;
    Eigen::VectorXd responses_;
    std::vector<std::vector<double>> leaf_means_;  // [tree][leaf]
};

// Exact regressor that memorizes the mean response per distinct predictor
// vector; unseen points predict 0. Used with finite state spaces.
class TabularRegressor : public Regressor {
  public:
    void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) override;
    double predict(const double* x) const override;

  private:
    int dim_ = 0;
    std::vector<std::pair<std::vector<double>, double>> cells_;
};

struct RegressorSpec {
    bool tabular = false;
    ForestParams forest;
};

// One regressor per action; actions never observed predict 0.
struct QFunction {
    std::vector<std::unique_ptr<Regressor>> models;
    int action_count = 0;
    int iterations = 0;

    double value(const double* state, int action) const;
    double max_value(const double* state) const;
    int greedy(const double* state) const;  // ties resolve to the lowest action
};

struct Policy {
    std::shared_ptr<const QFunction> q;
    int action(const double* state) const { return q->greedy(state); }
};

struct FqiParams {
    double discount = 0.9;
    int max_iterations = 50;
    double target_tol = 1e-4;  // early stop when targets move less than this
    RegressorSpec regressor;
    std::uint64_t seed = 0;
};

struct FqiResult {
    std::shared_ptr<QFunction> q;
    Policy policy;
    int iterations = 0;
    double final_target_delta = 0.0;
};

// Fitted-Q iteration on the dataset's transitions with targets
// R + discount * max_a Q_{k-1}(S', a).
FqiResult fqi(const Dataset& d, const FqiParams& params);

// Policy evaluation iteration with targets R + discount * Q_{k-1}(S', pi(S')).
std::shared_ptr<QFunction> fqe(const Dataset& d, const Policy& policy,
                               const FqiParams& params);

// Generative environment for policy-driven rollouts.
class Environment {
  public:
    virtual ~Environment() = default;
    virtual int state_dim() const = 0;
    virtual int action_count() const = 0;
    virtual void reset(std::mt19937_64& rng) = 0;
    virtual Eigen::VectorXd state() const = 0;
    virtual int behavior_action(std::mt19937_64& rng) = 0;
    // Applies the action, advances the state, returns the reward.
    virtual double step(int action, std::mt19937_64& rng) = 0;
};

class GlucoseEnv : public Environment {
  public:
    explicit GlucoseEnv(envs::GlucoseConfig cfg);
    int state_dim() const override { return 3; }
    int action_count() const override {
        return static_cast<int>(cfg_.action_probs.size());
    }
    void reset(std::mt19937_64& rng) override;
    Eigen::VectorXd state() const override;
    int behavior_action(std::mt19937_64& rng) override;
    double step(int action, std::mt19937_64& rng) override;

  private:
    envs::GlucoseConfig cfg_;
    std::vector<std::array<double, 3>> history_;  // most recent last
    std::vector<int> action_history_;
};

// Embedded state (S_{t-k+1}, A_{t-k+1}, ..., S_t) from the most recent
// `embed_level` states and the actions between them; layout matches
// lag_embed.
Eigen::VectorXd embed_recent(const std::vector<Eigen::VectorXd>& states,
                             const std::vector<int>& actions, int embed_level);

// Monte Carlo discounted return: behaviour actions during the first `warmup`
// steps, policy actions afterwards, discounting from the end of warmup over
// t = warmup .. horizon-1.
double rollout_value(Environment& env,
                     const std::function<int(const Eigen::VectorXd&)>& policy,
                     int embed_level, int n_traj, int warmup, int horizon,
                     double discount, std::uint64_t seed);

struct ValueTableRow {
    int k = 0;
    double value = 0.0;
    double se = 0.0;
    int n_reps = 0;
};

struct ValueDifferenceParams {
    envs::GlucoseConfig generator = envs::GlucoseConfig::defaults();
    int n_traj = 10;
    int horizon = 300;
    std::vector<int> ks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int max_level = 10;  // K for order selection
    TestConfig test;     // inner test configuration; alpha from test.alpha
    FqiParams fqi;
    int eval_trajectories = 100;
    int eval_warmup = 10;
    int eval_horizon = 50;
    int replications = 20;
    std::uint64_t seed = 0;
};

struct ValueDifferenceResult {
    std::vector<ValueTableRow> rows;  // mean of V(k) - V(selected order)
    std::vector<int> selected_orders;
};

// Generates data, selects the order, learns a policy per candidate k, and
// compares rollout values against the selected-order policy.
ValueDifferenceResult value_difference_protocol(const ValueDifferenceParams& params);

struct CrossValueParams {
    std::vector<int> ks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    FqiParams fqi;
    FqiParams fqe;
    int max_splits = 0;  // 0 = all balanced train/test splits
    std::uint64_t seed = 0;
};

struct CrossValueResult {
    std::vector<ValueTableRow> rows;
    int splits_used = 0;
};

// For each balanced train/test split and each k: FQI on the training half,
// FQE of the learned policy on the test half, evaluated at the last feasible
// embedded state of each evaluation trajectory.
CrossValueResult cross_validated_value(const Dataset& d, const Dataset& eval_data,
                                       const CrossValueParams& params);

// QFunction blob (forest-backed models only); round-trips exactly.
std::string qfunction_to_bytes(const QFunction& q);
std::shared_ptr<QFunction> qfunction_from_bytes(const std::string& bytes);

}  // namespace markovcheck
