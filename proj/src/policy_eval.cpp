#include "markovcheck/policy_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "markovcheck/order_select.hpp"

namespace markovcheck {

namespace {
constexpr std::uint64_t kFqiStream = 0x667169ULL;
constexpr std::uint64_t kRolloutStream = 0x726f6c6cULL;
constexpr std::uint64_t kProtoStream = 0x70726f74ULL;
}  // namespace

void ForestRegressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    ForestParams params = params_;
    // Small action subsets still need a fit; shrink the leaf floor if needed.
    params.min_leaf_size =
        std::max(1, std::min<int>(params.min_leaf_size, static_cast<int>(X.rows()) / 2));
    forest_ = fit_forest(X, y, params);
    responses_ = y;
    cache_leaf_means();
}

void ForestRegressor::restore(Forest forest, Eigen::VectorXd responses) {
    forest_ = std::move(forest);
    responses_ = std::move(responses);
    cache_leaf_means();
}

void ForestRegressor::cache_leaf_means() {
    leaf_means_.assign(forest_.trees.size(), {});
    for (std::size_t m = 0; m < forest_.trees.size(); ++m) {
        const Tree& tree = forest_.trees[m];
        leaf_means_[m].resize(tree.leaf_count());
        for (int l = 0; l < tree.leaf_count(); ++l) {
            double sum = 0.0;
            for (int id : tree.leaf_members[l]) sum += responses_(id);
            leaf_means_[m][l] = sum / static_cast<double>(tree.leaf_members[l].size());
        }
    }
}

double ForestRegressor::predict(const double* x) const {
    if (forest_.trees.empty()) throw NumericError("forest regressor not fitted");
    double sum = 0.0;
    for (std::size_t m = 0; m < forest_.trees.size(); ++m)
        sum += leaf_means_[m][forest_.trees[m].find_leaf(x)];
    return sum / static_cast<double>(forest_.trees.size());
}

void TabularRegressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    dim_ = static_cast<int>(X.cols());
    cells_.clear();
    std::vector<std::pair<std::vector<double>, std::pair<double, long>>> acc;
    for (long r = 0; r < X.rows(); ++r) {
        std::vector<double> key(X.row(r).data(), X.row(r).data() + dim_);
        auto it = std::find_if(acc.begin(), acc.end(),
                               [&](const auto& cell) { return cell.first == key; });
        if (it == acc.end()) {
            acc.push_back({std::move(key), {y(r), 1}});
        } else {
            it->second.first += y(r);
            ++it->second.second;
        }
    }
    for (auto& cell : acc)
        cells_.push_back({std::move(cell.first),
                          cell.second.first / static_cast<double>(cell.second.second)});
}

double TabularRegressor::predict(const double* x) const {
    for (const auto& [key, mean] : cells_) {
        bool match = true;
        for (int c = 0; c < dim_; ++c)
            if (key[c] != x[c]) {
                match = false;
                break;
            }
        if (match) return mean;
    }
    return 0.0;
}

double QFunction::value(const double* state, int action) const {
    if (action < 0 || action >= action_count)
        throw DataError("q-function: action out of range");
    if (!models[action]) return 0.0;
    return models[action]->predict(state);
}

double QFunction::max_value(const double* state) const {
    double best = value(state, 0);
    for (int a = 1; a < action_count; ++a) best = std::max(best, value(state, a));
    return best;
}

int QFunction::greedy(const double* state) const {
    int best_action = 0;
    double best = value(state, 0);
    for (int a = 1; a < action_count; ++a) {
        double v = value(state, a);
        if (v > best) {
            best = v;
            best_action = a;
        }
    }
    return best_action;
}

namespace {

struct Transitions {
    Eigen::MatrixXd states;       // S_t
    Eigen::MatrixXd next_states;  // S_{t+1}
    std::vector<int> actions;
    Eigen::VectorXd rewards;
};

Transitions collect_transitions(const Dataset& d) {
    d.validate();
    const long rows = static_cast<long>(d.n()) * d.horizon;
    if (rows == 0) throw DataError("dataset has no transitions");
    Transitions tr;
    tr.states.resize(rows, d.state_dim);
    tr.next_states.resize(rows, d.state_dim);
    tr.actions.resize(rows);
    tr.rewards.resize(rows);
    long r = 0;
    for (const Trajectory& traj : d.trajectories)
        for (int t = 0; t < d.horizon; ++t, ++r) {
            tr.states.row(r) = traj.states.row(t);
            tr.next_states.row(r) = traj.states.row(t + 1);
            tr.actions[r] = traj.actions[t];
            tr.rewards(r) = traj.rewards[t];
        }
    return tr;
}

std::unique_ptr<Regressor> make_regressor(const RegressorSpec& spec, std::uint64_t seed) {
    if (spec.tabular) return std::make_unique<TabularRegressor>();
    ForestParams params = spec.forest;
    params.seed = seed;
    return std::make_unique<ForestRegressor>(params);
}

// Shared engine for FQI and FQE; `bellman` maps a next-state row to the
// backup value under the previous Q.
std::shared_ptr<QFunction> iterate_q(
    const Dataset& d, const FqiParams& params,
    const std::function<double(const QFunction&, const double*)>& bellman,
    int* iterations_out, double* delta_out) {
    if (!(params.discount >= 0.0 && params.discount < 1.0))
        throw DataError("discount must lie in [0, 1)");
    if (params.max_iterations < 1) throw DataError("need at least one iteration");
    Transitions tr = collect_transitions(d);
    const long rows = tr.states.rows();
    const int A = d.action_count;

    std::vector<std::vector<long>> rows_of_action(A);
    for (long r = 0; r < rows; ++r) rows_of_action[tr.actions[r]].push_back(r);
    std::vector<Eigen::MatrixXd> X_of_action(A);
    for (int a = 0; a < A; ++a) {
        X_of_action[a].resize(rows_of_action[a].size(), d.state_dim);
        for (std::size_t i = 0; i < rows_of_action[a].size(); ++i)
            X_of_action[a].row(i) = tr.states.row(rows_of_action[a][i]);
    }

    auto q = std::make_shared<QFunction>();
    q->action_count = A;
    q->models.resize(A);

    Eigen::VectorXd targets(rows);
    Eigen::VectorXd prev_targets;
    double delta = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < params.max_iterations; ++iter) {
        for (long r = 0; r < rows; ++r) {
            double backup =
                q->iterations == 0 ? 0.0 : bellman(*q, tr.next_states.row(r).data());
            targets(r) = tr.rewards(r) + params.discount * backup;
        }
        if (iter > 0) {
            delta = (targets - prev_targets).cwiseAbs().maxCoeff();
            if (delta < params.target_tol) break;
        }
        prev_targets = targets;
        for (int a = 0; a < A; ++a) {
            if (rows_of_action[a].empty()) continue;
            Eigen::VectorXd y(rows_of_action[a].size());
            for (std::size_t i = 0; i < rows_of_action[a].size(); ++i)
                y(i) = targets(rows_of_action[a][i]);
            auto model = make_regressor(
                params.regressor,
                derive_seed(params.seed, kFqiStream,
                            static_cast<std::uint64_t>(iter) * A + a));
            model->fit(X_of_action[a], y);
            q->models[a] = std::move(model);
        }
        ++q->iterations;
    }
    if (iterations_out) *iterations_out = q->iterations;
    if (delta_out) *delta_out = std::isfinite(delta) ? delta : 0.0;
    return q;
}

}  // namespace

FqiResult fqi(const Dataset& d, const FqiParams& params) {
    FqiResult result;
    result.q = iterate_q(
        d, params,
        [](const QFunction& q, const double* next) { return q.max_value(next); },
        &result.iterations, &result.final_target_delta);
    result.policy = Policy{result.q};
    return result;
}

std::shared_ptr<QFunction> fqe(const Dataset& d, const Policy& policy,
                               const FqiParams& params) {
    return iterate_q(
        d, params,
        [&policy](const QFunction& q, const double* next) {
            return q.value(next, policy.action(next));
        },
        nullptr, nullptr);
}

GlucoseEnv::GlucoseEnv(envs::GlucoseConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
}

void GlucoseEnv::reset(std::mt19937_64& rng) {
    history_.clear();
    action_history_.clear();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Seed lag_order pre-history steps with behaviour actions; the caller's
    // warmup period covers the remaining transient.
    for (int t = 0; t < cfg_.lag_order; ++t) {
        double meal =
            unif(rng) < cfg_.meal_prob ? cfg_.meal_mean + cfg_.meal_sd * gauss(rng) : 0.0;
        double exercise = unif(rng) < cfg_.exercise_prob
                              ? cfg_.exercise_mean + cfg_.exercise_sd * gauss(rng)
                              : 0.0;
        double glucose = cfg_.init_glucose_mean + cfg_.init_glucose_sd * gauss(rng);
        history_.push_back({glucose, meal, exercise});
        if (t + 1 < cfg_.lag_order) action_history_.push_back(behavior_action(rng));
    }
}

Eigen::VectorXd GlucoseEnv::state() const {
    if (history_.empty()) throw NumericError("glucose env: reset() not called");
    Eigen::VectorXd s(3);
    const auto& last = history_.back();
    s << last[0], last[1], last[2];
    return s;
}

int GlucoseEnv::behavior_action(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (std::size_t a = 0; a < cfg_.action_probs.size(); ++a) {
        acc += cfg_.action_probs[a];
        if (u <= acc) return static_cast<int>(a);
    }
    return static_cast<int>(cfg_.action_probs.size()) - 1;
}

double GlucoseEnv::step(int action, std::mt19937_64& rng) {
    if (history_.empty()) throw NumericError("glucose env: reset() not called");
    if (action < 0 || action >= action_count())
        throw DataError("glucose env: action out of range");
    action_history_.push_back(action);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int kappa = cfg_.lag_order;
    std::vector<std::array<double, 3>> recent(kappa);
    std::vector<int> recent_actions(kappa);
    for (int i = 0; i < kappa; ++i) {
        recent[i] = history_[history_.size() - 1 - i];
        recent_actions[i] = action_history_[action_history_.size() - 1 - i];
    }
    double glucose =
        envs::glucose_linear_mean(cfg_, recent, recent_actions) + cfg_.noise_sd * gauss(rng);
    double meal =
        unif(rng) < cfg_.meal_prob ? cfg_.meal_mean + cfg_.meal_sd * gauss(rng) : 0.0;
    double exercise = unif(rng) < cfg_.exercise_prob
                          ? cfg_.exercise_mean + cfg_.exercise_sd * gauss(rng)
                          : 0.0;
    history_.push_back({glucose, meal, exercise});
    return envs::igc_reward(glucose);
}

Eigen::VectorXd embed_recent(const std::vector<Eigen::VectorXd>& states,
                             const std::vector<int>& actions, int embed_level) {
    if (embed_level < 1) throw DataError("embed level must be at least 1");
    if (static_cast<int>(states.size()) < embed_level ||
        static_cast<int>(actions.size()) + 1 < embed_level)
        throw DataError("embed_recent: not enough history");
    const int p = static_cast<int>(states.front().size());
    Eigen::VectorXd out(embed_level * p + embed_level - 1);
    int col = 0;
    const std::size_t s0 = states.size() - embed_level;
    const std::size_t a0 = actions.size() - (embed_level - 1);
    for (int lag = 0; lag < embed_level; ++lag) {
        out.segment(col, p) = states[s0 + lag];
        col += p;
        if (lag + 1 < embed_level) out(col++) = static_cast<double>(actions[a0 + lag]);
    }
    return out;
}

double rollout_value(Environment& env,
                     const std::function<int(const Eigen::VectorXd&)>& policy,
                     int embed_level, int n_traj, int warmup, int horizon,
                     double discount, std::uint64_t seed) {
    if (horizon < warmup) throw DataError("rollout: horizon must reach the warmup");
    if (warmup < embed_level - 1)
        throw DataError("rollout: warmup shorter than the embedding needs");
    if (n_traj < 1) throw DataError("rollout: need at least one trajectory");

    double total = 0.0;
    for (int e = 0; e < n_traj; ++e) {
        std::mt19937_64 rng(derive_seed(seed, kRolloutStream, e));
        env.reset(rng);
        std::vector<Eigen::VectorXd> states{env.state()};
        std::vector<int> actions;
        double value = 0.0;
        double disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            int action;
            if (t < warmup) {
                action = env.behavior_action(rng);
            } else {
                action = policy(embed_recent(states, actions, embed_level));
            }
            double reward = env.step(action, rng);
            actions.push_back(action);
            states.push_back(env.state());
            if (t >= warmup) {
                value += disc * reward;
                disc *= discount;
            }
        }
        total += value;
    }
    return total / static_cast<double>(n_traj);
}

namespace {

ValueTableRow summarize(int k, const std::vector<double>& samples) {
    ValueTableRow row;
    row.k = k;
    row.n_reps = static_cast<int>(samples.size());
    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                  static_cast<double>(samples.size());
    row.value = mean;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - mean) * (v - mean);
        row.se = std::sqrt(ss / static_cast<double>(samples.size() - 1) /
                           static_cast<double>(samples.size()));
    }
    return row;
}

}  // namespace

ValueDifferenceResult value_difference_protocol(const ValueDifferenceParams& params) {
    if (params.replications < 1) throw DataError("value-difference: need replications >= 1");
    std::vector<std::vector<double>> diffs(params.ks.size());
    ValueDifferenceResult result;

    for (int rep = 0; rep < params.replications; ++rep) {
        const std::uint64_t rep_seed = derive_seed(params.seed, kProtoStream, rep);
        Dataset data = envs::simulate_glucose(params.generator, params.n_traj,
                                              params.horizon, rep_seed);
        TestConfig test_cfg = params.test;
        test_cfg.seed = derive_seed(rep_seed, kProtoStream, 1);
        SelectionResult selection =
            select_order(data, params.max_level, params.test.alpha, test_cfg);
        const int selected = selection.is_pomdp ? params.max_level : selection.selected_order;
        result.selected_orders.push_back(selection.is_pomdp ? 0 : selection.selected_order);

        auto value_of_k = [&](int k) {
            FqiParams fqi_params = params.fqi;
            fqi_params.seed = derive_seed(rep_seed, kProtoStream, 100 + k);
            FqiResult fit = fqi(lag_embed(data, k), fqi_params);
            GlucoseEnv env(params.generator);
            auto policy_fn = [&fit](const Eigen::VectorXd& s) {
                return fit.policy.action(s.data());
            };
            return rollout_value(env, policy_fn, k, params.eval_trajectories,
                                 params.eval_warmup, params.eval_horizon,
                                 params.fqi.discount,
                                 derive_seed(rep_seed, kProtoStream, 200 + k));
        };

        double selected_value = value_of_k(selected);
        for (std::size_t i = 0; i < params.ks.size(); ++i) {
            int k = params.ks[i];
            double v = k == selected ? selected_value : value_of_k(k);
            diffs[i].push_back(v - selected_value);
        }
    }

    for (std::size_t i = 0; i < params.ks.size(); ++i)
        result.rows.push_back(summarize(params.ks[i], diffs[i]));
    return result;
}

namespace {

void enumerate_combinations(int n, int choose, std::vector<std::vector<int>>& out) {
    std::vector<int> pick(choose);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == choose) {
            out.push_back(pick);
            return;
        }
        for (int v = start; v < n; ++v) {
            pick[depth] = v;
            rec(v + 1, depth + 1);
        }
    };
    rec(0, 0);
}

Dataset subset_dataset(const Dataset& d, const std::vector<int>& keep) {
    Dataset out;
    out.state_dim = d.state_dim;
    out.action_count = d.action_count;
    out.horizon = d.horizon;
    for (int j : keep) out.trajectories.push_back(d.trajectories[j]);
    return out;
}

}  // namespace

CrossValueResult cross_validated_value(const Dataset& d, const Dataset& eval_data,
                                       const CrossValueParams& params) {
    d.validate();
    eval_data.validate();
    if (d.n() < 2) throw DataError("cross-validated value: need at least 2 trajectories");
    if (eval_data.state_dim != d.state_dim)
        throw DataError("cross-validated value: evaluation data dimension mismatch");

    std::vector<std::vector<int>> splits;
    enumerate_combinations(d.n(), d.n() / 2, splits);
    if (params.max_splits > 0 && static_cast<int>(splits.size()) > params.max_splits) {
        std::mt19937_64 rng(derive_seed(params.seed, kProtoStream, 0));
        std::shuffle(splits.begin(), splits.end(), rng);
        splits.resize(params.max_splits);
    }

    std::vector<std::vector<double>> values(params.ks.size());
    for (std::size_t split_id = 0; split_id < splits.size(); ++split_id) {
        std::vector<int> train = splits[split_id];
        std::vector<int> test;
        for (int j = 0; j < d.n(); ++j)
            if (std::find(train.begin(), train.end(), j) == train.end()) test.push_back(j);
        Dataset train_data = subset_dataset(d, train);
        Dataset test_data = subset_dataset(d, test);

        for (std::size_t i = 0; i < params.ks.size(); ++i) {
            const int k = params.ks[i];
            if (k > d.horizon || k > eval_data.horizon + 1)
                throw DataError("cross-validated value: k exceeds usable horizon");
            FqiParams fqi_params = params.fqi;
            fqi_params.seed = derive_seed(params.seed, kProtoStream,
                                          1000 + split_id * 100 + k);
            FqiResult fit = fqi(lag_embed(train_data, k), fqi_params);

            FqiParams fqe_params = params.fqe;
            fqe_params.seed = derive_seed(params.seed, kProtoStream,
                                          2000 + split_id * 100 + k);
            auto value_q = fqe(lag_embed(test_data, k), fit.policy, fqe_params);

            // Evaluate at the last feasible embedded state of each
            // evaluation trajectory.
            double sum = 0.0;
            for (const Trajectory& traj : eval_data.trajectories) {
                std::vector<Eigen::VectorXd> states;
                std::vector<int> actions;
                for (int t = 0; t <= eval_data.horizon; ++t) {
                    states.push_back(traj.states.row(t).transpose());
                    if (t < eval_data.horizon) actions.push_back(traj.actions[t]);
                }
                Eigen::VectorXd s = embed_recent(states, actions, k);
                sum += value_q->value(s.data(), value_q->greedy(s.data()));
            }
            values[i].push_back(sum / static_cast<double>(eval_data.n()));
        }
    }

    CrossValueResult result;
    result.splits_used = static_cast<int>(splits.size());
    for (std::size_t i = 0; i < params.ks.size(); ++i)
        result.rows.push_back(summarize(params.ks[i], values[i]));
    return result;
}

namespace {

constexpr char kQMagic[4] = {'M', 'C', 'K', 'Q'};
constexpr std::uint32_t kQVersion = 1;

template <typename T>
void put(std::string& out, const T& v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw DataError("q-function blob truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::string qfunction_to_bytes(const QFunction& q) {
    std::string out;
    out.append(kQMagic, sizeof(kQMagic));
    put(out, kQVersion);
    put(out, static_cast<std::int32_t>(q.action_count));
    put(out, static_cast<std::int32_t>(q.iterations));
    for (int a = 0; a < q.action_count; ++a) {
        const auto* fr = dynamic_cast<const ForestRegressor*>(q.models[a].get());
        if (q.models[a] && !fr)
            throw DataError("only forest-backed q-functions are serializable");
        put(out, static_cast<std::uint8_t>(fr ? 1 : 0));
        if (!fr) continue;
        std::string forest = forest_to_bytes(fr->forest());
        put(out, static_cast<std::uint64_t>(forest.size()));
        out += forest;
        put(out, static_cast<std::int64_t>(fr->responses().size()));
        out.append(reinterpret_cast<const char*>(fr->responses().data()),
                   fr->responses().size() * sizeof(double));
    }
    return out;
}

std::shared_ptr<QFunction> qfunction_from_bytes(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < sizeof(kQMagic) ||
        std::memcmp(bytes.data(), kQMagic, sizeof(kQMagic)) != 0)
        throw DataError("not a q-function blob");
    pos += sizeof(kQMagic);
    if (get<std::uint32_t>(bytes, pos) != kQVersion)
        throw DataError("unsupported q-function blob version");

    auto q = std::make_shared<QFunction>();
    q->action_count = get<std::int32_t>(bytes, pos);
    q->iterations = get<std::int32_t>(bytes, pos);
    q->models.resize(q->action_count);
    for (int a = 0; a < q->action_count; ++a) {
        if (get<std::uint8_t>(bytes, pos) == 0) continue;
        std::uint64_t forest_size = get<std::uint64_t>(bytes, pos);
        if (pos + forest_size > bytes.size()) throw DataError("q-function blob truncated");
        Forest forest = forest_from_bytes(bytes.substr(pos, forest_size));
        pos += forest_size;
        std::int64_t n = get<std::int64_t>(bytes, pos);
        if (pos + static_cast<std::size_t>(n) * sizeof(double) > bytes.size())
            throw DataError("q-function blob truncated");
        Eigen::VectorXd responses(n);
        std::memcpy(responses.data(), bytes.data() + pos, n * sizeof(double));
        pos += static_cast<std::size_t>(n) * sizeof(double);
        auto model = std::make_unique<ForestRegressor>(forest.params);
        model->restore(std::move(forest), std::move(responses));
        q->models[a] = std::move(model);
    }
    if (pos != bytes.size()) throw DataError("trailing bytes in q-function blob");
    return q;
}

}  // namespace markovcheck
