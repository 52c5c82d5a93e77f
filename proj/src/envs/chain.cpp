#include "markovcheck/envs/chain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace markovcheck::envs {

namespace {

long int_pow(int base, int exp) {
    long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

void check_stochastic(const std::vector<double>& table, std::size_t row_size,
                      const char* what) {
    if (row_size == 0 || table.size() % row_size != 0)
        throw DataError(std::string(what) + ": wrong table size");
    for (std::size_t r = 0; r < table.size(); r += row_size) {
        double sum = 0.0;
        for (std::size_t c = 0; c < row_size; ++c) {
            double v = table[r + c];
            if (!(v >= 0.0) || !std::isfinite(v))
                throw DataError(std::string(what) + ": negative or non-finite probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw DataError(std::string(what) + ": row does not sum to 1");
    }
}

int sample_row(const double* probs, int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
        acc += probs[i];
        if (u <= acc) return i;
    }
    return count - 1;
}

}  // namespace

void ChainSpec::validate() const {
    if (state_count < 1) throw DataError("chain: state_count must be positive");
    if (order < 1) throw DataError("chain: order must be positive");
    if (action_count < 1) throw DataError("chain: action_count must be positive");
    const long hist = int_pow(state_count, order);
    if (static_cast<long>(transition.size()) != hist * action_count * state_count)
        throw DataError("chain: transition tensor has wrong size");
    check_stochastic(transition, state_count, "chain transition");
    if (static_cast<int>(behavior.size()) != state_count * action_count)
        throw DataError("chain: behavior matrix has wrong size");
    check_stochastic(behavior, action_count, "chain behavior");
    if (!initial.empty()) {
        if (static_cast<int>(initial.size()) != state_count)
            throw DataError("chain: initial distribution has wrong size");
        check_stochastic(initial, state_count, "chain initial");
    } else if (order != 1) {
        throw DataError("chain: stationary initial distribution needs order 1");
    }
    if (!state_values.empty() && static_cast<int>(state_values.size()) != state_count)
        throw DataError("chain: state_values has wrong size");
}

double ChainSpec::value_of(int state) const {
    return state_values.empty() ? static_cast<double>(state) : state_values[state];
}

int ChainSpec::state_of_value(double v) const {
    for (int s = 0; s < state_count; ++s)
        if (std::abs(value_of(s) - v) < 1e-9) return s;
    throw NumericError("chain: no state encodes value " + std::to_string(v));
}

Eigen::VectorXd chain_stationary_distribution(const ChainSpec& spec) {
    spec.validate();
    if (spec.order != 1)
        throw DataError("chain: stationary distribution implemented for order 1");
    const int S = spec.state_count;
    const int A = spec.action_count;
    Eigen::MatrixXd kernel(S, S);  // kernel(s, s') = P(s' | s) under behavior
    for (int s = 0; s < S; ++s)
        for (int s2 = 0; s2 < S; ++s2) {
            double v = 0.0;
            for (int a = 0; a < A; ++a)
                v += spec.behavior[s * A + a] * spec.transition[(s * A + a) * S + s2];
            kernel(s, s2) = v;
        }
    // Solve rho' (K - I) = 0 with the normalization sum(rho) = 1.
    Eigen::MatrixXd system = kernel.transpose() - Eigen::MatrixXd::Identity(S, S);
    system.row(S - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs(S - 1) = 1.0;
    Eigen::VectorXd rho = system.fullPivLu().solve(rhs);
    if (rho.minCoeff() < -1e-9)
        throw NumericError("chain: stationary distribution has negative mass");
    rho = rho.cwiseMax(0.0);
    rho /= rho.sum();
    return rho;
}

Dataset simulate_chain(const ChainSpec& spec, int n_traj, int horizon,
                       std::uint64_t seed) {
    spec.validate();
    if (n_traj < 1) throw DataError("chain: need at least one trajectory");
    if (horizon < 1) throw DataError("chain: horizon must be positive");

    std::vector<double> init = spec.initial;
    if (init.empty()) {
        Eigen::VectorXd rho = chain_stationary_distribution(spec);
        init.assign(rho.data(), rho.data() + rho.size());
    }

    const int S = spec.state_count;
    const int A = spec.action_count;
    const int T = horizon;

    Dataset d;
    d.state_dim = 1;
    d.action_count = A;
    d.horizon = T;
    d.trajectories.resize(n_traj);
    for (int j = 0; j < n_traj; ++j) {
        std::mt19937_64 rng(derive_seed(seed, 0x636861696eULL, j));
        Trajectory& traj = d.trajectories[j];
        traj.id = "chain" + std::to_string(j);
        traj.states.resize(T + 1, 1);
        traj.actions.resize(T + 1);
        traj.rewards.assign(T, 0.0);

        std::vector<int> states(T + 1);
        for (int t = 0; t < spec.order && t <= T; ++t)
            states[t] = sample_row(init.data(), S, rng);
        std::vector<int> actions(T + 1);
        for (int t = 0; t <= T; ++t) {
            if (t < spec.order) {
                actions[t] = sample_row(spec.behavior.data() + states[t] * A, A, rng);
                continue;
            }
            // History over the last `order` states ending at t-1, newest as
            // the highest digit.
            long hist = 0;
            for (int back = 1; back <= spec.order; ++back)
                hist = hist * S + states[t - back];
            states[t] = sample_row(spec.transition.data() + (hist * A + actions[t - 1]) * S,
                                   S, rng);
            actions[t] = sample_row(spec.behavior.data() + states[t] * A, A, rng);
        }
        for (int t = 0; t <= T; ++t) {
            traj.states(t, 0) = spec.value_of(states[t]);
            traj.actions[t] = actions[t];
        }
    }
    return d;
}

ExactChainCcfs exact_ccfs(const ChainSpec& spec) {
    spec.validate();
    if (spec.order != 1)
        throw DataError("chain: exact CCFs implemented for order-1 chains");
    const int S = spec.state_count;
    const int A = spec.action_count;
    Eigen::VectorXd rho = chain_stationary_distribution(spec);

    ExactChainCcfs out;
    out.stationary = rho;
    ChainSpec copy = spec;

    out.forward = std::make_shared<CallableCcfLearner>(
        2, 1, [copy](const double* x, const Eigen::VectorXd& freq) {
            int s = copy.state_of_value(x[0]);
            int a = static_cast<int>(std::llround(x[1]));
            Cplx value{};
            for (int s2 = 0; s2 < copy.state_count; ++s2) {
                double p = copy.transition[(s * copy.action_count + a) * copy.state_count + s2];
                value += p * unit_phase(freq(0) * copy.value_of(s2));
            }
            return value;
        });

    // P(X_{t-1} = (s0, a0) | S_t = s) = rho(s0) pi(a0|s0) P(s|s0,a0) / rho(s).
    // The conditioning action cancels because the behavior policy looks only
    // at the current state.
    Eigen::VectorXd rho_copy = rho;
    out.backward = std::make_shared<CallableCcfLearner>(
        2, 2, [copy, rho_copy](const double* x, const Eigen::VectorXd& freq) {
            int s = copy.state_of_value(x[0]);
            double denom = rho_copy(s);
            if (denom <= 0.0)
                throw NumericError("chain: conditioning on a zero-mass state");
            Cplx value{};
            for (int s0 = 0; s0 < copy.state_count; ++s0)
                for (int a0 = 0; a0 < copy.action_count; ++a0) {
                    double p = rho_copy(s0) * copy.behavior[s0 * copy.action_count + a0] *
                               copy.transition[(s0 * copy.action_count + a0) *
                                                   copy.state_count +
                                               s] /
                               denom;
                    value += p * unit_phase(freq(0) * copy.value_of(s0) + freq(1) * a0);
                }
            return value;
        });
    return out;
}

}  // namespace markovcheck::envs
