#include "markovcheck/ccf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace markovcheck {

namespace {
constexpr std::uint64_t kFoldForestStream = 0x63636666ULL;
constexpr std::uint64_t kTunerStream = 0x74756e65ULL;

class ForestCcfEvaluator : public CcfEvaluator {
  public:
    ForestCcfEvaluator(const ForestCcfLearner& learner,
                       const std::vector<Eigen::VectorXd>& freqs)
        : learner_(learner), freq_count_(static_cast<int>(freqs.size())) {
        const Forest& forest = learner.forest();
        const Eigen::MatrixXd& payload = learner.payload();
        const int n = static_cast<int>(payload.rows());
        const int B = freq_count_;
        for (const auto& f : freqs)
            if (f.size() != payload.cols())
                throw DataError("ccf: frequency dimension mismatch");

        // Phase of every training payload at every frequency.
        std::vector<Cplx> phases(static_cast<std::size_t>(n) * B);
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < B; ++b)
                phases[static_cast<std::size_t>(i) * B + b] =
                    unit_phase(freqs[b].dot(payload.row(i)));

        // Per-tree, per-leaf mean phase.
        leaf_values_.resize(forest.trees.size());
        for (std::size_t m = 0; m < forest.trees.size(); ++m) {
            const Tree& tree = forest.trees[m];
            auto& values = leaf_values_[m];
            values.assign(static_cast<std::size_t>(tree.leaf_count()) * B, Cplx{});
            for (int l = 0; l < tree.leaf_count(); ++l) {
                Cplx* acc = values.data() + static_cast<std::size_t>(l) * B;
                for (int id : tree.leaf_members[l]) {
                    const Cplx* row = phases.data() + static_cast<std::size_t>(id) * B;
                    for (int b = 0; b < B; ++b) acc[b] += row[b];
                }
                const double inv = 1.0 / static_cast<double>(tree.leaf_members[l].size());
                for (int b = 0; b < B; ++b) acc[b] = inv * acc[b];
            }
        }
    }

    int freq_count() const override { return freq_count_; }

    void eval(const double* x, Cplx* out) const override {
        const Forest& forest = learner_.forest();
        const int B = freq_count_;
        std::fill(out, out + B, Cplx{});
        for (std::size_t m = 0; m < forest.trees.size(); ++m) {
            const int leaf = forest.trees[m].find_leaf(x);
            const Cplx* vals = leaf_values_[m].data() + static_cast<std::size_t>(leaf) * B;
            for (int b = 0; b < B; ++b) out[b] += vals[b];
        }
        const double inv = 1.0 / static_cast<double>(forest.trees.size());
        for (int b = 0; b < B; ++b) out[b] = inv * out[b];
    }

  private:
    const ForestCcfLearner& learner_;
    int freq_count_;
    std::vector<std::vector<Cplx>> leaf_values_;  // [tree][leaf * B + b]
};

class CallableCcfEvaluator : public CcfEvaluator {
  public:
    CallableCcfEvaluator(CallableCcfLearner::Fn fn, std::vector<Eigen::VectorXd> freqs)
        : fn_(std::move(fn)), freqs_(std::move(freqs)) {}

    int freq_count() const override { return static_cast<int>(freqs_.size()); }

    void eval(const double* x, Cplx* out) const override {
        for (std::size_t b = 0; b < freqs_.size(); ++b) out[b] = fn_(x, freqs_[b]);
    }

  private:
    CallableCcfLearner::Fn fn_;
    std::vector<Eigen::VectorXd> freqs_;
};

}  // namespace

ForestCcfLearner::ForestCcfLearner(Forest forest, Eigen::MatrixXd payload,
                                   CcfDirection direction)
    : forest_(std::move(forest)), payload_(std::move(payload)), direction_(direction) {
    if (payload_.rows() != forest_.n_training)
        throw DataError("ccf: payload rows must match forest training size");
}

std::unique_ptr<CcfEvaluator> ForestCcfLearner::bind(
    const std::vector<Eigen::VectorXd>& freqs) const {
    return std::make_unique<ForestCcfEvaluator>(*this, freqs);
}

std::unique_ptr<CcfEvaluator> CallableCcfLearner::bind(
    const std::vector<Eigen::VectorXd>& freqs) const {
    for (const auto& f : freqs)
        if (f.size() != payload_dim_) throw DataError("ccf: frequency dimension mismatch");
    return std::make_unique<CallableCcfEvaluator>(fn_, freqs);
}

std::vector<Cplx> eval_ccf(const CcfLearnerBase& learner, const Eigen::VectorXd& x,
                           const std::vector<Eigen::VectorXd>& freqs) {
    if (x.size() != learner.predictor_dim())
        throw DataError("ccf: query dimension mismatch");
    auto evaluator = learner.bind(freqs);
    std::vector<Cplx> out(freqs.size());
    evaluator->eval(x.data(), out.data());
    return out;
}

namespace {

struct TrainingPairs {
    Eigen::MatrixXd predictors;
    Eigen::MatrixXd payload;
};

TrainingPairs collect_pairs(const Dataset& d, const std::vector<int>& trajectories,
                            CcfDirection direction) {
    const int p = d.state_dim;
    const int T = d.horizon;
    const long rows = static_cast<long>(trajectories.size()) * T;
    TrainingPairs pairs;
    pairs.predictors.resize(rows, p + 1);
    pairs.payload.resize(rows, direction == CcfDirection::kForward ? p : p + 1);
    long r = 0;
    for (int j : trajectories) {
        const Trajectory& traj = d.trajectories[j];
        for (int t = 1; t <= T; ++t, ++r) {
            if (direction == CcfDirection::kForward) {
                // predictor X_{j,t-1}, payload S_{j,t}
                pairs.predictors.row(r).head(p) = traj.states.row(t - 1);
                pairs.predictors(r, p) = static_cast<double>(traj.actions[t - 1]);
                pairs.payload.row(r) = traj.states.row(t);
            } else {
                // predictor X_{j,t}, payload X_{j,t-1}
                pairs.predictors.row(r).head(p) = traj.states.row(t);
                pairs.predictors(r, p) = static_cast<double>(traj.actions[t]);
                pairs.payload.row(r).head(p) = traj.states.row(t - 1);
                pairs.payload(r, p) = static_cast<double>(traj.actions[t - 1]);
            }
        }
    }
    return pairs;
}

}  // namespace

CrossFitLearners cross_fit_learners(const Dataset& d, const FoldAssignment& folds,
                                    const ForestParams& params) {
    d.validate();
    folds.validate();
    if (folds.n() != d.n())
        throw DataError("cross_fit_learners: fold assignment does not match dataset");

    CrossFitLearners learners;
    learners.per_fold.resize(folds.fold_count);
    for (int fold = 0; fold < folds.fold_count; ++fold) {
        const std::vector<int> training = folds.fold_complement(fold);
        for (CcfDirection dir : {CcfDirection::kForward, CcfDirection::kBackward}) {
            TrainingPairs pairs = collect_pairs(d, training, dir);
            ForestParams fold_params = params;
            fold_params.seed = derive_seed(
                params.seed, kFoldForestStream,
                static_cast<std::uint64_t>(fold) * 2 + (dir == CcfDirection::kForward ? 0 : 1));
            Forest forest = fit_forest(pairs.predictors, pairs.payload, fold_params);
            auto learner = std::make_shared<ForestCcfLearner>(
                std::move(forest), std::move(pairs.payload), dir);
            if (dir == CcfDirection::kForward)
                learners.per_fold[fold].forward = std::move(learner);
            else
                learners.per_fold[fold].backward = std::move(learner);
        }
    }
    return learners;
}

ForestParams tune_forest_params(const Eigen::MatrixXd& predictors,
                                const Eigen::MatrixXd& payload,
                                const ForestParams& base, std::uint64_t seed) {
    const int n = static_cast<int>(predictors.rows());
    if (n < 20) return base;

    // 5 pilot frequencies; squared error of the real part of the CCF is the
    // quantity the test's learner accuracy rides on.
    constexpr int kPilot = 5;
    constexpr int kCvFolds = 5;
    std::mt19937_64 rng(derive_seed(seed, kTunerStream, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Eigen::VectorXd> pilot(kPilot);
    for (auto& f : pilot) {
        f.resize(payload.cols());
        for (int c = 0; c < payload.cols(); ++c) f(c) = gauss(rng);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    struct Candidate {
        int max_depth;
        int min_leaf_size;
    };
    const Candidate grid[] = {{8, 5}, {8, 10}, {12, 5}, {12, 10}, {16, 5}, {16, 10}};

    ForestParams best = base;
    double best_err = std::numeric_limits<double>::infinity();
    for (const Candidate& cand : grid) {
        ForestParams params = base;
        params.max_depth = cand.max_depth;
        params.min_leaf_size = cand.min_leaf_size;
        params.n_trees = std::min(base.n_trees, 25);
        double err = 0.0;
        long evals = 0;
        for (int fold = 0; fold < kCvFolds; ++fold) {
            std::vector<int> train_rows, test_rows;
            for (int i = 0; i < n; ++i)
                (i % kCvFolds == fold ? test_rows : train_rows).push_back(order[i]);
            if (static_cast<int>(train_rows.size()) < 2 * params.min_leaf_size) continue;
            Eigen::MatrixXd Xtr(train_rows.size(), predictors.cols());
            Eigen::MatrixXd Ptr(train_rows.size(), payload.cols());
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                Xtr.row(r) = predictors.row(train_rows[r]);
                Ptr.row(r) = payload.row(train_rows[r]);
            }
            params.seed = derive_seed(seed, kTunerStream, 100 + fold);
            ForestCcfLearner learner(fit_forest(Xtr, Ptr, params), Ptr,
                                     CcfDirection::kForward);
            auto evaluator = learner.bind(pilot);
            std::vector<Cplx> pred(kPilot);
            for (int row : test_rows) {
                Eigen::RowVectorXd x = predictors.row(row);
                evaluator->eval(x.data(), pred.data());
                for (int b = 0; b < kPilot; ++b) {
                    double realized = std::cos(pilot[b].dot(payload.row(row)));
                    double diff = pred[b].re - realized;
                    err += diff * diff;
                    ++evals;
                }
            }
        }
        if (evals > 0) err /= static_cast<double>(evals);
        if (evals > 0 && err < best_err) {
            best_err = err;
            best = base;
            best.max_depth = cand.max_depth;
            best.min_leaf_size = cand.min_leaf_size;
        }
    }
    return best;
}

}  // namespace markovcheck
