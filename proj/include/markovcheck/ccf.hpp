#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "markovcheck/folds.hpp"
#include "markovcheck/forest.hpp"
#include "markovcheck/trajectory.hpp"

namespace markovcheck {

enum class CcfDirection { kForward, kBackward };

// Evaluator bound to a fixed list of frequency vectors.
class CcfEvaluator {
  public:
    virtual ~CcfEvaluator() = default;
    virtual int freq_count() const = 0;
    // out must hold freq_count() values.
    virtual void eval(const double* x, Cplx* out) const = 0;
};

// A conditional-characteristic-function learner: x -> E[exp(i f.payload) | x].
class CcfLearnerBase {
  public:
    virtual ~CcfLearnerBase() = default;
    virtual int predictor_dim() const = 0;
    virtual int payload_dim() const = 0;
    virtual std::unique_ptr<CcfEvaluator> bind(
        const std::vector<Eigen::VectorXd>& freqs) const = 0;
};

// Forest-backed learner: leaf weights over the training pairs average the
// unit-modulus responses exp(i f.payload_i). Values are convex combinations
// of unit-modulus numbers, so |value| <= 1 and the value at the zero
// frequency is exactly 1.
class ForestCcfLearner : public CcfLearnerBase {
  public:
    ForestCcfLearner(Forest forest, Eigen::MatrixXd payload, CcfDirection direction);

    int predictor_dim() const override { return forest_.predictor_dim; }
    int payload_dim() const override { return static_cast<int>(payload_.cols()); }
    std::unique_ptr<CcfEvaluator> bind(
        const std::vector<Eigen::VectorXd>& freqs) const override;

    const Forest& forest() const { return forest_; }
    const Eigen::MatrixXd& payload() const { return payload_; }
    CcfDirection direction() const { return direction_; }

  private:
    Forest forest_;
    Eigen::MatrixXd payload_;  // one row per training pair
    CcfDirection direction_;
};

// Learner defined by a callable; used for exact oracles in tests.
class CallableCcfLearner : public CcfLearnerBase {
  public:
    using Fn = std::function<Cplx(const double* x, const Eigen::VectorXd& freq)>;
    CallableCcfLearner(int predictor_dim, int payload_dim, Fn fn)
        : predictor_dim_(predictor_dim), payload_dim_(payload_dim), fn_(std::move(fn)) {}

    int predictor_dim() const override { return predictor_dim_; }
    int payload_dim() const override { return payload_dim_; }
    std::unique_ptr<CcfEvaluator> bind(
        const std::vector<Eigen::VectorXd>& freqs) const override;

  private:
    int predictor_dim_;
    int payload_dim_;
    Fn fn_;
};

// One-off evaluation at a single query point.
std::vector<Cplx> eval_ccf(const CcfLearnerBase& learner, const Eigen::VectorXd& x,
                           const std::vector<Eigen::VectorXd>& freqs);

struct FoldLearners {
    std::shared_ptr<const CcfLearnerBase> forward;
    std::shared_ptr<const CcfLearnerBase> backward;
};

// Per-fold learners; the pair for fold l is trained on the complement of l.
struct CrossFitLearners {
    std::vector<FoldLearners> per_fold;
    int fold_count() const { return static_cast<int>(per_fold.size()); }
};

// Trains, for each fold l, a forward forest on (predictor X_{j,t-1},
// response S_{j,t}) and a backward forest on (predictor X_{j,t}, response
// X_{j,t-1}) over j outside fold l and 1 <= t <= T. The same pair of
// learners serves every lag q.
CrossFitLearners cross_fit_learners(const Dataset& d, const FoldAssignment& folds,
                                    const ForestParams& params);

// Optional hyperparameter tuner: picks (max_depth, min_leaf_size) from a small
// grid by 5-fold out-of-fold squared error of the real part of the CCF at
// 5 pilot frequencies.
ForestParams tune_forest_params(const Eigen::MatrixXd& predictors,
                                const Eigen::MatrixXd& payload,
                                const ForestParams& base, std::uint64_t seed);

}  // namespace markovcheck
