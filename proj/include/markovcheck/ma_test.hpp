#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "markovcheck/ccf.hpp"
#include "markovcheck/folds.hpp"
#include "markovcheck/trajectory.hpp"

namespace markovcheck {

// B i.i.d. frequency pairs (mu_b in R^p, nu_b in R^{p+1}), standard Gaussian.
struct FrequencySet {
    std::vector<Eigen::VectorXd> mu;
    std::vector<Eigen::VectorXd> nu;
    std::uint64_t seed = 0;

    int count() const { return static_cast<int>(mu.size()); }
};

FrequencySet sample_frequencies(int count, int state_dim, std::uint64_t seed);

// Cross-fitted residual-product means, indexed by (lag row, frequency pair).
struct GammaTable {
    std::vector<int> lags;                  // the q value of each row
    std::vector<std::vector<Cplx>> values;  // [row][b]
    std::vector<long long> sample_count;    // n(T-q-1) per row

    int row_of_lag(int q) const;
};

// Per-lag (2B)x(2B) second-moment matrices of the residual-product vectors,
// ordered as B real parts then B imaginary parts.
struct CovarianceBlocks {
    std::vector<int> lags;
    std::vector<Eigen::MatrixXd> blocks;
};

struct ResidualTables {
    GammaTable gamma;
    CovarianceBlocks covariance;
};

// Exact triple sum over folds, trajectories, and time, pairing fold-l data
// with the learners trained on its complement. Computes every lag in `lags`
// in one pass over the learner evaluations.
ResidualTables accumulate_residuals(const Dataset& d, const CrossFitLearners& learners,
                                    const FoldAssignment& folds, const FrequencySet& freqs,
                                    const std::vector<int>& lags, bool with_covariance,
                                    int threads = 0);

Cplx compute_gamma(const Dataset& d, const CrossFitLearners& learners,
                   const FoldAssignment& folds, int lag, const Eigen::VectorXd& mu,
                   const Eigen::VectorXd& nu);

Eigen::MatrixXd estimate_covariance(const Dataset& d, const CrossFitLearners& learners,
                                    const FoldAssignment& folds, const FrequencySet& freqs,
                                    int lag);

struct StatArgmax {
    int lag = 0;
    int freq = 0;  // 0-based index into the frequency set
    bool imaginary = false;
};

struct StatValue {
    double value = 0.0;
    StatArgmax argmax;
};

// S = max_b max_q sqrt(n(T-q-1)) max(|Re Gamma|, |Im Gamma|).
StatValue compute_statistic(const GammaTable& gamma);

// Symmetric PSD square root via eigendecomposition; negative eigenvalues are
// clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

struct BootstrapResult {
    double critical_value = 0.0;
    std::vector<double> draws;
};

// Monte Carlo draws of max_q ||{Sigma^(q)}^{1/2} Z_q||_inf with Z_q i.i.d.
// standard Gaussian; the critical value is the empirical upper-alpha quantile.
BootstrapResult bootstrap_critical_value(const CovarianceBlocks& blocks, double alpha,
                                         int n_draws, std::uint64_t seed, int threads = 0);

// Add-one smoothed: (1 + #{draws >= statistic}) / (1 + #draws).
double bootstrap_p_value(double statistic, const std::vector<double>& draws);

struct TestConfig {
    int freq_count = 100;      // B
    int max_lag = 8;           // Q
    int fold_count = 3;        // L
    double alpha = 0.05;
    int bootstrap_draws = 2000;
    // Algorithm step 5 reads "upper alpha/2"; the calibration statement uses
    // alpha. Default alpha; this switch reproduces the literal step.
    bool alpha_half = false;
    bool normalize_states = true;
    bool tune_forest = false;
    std::uint64_t seed = 0;
    ForestParams forest;
    int threads = 0;
};

struct TestResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.05;
    int freq_count = 0;  // B
    int max_lag = 0;     // Q actually used (after clamping)
    int fold_count = 0;  // L actually used (after clamping)
    std::uint64_t seed = 0;
    StatArgmax argmax;
    double runtime_ms = 0.0;
    GammaTable gamma;  // diagnostics: per-(q,b) contributions
    std::vector<std::string> warnings;
};

// Full pipeline: normalize, folds, frequencies, cross-fitted learners, Gamma
// table, statistic, covariance blocks, bootstrap critical value, p-value.
TestResult run_test(const Dataset& d, const TestConfig& cfg);

}  // namespace markovcheck
