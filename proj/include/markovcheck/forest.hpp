#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "markovcheck/common.hpp"

namespace markovcheck {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_leaf_size = 5;
    int mtry = 0;  // predictor coordinates tried per split; 0 = ceil(sqrt(dim))
    double bootstrap_fraction = 0.8;
    std::uint64_t seed = 0;

    int resolve_mtry(int predictor_dim) const;
    void validate(int predictor_dim) const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_index = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    // Training pairs that fall into each leaf (over the full training set,
    // not just the bootstrap sample the tree was grown on).
    std::vector<std::vector<int>> leaf_members;
    // Bootstrap-sample occupancy each leaf had at grow time.
    std::vector<int> leaf_grow_counts;

    int find_leaf(const double* x) const;
    int leaf_count() const { return static_cast<int>(leaf_members.size()); }
};

// Axis-aligned CART regression forest with variance-reduction splits.
// Vector-valued responses use the total squared error over coordinates.
struct Forest {
    std::vector<Tree> trees;
    int predictor_dim = 0;
    int n_training = 0;
    ForestParams params;
};

// Grows params.n_trees trees on bootstrap subsamples (with replacement) of the
// rows of `predictors`/`responses`, then assigns every training row to its
// leaf in every tree. Deterministic given params.seed.
Forest fit_forest(const Eigen::MatrixXd& predictors, const Eigen::MatrixXd& responses,
                  const ForestParams& params);

// Quantile-forest weights of the training pairs at query point x:
//   w_i(x) = (1/M) * sum_m 1{i in leaf_m(x)} / |leaf_m(x)|.
// Returned sparse (index, weight), sorted by index; weights sum to 1.
std::vector<std::pair<int, double>> leaf_weights(const Forest& f, const double* x,
                                                 int x_dim);

// Versioned binary blob; round-trips exactly.
std::string forest_to_bytes(const Forest& f);
Forest forest_from_bytes(const std::string& bytes);

}  // namespace markovcheck
