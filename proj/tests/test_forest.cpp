#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "markovcheck/forest.hpp"

using namespace markovcheck;

namespace {

// 100 points at x=-1 (y=0) and x=+1 (y=10): any bootstrap draw sees both
// values, so the root split is forced.
void make_separable(Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
    X.resize(100, 1);
    Y.resize(100, 1);
    for (int i = 0; i < 100; ++i) {
        X(i, 0) = i < 50 ? -1.0 : 1.0;
        Y(i, 0) = i < 50 ? 0.0 : 10.0;
    }
}

Forest stump_forest() {
    Tree tree;
    tree.nodes.resize(3);
    tree.nodes[0].feature = 0;
    tree.nodes[0].threshold = 0.0;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    tree.nodes[1].leaf_index = 0;
    tree.nodes[2].leaf_index = 1;
    tree.leaf_members = {{0, 1}, {2, 3}};
    tree.leaf_grow_counts = {2, 2};
    Forest f;
    f.trees.push_back(std::move(tree));
    f.predictor_dim = 1;
    f.n_training = 4;
    f.params.n_trees = 1;
    f.params.min_leaf_size = 2;
    return f;
}

}  // namespace

TEST_CASE("max_depth 0 grows a single leaf holding every pair") {
    Eigen::MatrixXd X(4, 1), Y(4, 1);
    X << 0, 1, 2, 3;
    Y << 5, 6, 7, 8;
    ForestParams params;
    params.n_trees = 1;
    params.max_depth = 0;
    params.min_leaf_size = 1;
    params.seed = 3;
    Forest f = fit_forest(X, Y, params);
    REQUIRE(f.trees.size() == 1);
    CHECK(f.trees[0].leaf_count() == 1);
    CHECK(f.trees[0].leaf_members[0] == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("requested tree count is honored") {
    Eigen::MatrixXd X, Y;
    make_separable(X, Y);
    ForestParams params;
    params.n_trees = 100;
    params.min_leaf_size = 5;
    params.seed = 11;
    Forest f = fit_forest(X, Y, params);
    CHECK(f.trees.size() == 100);
}

TEST_CASE("CART split lands between separated values") {
    Eigen::MatrixXd X, Y;
    make_separable(X, Y);
    ForestParams params;
    params.n_trees = 5;
    params.max_depth = 1;
    params.min_leaf_size = 5;
    params.seed = 7;
    Forest f = fit_forest(X, Y, params);
    for (const Tree& tree : f.trees) {
        REQUIRE(tree.nodes[0].feature == 0);
        CHECK(tree.nodes[0].threshold == 0.0);  // midpoint of -1 and 1
        REQUIRE(tree.leaf_count() == 2);
        // Repopulation puts every x=-1 row in the left leaf.
        const double q = -1.0;
        const auto& left = tree.leaf_members[tree.find_leaf(&q)];
        CHECK(left.size() == 50);
        for (int id : left) CHECK(id < 50);
    }
}

TEST_CASE("split ties resolve to the lowest coordinate") {
    // Two identical predictive coordinates; mtry covers both.
    Eigen::MatrixXd X(100, 2), Y(100, 1);
    for (int i = 0; i < 100; ++i) {
        X(i, 0) = i < 50 ? -1.0 : 1.0;
        X(i, 1) = X(i, 0);
        Y(i, 0) = i < 50 ? 0.0 : 10.0;
    }
    ForestParams params;
    params.n_trees = 10;
    params.max_depth = 1;
    params.min_leaf_size = 5;
    params.mtry = 2;
    params.seed = 21;
    Forest f = fit_forest(X, Y, params);
    for (const Tree& tree : f.trees) CHECK(tree.nodes[0].feature == 0);
}

TEST_CASE("vector responses split on total variance") {
    // Coordinate 1 separates the second response coordinate only, coordinate 0
    // is noise; the split must still find coordinate 1.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1, 1);
    Eigen::MatrixXd X(200, 2), Y(200, 2);
    for (int i = 0; i < 200; ++i) {
        X(i, 0) = unif(rng);
        X(i, 1) = i < 100 ? -2.0 : 2.0;
        Y(i, 0) = 0.0;
        Y(i, 1) = i < 100 ? 1.0 : 9.0;
    }
    ForestParams params;
    params.n_trees = 10;
    params.max_depth = 1;
    params.min_leaf_size = 10;
    params.mtry = 2;
    params.seed = 9;
    Forest f = fit_forest(X, Y, params);
    for (const Tree& tree : f.trees) CHECK(tree.nodes[0].feature == 1);
}

TEST_CASE("fit_forest is deterministic under a fixed seed") {
    Eigen::MatrixXd X, Y;
    make_separable(X, Y);
    ForestParams params;
    params.n_trees = 20;
    params.min_leaf_size = 5;
    params.seed = 1234;
    Forest a = fit_forest(X, Y, params);
    Forest b = fit_forest(X, Y, params);
    CHECK(forest_to_bytes(a) == forest_to_bytes(b));
    params.seed = 1235;
    Forest c = fit_forest(X, Y, params);
    CHECK(forest_to_bytes(a) != forest_to_bytes(c));
}

TEST_CASE("fit_forest rejects too few pairs") {
    Eigen::MatrixXd X(4, 1), Y(4, 1);
    X << 0, 1, 2, 3;
    Y << 0, 1, 2, 3;
    ForestParams params;
    params.min_leaf_size = 5;
    CHECK_THROWS_AS(fit_forest(X, Y, params), DataError);
}

TEST_CASE("every training pair lands in exactly one leaf per tree") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd X(300, 3), Y(300, 2);
    for (int i = 0; i < 300; ++i) {
        for (int c = 0; c < 3; ++c) X(i, c) = gauss(rng);
        Y(i, 0) = X(i, 0) + 0.1 * gauss(rng);
        Y(i, 1) = X(i, 1) * X(i, 2);
    }
    ForestParams params;
    params.n_trees = 30;
    params.min_leaf_size = 4;
    params.seed = 88;
    Forest f = fit_forest(X, Y, params);
    for (const Tree& tree : f.trees) {
        std::vector<int> seen(300, 0);
        for (int l = 0; l < tree.leaf_count(); ++l) {
            CHECK(tree.leaf_grow_counts[l] >= params.min_leaf_size);
            for (int id : tree.leaf_members[l]) ++seen[id];
        }
        for (int c : seen) CHECK(c == 1);
        // Traversal agrees with the stored membership.
        Eigen::RowVectorXd x = X.row(17);
        int leaf = tree.find_leaf(x.data());
        const auto& members = tree.leaf_members[leaf];
        CHECK(std::find(members.begin(), members.end(), 17) != members.end());
    }
}

TEST_CASE("single-leaf tree spreads weight uniformly") {
    Eigen::MatrixXd X(4, 1), Y(4, 1);
    X << 0, 1, 2, 3;
    Y << 0, 0, 0, 0;
    ForestParams params;
    params.n_trees = 1;
    params.max_depth = 0;
    params.min_leaf_size = 1;
    Forest f = fit_forest(X, Y, params);
    const double q = 1.5;
    auto weights = leaf_weights(f, &q, 1);
    REQUIRE(weights.size() == 4);
    for (const auto& [id, w] : weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("stump weights split between left-leaf members") {
    Forest f = stump_forest();
    const double q = -1.0;
    auto weights = leaf_weights(f, &q, 1);
    REQUIRE(weights.size() == 2);
    CHECK(weights[0] == std::pair<int, double>{0, 0.5});
    CHECK(weights[1] == std::pair<int, double>{1, 0.5});
}

TEST_CASE("weights are a probability vector at any query") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0, 1);
    Eigen::MatrixXd X(150, 2), Y(150, 1);
    for (int i = 0; i < 150; ++i) {
        X(i, 0) = gauss(rng);
        X(i, 1) = gauss(rng);
        Y(i, 0) = std::sin(X(i, 0)) + gauss(rng) * 0.2;
    }
    ForestParams params;
    params.n_trees = 25;
    params.min_leaf_size = 3;
    params.seed = 15;
    Forest f = fit_forest(X, Y, params);
    for (int trial = 0; trial < 20; ++trial) {
        double q[2] = {gauss(rng) * 2, gauss(rng) * 2};
        auto weights = leaf_weights(f, q, 2);
        double sum = 0.0;
        for (const auto& [id, w] : weights) {
            CHECK(w >= 0.0);
            CHECK(id >= 0);
            CHECK(id < 150);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(weights.size() <= 150);
    }
    double q = 0.0;
    CHECK_THROWS_AS(leaf_weights(f, &q, 1), DataError);
}

TEST_CASE("forest blob round-trips") {
    Eigen::MatrixXd X, Y;
    make_separable(X, Y);
    ForestParams params;
    params.n_trees = 7;
    params.min_leaf_size = 5;
    params.seed = 5;
    Forest f = fit_forest(X, Y, params);
    std::string bytes = forest_to_bytes(f);
    Forest g = forest_from_bytes(bytes);
    CHECK(forest_to_bytes(g) == bytes);
    CHECK_THROWS_AS(forest_from_bytes(bytes.substr(0, bytes.size() - 3)), DataError);
    CHECK_THROWS_AS(forest_from_bytes("garbage"), DataError);
}
