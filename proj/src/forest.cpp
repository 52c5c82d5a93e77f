#include "markovcheck/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace markovcheck {

namespace {
constexpr std::uint64_t kTreeStream = 0x7265657305ULL;
}

int ForestParams::resolve_mtry(int predictor_dim) const {
    if (mtry > 0) return std::min(mtry, predictor_dim);
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(predictor_dim))));
}

void ForestParams::validate(int predictor_dim) const {
    if (n_trees < 1) throw DataError("forest: n_trees must be positive");
    if (max_depth < 0) throw DataError("forest: max_depth must be nonnegative");
    if (min_leaf_size < 1) throw DataError("forest: min_leaf_size must be positive");
    if (mtry > predictor_dim)
        throw DataError("forest: mtry exceeds predictor dimension");
    if (bootstrap_fraction <= 0.0 || bootstrap_fraction > 1.0)
        throw DataError("forest: bootstrap_fraction must be in (0, 1]");
}

int Tree::find_leaf(const double* x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& nd = nodes[node];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[node].leaf_index;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::MatrixXd& Y;
    const ForestParams& params;
    int mtry;
    std::mt19937_64 rng;

    Tree tree;
    std::vector<int> sample;      // bootstrap row ids, partitioned in place
    std::vector<int> coord_pool;  // scratch for mtry draws
    std::vector<std::pair<double, int>> sorted;  // (value, row id) scratch

    struct Split {
        bool found = false;
        int feature = -1;
        double threshold = 0.0;
        double score = 0.0;
    };

    // Best variance-reduction split over an mtry-subset of coordinates,
    // maximizing |sumL|^2/nL + |sumR|^2/nR. Ties resolved toward the lowest
    // coordinate index, then the lowest threshold.
    Split find_split(int lo, int hi) {
        const int size = hi - lo;
        const int rdim = static_cast<int>(Y.cols());

        // Draw mtry distinct coordinates, then visit them in ascending order.
        const int dim = static_cast<int>(X.cols());
        coord_pool.resize(dim);
        for (int c = 0; c < dim; ++c) coord_pool[c] = c;
        for (int i = 0; i < mtry; ++i) {
            std::uniform_int_distribution<int> pick(i, dim - 1);
            std::swap(coord_pool[i], coord_pool[pick(rng)]);
        }
        std::sort(coord_pool.begin(), coord_pool.begin() + mtry);

        Eigen::VectorXd total = Eigen::VectorXd::Zero(rdim);
        for (int i = lo; i < hi; ++i) total += Y.row(sample[i]).transpose();
        const double parent_score = total.squaredNorm() / static_cast<double>(size);

        Split best;
        best.score = parent_score;
        Eigen::VectorXd left_sum(rdim);
        for (int ci = 0; ci < mtry; ++ci) {
            const int c = coord_pool[ci];
            sorted.resize(size);
            for (int i = 0; i < size; ++i)
                sorted[i] = {X(sample[lo + i], c), sample[lo + i]};
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (sorted.front().first == sorted.back().first) continue;

            left_sum.setZero();
            for (int i = 0; i + 1 < size; ++i) {
                left_sum += Y.row(sorted[i].second).transpose();
                if (sorted[i].first == sorted[i + 1].first) continue;
                const int nl = i + 1;
                const int nr = size - nl;
                if (nl < params.min_leaf_size || nr < params.min_leaf_size) continue;
                double score = left_sum.squaredNorm() / nl +
                               (total - left_sum).squaredNorm() / nr;
                if (score > best.score) {
                    best.found = true;
                    best.feature = c;
                    best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
                    best.score = score;
                }
            }
        }
        return best;
    }

    // Builds the subtree over sample[lo:hi); returns the node index.
    int build(int lo, int hi, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        const int size = hi - lo;
        Split split;
        if (depth < params.max_depth && size >= 2 * params.min_leaf_size)
            split = find_split(lo, hi);

        int mid = lo;
        if (split.found) {
            auto mid_it = std::partition(sample.begin() + lo, sample.begin() + hi, [&](int id) {
                return X(id, split.feature) <= split.threshold;
            });
            mid = static_cast<int>(mid_it - sample.begin());
        }
        // The midpoint threshold can collapse onto a sample value for nearly
        // equal floats; fall back to a leaf rather than create an empty child.
        if (!split.found || mid == lo || mid == hi) {
            tree.nodes[node_id].leaf_index = static_cast<int>(tree.leaf_grow_counts.size());
            tree.leaf_grow_counts.push_back(size);
            return node_id;
        }

        tree.nodes[node_id].feature = split.feature;
        tree.nodes[node_id].threshold = split.threshold;
        int left = build(lo, mid, depth + 1);
        tree.nodes[node_id].left = left;
        int right = build(mid, hi, depth + 1);
        tree.nodes[node_id].right = right;
        return node_id;
    }
};

Tree grow_tree(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
               const ForestParams& params, int mtry, std::uint64_t seed) {
    TreeBuilder builder{X, Y, params, mtry, std::mt19937_64(seed), {}, {}, {}, {}};
    const int n = static_cast<int>(X.rows());
    int draws = std::max(1, static_cast<int>(std::llround(params.bootstrap_fraction * n)));
    builder.sample.resize(draws);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < draws; ++i) builder.sample[i] = pick(builder.rng);

    builder.build(0, draws, 0);

    // Assign every training row to its leaf.
    Tree tree = std::move(builder.tree);
    tree.leaf_members.resize(tree.leaf_grow_counts.size());
    for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd row = X.row(i);
        tree.leaf_members[tree.find_leaf(row.data())].push_back(i);
    }
    return tree;
}

}  // namespace

Forest fit_forest(const Eigen::MatrixXd& predictors, const Eigen::MatrixXd& responses,
                  const ForestParams& params) {
    const int n = static_cast<int>(predictors.rows());
    const int dim = static_cast<int>(predictors.cols());
    if (n != responses.rows())
        throw DataError("forest: predictors and responses disagree on row count");
    if (dim < 1) throw DataError("forest: predictors must have at least one column");
    params.validate(dim);
    if (n < 2 * params.min_leaf_size)
        throw DataError("forest: need at least 2*min_leaf_size = " +
                        std::to_string(2 * params.min_leaf_size) + " training pairs, got " +
                        std::to_string(n));

    Forest forest;
    forest.predictor_dim = dim;
    forest.n_training = n;
    forest.params = params;
    forest.trees.resize(params.n_trees);
    const int mtry = params.resolve_mtry(dim);
    parallel_for(static_cast<std::size_t>(params.n_trees), [&](std::size_t m) {
        forest.trees[m] = grow_tree(predictors, responses, params, mtry,
                                    derive_seed(params.seed, kTreeStream, m));
    });
    return forest;
}

std::vector<std::pair<int, double>> leaf_weights(const Forest& f, const double* x,
                                                 int x_dim) {
    if (x_dim != f.predictor_dim)
        throw DataError("leaf_weights: query dimension mismatch");
    const double tree_scale = 1.0 / static_cast<double>(f.trees.size());
    std::vector<std::pair<int, double>> entries;
    for (const Tree& tree : f.trees) {
        const auto& members = tree.leaf_members[tree.find_leaf(x)];
        const double w = tree_scale / static_cast<double>(members.size());
        for (int id : members) entries.emplace_back(id, w);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> merged;
    for (const auto& [id, w] : entries) {
        if (!merged.empty() && merged.back().first == id)
            merged.back().second += w;
        else
            merged.emplace_back(id, w);
    }
    return merged;
}

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, const T& v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw DataError("forest blob truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::string forest_to_bytes(const Forest& f) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, static_cast<std::int32_t>(f.predictor_dim));
    put(out, static_cast<std::int32_t>(f.n_training));
    put(out, static_cast<std::int32_t>(f.params.n_trees));
    put(out, static_cast<std::int32_t>(f.params.max_depth));
    put(out, static_cast<std::int32_t>(f.params.min_leaf_size));
    put(out, static_cast<std::int32_t>(f.params.mtry));
    put(out, f.params.bootstrap_fraction);
    put(out, f.params.seed);
    put(out, static_cast<std::int32_t>(f.trees.size()));
    for (const Tree& tree : f.trees) {
        put(out, static_cast<std::int32_t>(tree.nodes.size()));
        for (const TreeNode& nd : tree.nodes) {
            put(out, static_cast<std::int32_t>(nd.feature));
            put(out, nd.threshold);
            put(out, static_cast<std::int32_t>(nd.left));
            put(out, static_cast<std::int32_t>(nd.right));
            put(out, static_cast<std::int32_t>(nd.leaf_index));
        }
        put(out, static_cast<std::int32_t>(tree.leaf_members.size()));
        for (std::size_t l = 0; l < tree.leaf_members.size(); ++l) {
            put(out, static_cast<std::int32_t>(tree.leaf_grow_counts[l]));
            put(out, static_cast<std::int32_t>(tree.leaf_members[l].size()));
            for (int id : tree.leaf_members[l]) put(out, static_cast<std::int32_t>(id));
        }
    }
    return out;
}

Forest forest_from_bytes(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a forest blob");
    pos += sizeof(kMagic);
    if (get<std::uint32_t>(bytes, pos) != kVersion)
        throw DataError("unsupported forest blob version");

    Forest f;
    f.predictor_dim = get<std::int32_t>(bytes, pos);
    f.n_training = get<std::int32_t>(bytes, pos);
    f.params.n_trees = get<std::int32_t>(bytes, pos);
    f.params.max_depth = get<std::int32_t>(bytes, pos);
    f.params.min_leaf_size = get<std::int32_t>(bytes, pos);
    f.params.mtry = get<std::int32_t>(bytes, pos);
    f.params.bootstrap_fraction = get<double>(bytes, pos);
    f.params.seed = get<std::uint64_t>(bytes, pos);
    int n_trees = get<std::int32_t>(bytes, pos);
    f.trees.resize(n_trees);
    for (Tree& tree : f.trees) {
        int n_nodes = get<std::int32_t>(bytes, pos);
        tree.nodes.resize(n_nodes);
        for (TreeNode& nd : tree.nodes) {
            nd.feature = get<std::int32_t>(bytes, pos);
            nd.threshold = get<double>(bytes, pos);
            nd.left = get<std::int32_t>(bytes, pos);
            nd.right = get<std::int32_t>(bytes, pos);
            nd.leaf_index = get<std::int32_t>(bytes, pos);
        }
        int n_leaves = get<std::int32_t>(bytes, pos);
        tree.leaf_grow_counts.resize(n_leaves);
        tree.leaf_members.resize(n_leaves);
        for (int l = 0; l < n_leaves; ++l) {
            tree.leaf_grow_counts[l] = get<std::int32_t>(bytes, pos);
            int n_members = get<std::int32_t>(bytes, pos);
            tree.leaf_members[l].resize(n_members);
            for (int& id : tree.leaf_members[l]) id = get<std::int32_t>(bytes, pos);
        }
    }
    if (pos != bytes.size()) throw DataError("trailing bytes in forest blob");
    return f;
}

}  // namespace markovcheck
