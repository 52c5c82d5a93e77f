#include "markovcheck/folds.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace markovcheck {

std::vector<int> FoldAssignment::fold_members(int fold) const {
    std::vector<int> out;
    for (int j = 0; j < n(); ++j)
        if (fold_of_trajectory[j] == fold) out.push_back(j);
    return out;
}

std::vector<int> FoldAssignment::fold_complement(int fold) const {
    std::vector<int> out;
    for (int j = 0; j < n(); ++j)
        if (fold_of_trajectory[j] != fold) out.push_back(j);
    return out;
}

void FoldAssignment::validate() const {
    if (fold_count < 1) throw DataError("fold count must be positive");
    std::vector<int> sizes(fold_count, 0);
    for (int f : fold_of_trajectory) {
        if (f < 0 || f >= fold_count) throw DataError("fold label out of range");
        ++sizes[f];
    }
    auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    if (*lo == 0 || *hi - *lo > 1) throw DataError("fold sizes must differ by at most 1");
}

FoldAssignment make_folds(int n, int fold_count, std::uint64_t seed) {
    if (n < 2) throw DataError("cross-fitting requires at least 2 trajectories");
    if (fold_count < 1) throw DataError("fold count must be positive");
    int L = std::min(fold_count, n);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    // First (n mod L) folds get the extra trajectory.
    FoldAssignment folds;
    folds.fold_count = L;
    folds.fold_of_trajectory.assign(n, -1);
    int base = n / L;
    int extra = n % L;
    std::size_t pos = 0;
    for (int f = 0; f < L; ++f) {
        int size = base + (f < extra ? 1 : 0);
        for (int i = 0; i < size; ++i) folds.fold_of_trajectory[order[pos++]] = f;
    }
    folds.validate();
    return folds;
}

}  // namespace markovcheck
