#pragma once

#include <functional>
#include <vector>

#include "markovcheck/ma_test.hpp"

namespace markovcheck {

struct LevelRecord {
    int level = 0;
    double p_value = 1.0;
    bool reject = false;
};

struct SelectionResult {
    std::vector<LevelRecord> levels;  // stops at the first non-rejection
    bool is_pomdp = false;
    int selected_order = 0;  // valid when !is_pomdp
    double alpha = 0.0;
    int max_level = 0;  // K
};

// Sequentially tests lag-embedded data at levels 1..max_level, stopping at
// the first non-rejection; if every level rejects, flags a POMDP. Each level
// runs with a level-derived seed from cfg.seed and re-normalizes its embedded
// coordinates.
SelectionResult select_order(const Dataset& d, int max_level, double alpha,
                             const TestConfig& cfg);

// Core loop with an injected per-level test runner; used to pin selection
// semantics against fixed p-value sequences.
SelectionResult select_order_with(const std::function<TestResult(int)>& run_level,
                                  int max_level, double alpha);

}  // namespace markovcheck
