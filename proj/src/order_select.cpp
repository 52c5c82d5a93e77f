#include "markovcheck/order_select.hpp"

namespace markovcheck {

namespace {
constexpr std::uint64_t kLevelStream = 0x6c65766cULL;
}

SelectionResult select_order_with(const std::function<TestResult(int)>& run_level,
                                  int max_level, double alpha) {
    if (max_level < 1) throw DataError("order selection: K must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DataError("order selection: alpha must be in (0, 1)");

    SelectionResult result;
    result.alpha = alpha;
    result.max_level = max_level;
    for (int k = 1; k <= max_level; ++k) {
        TestResult test = run_level(k);
        result.levels.push_back({k, test.p_value, test.reject});
        if (!test.reject) {
            result.selected_order = k;
            return result;
        }
    }
    result.is_pomdp = true;
    return result;
}

SelectionResult select_order(const Dataset& d, int max_level, double alpha,
                             const TestConfig& cfg) {
    d.validate();
    if (max_level > d.horizon - 2)
        throw DataError("order selection: level " + std::to_string(max_level) +
                        " infeasible for horizon T=" + std::to_string(d.horizon));
    return select_order_with(
        [&](int k) {
            TestConfig level_cfg = cfg;
            level_cfg.alpha = alpha;
            level_cfg.seed = derive_seed(cfg.seed, kLevelStream, k);
            return run_test(lag_embed(d, k), level_cfg);
        },
        max_level, alpha);
}

}  // namespace markovcheck
