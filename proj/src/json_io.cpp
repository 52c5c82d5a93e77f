#include "markovcheck/json_io.hpp"

#include <cstdio>

namespace markovcheck {

nlohmann::json test_result_to_json(const TestResult& result) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["statistic"] = result.statistic;
    j["critical_value"] = result.critical_value;
    j["p_value"] = result.p_value;
    j["reject"] = result.reject;
    j["alpha"] = result.alpha;
    j["B"] = result.freq_count;
    j["Q"] = result.max_lag;
    j["L"] = result.fold_count;
    j["seed"] = result.seed;
    j["argmax"] = {{"q", result.argmax.lag},
                   {"b", result.argmax.freq + 1},
                   {"part", result.argmax.imaginary ? "imag" : "real"}};
    j["runtime_ms"] = result.runtime_ms;
    if (!result.warnings.empty()) j["warnings"] = result.warnings;
    return j;
}

nlohmann::json selection_result_to_json(const SelectionResult& result) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    nlohmann::json levels = nlohmann::json::array();
    for (const LevelRecord& record : result.levels)
        levels.push_back({{"k", record.level},
                          {"p_value", record.p_value},
                          {"reject", record.reject}});
    j["levels"] = std::move(levels);
    if (result.is_pomdp) {
        j["outcome"] = {{"type", "pomdp"}};
    } else {
        j["outcome"] = {{"type", "order"}, {"k", result.selected_order}};
    }
    j["alpha"] = result.alpha;
    j["K"] = result.max_level;
    return j;
}

nlohmann::json value_table_to_json(const std::vector<ValueTableRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const ValueTableRow& row : rows)
        j.push_back({{"k", row.k},
                     {"value", row.value},
                     {"se", row.se},
                     {"n_reps", row.n_reps}});
    return j;
}

std::string value_table_to_csv(const std::vector<ValueTableRow>& rows) {
    std::string out = "k,value,se,n_reps\n";
    char buf[96];
    for (const ValueTableRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", row.k, row.value, row.se,
                      row.n_reps);
        out += buf;
    }
    return out;
}

}  // namespace markovcheck
