#pragma once

#include <json.hpp>

#include "markovcheck/ma_test.hpp"
#include "markovcheck/order_select.hpp"
#include "markovcheck/policy_eval.hpp"

namespace markovcheck {

inline constexpr int kSchemaVersion = 1;

// {statistic, critical_value, p_value, reject, alpha, B, Q, L, seed,
//  argmax:{q,b,part}, runtime_ms}; b is reported 1-based.
nlohmann::json test_result_to_json(const TestResult& result);

// {levels:[{k,p_value,reject}], outcome:{type:"order"|"pomdp", k}, alpha, K}
nlohmann::json selection_result_to_json(const SelectionResult& result);

nlohmann::json value_table_to_json(const std::vector<ValueTableRow>& rows);

// CSV with header k,value,se,n_reps
std::string value_table_to_csv(const std::vector<ValueTableRow>& rows);

}  // namespace markovcheck
