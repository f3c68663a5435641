#pragma once

#include <json.hpp>

namespace lexitrain {

// After every `block_size` presented items a quiz of `quiz_length` questions
// about those items is injected, unless quizzes are switched off.
struct SchedulePolicy {
  int block_size = 5;
  int quiz_length = 3;
  bool quiz_enabled = true;

  bool operator==(const SchedulePolicy&) const = default;
};

// Throws Error{InvalidPolicy} unless block_size >= 1 and quiz_length >= 1.
void check_policy(const SchedulePolicy& policy);

nlohmann::json policy_to_json(const SchedulePolicy& policy);
// Missing fields take the defaults above.
SchedulePolicy policy_from_json(const nlohmann::json& node);

}  // namespace lexitrain
