#include "lexitrain/schedule.hpp"

#include <string>

#include "lexitrain/errors.hpp"

namespace lexitrain {

void check_policy(const SchedulePolicy& policy) {
  if (policy.block_size < 1) {
    throw Error(ErrorCode::InvalidPolicy,
                "blockSize must be at least 1, got " + std::to_string(policy.block_size));
  }
  if (policy.quiz_length < 1) {
    throw Error(ErrorCode::InvalidPolicy,
                "quizLength must be at least 1, got " + std::to_string(policy.quiz_length));
  }
}

nlohmann::json policy_to_json(const SchedulePolicy& policy) {
  return {{"blockSize", policy.block_size},
          {"quizLength", policy.quiz_length},
          {"quizToggle", policy.quiz_enabled}};
}

SchedulePolicy policy_from_json(const nlohmann::json& node) {
  SchedulePolicy policy;
  if (node.is_null()) return policy;
  if (!node.is_object()) throw Error(ErrorCode::InvalidPolicy, "policy must be an object");
  try {
    policy.block_size = node.value("blockSize", policy.block_size);
    policy.quiz_length = node.value("quizLength", policy.quiz_length);
    policy.quiz_enabled = node.value("quizToggle", policy.quiz_enabled);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidPolicy, std::string("malformed policy: ") + e.what());
  }
  return policy;
}

}  // namespace lexitrain
