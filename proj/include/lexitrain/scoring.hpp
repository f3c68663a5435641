#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lexitrain/lexicon.hpp"

namespace lexitrain {

struct ScoreState {
  int points_earned = 0;
  int questions_asked = 0;
  int questions_correct = 0;
  int words_seen = 0;

  bool operator==(const ScoreState&) const = default;
};

enum class Proficiency { Newbie, Beginner, Average, Advanced };

std::string_view to_string(Proficiency proficiency);
std::optional<Proficiency> parse_proficiency(std::string_view text);

// Lower accuracy bounds of each label above Newbie. Quartiles by default.
struct ClassificationBands {
  double beginner = 0.25;
  double average = 0.50;
  double advanced = 0.75;

  bool operator==(const ClassificationBands&) const = default;
};

struct ScoringConfig {
  int points_per_correct = 10;
  ClassificationBands bands;

  bool operator==(const ScoringConfig&) const = default;
};

struct CompletionReport {
  LevelRank level = LevelRank::Basic;
  std::string category;
  int points_earned = 0;
  int questions_asked = 0;
  int questions_correct = 0;
  double accuracy = 0.0;
  int words_seen = 0;
  Proficiency classification = Proficiency::Newbie;
  ClassificationBands bands;

  bool operator==(const CompletionReport&) const = default;
};

ScoreState score_answer(const ScoreState& state, bool correct, const ScoringConfig& config = {});

double accuracy_of(const ScoreState& state);

// No questions asked means no evidence, which is always Newbie.
Proficiency classify(double accuracy, int questions_asked, const ClassificationBands& bands = {});

CompletionReport make_report(LevelRank level, const std::string& category, const ScoreState& state,
                             const ScoringConfig& config = {});

nlohmann::json report_to_json(const CompletionReport& report);
CompletionReport completion_report_from_json(const nlohmann::json& node);

}  // namespace lexitrain
