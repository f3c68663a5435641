#include "lexitrain/scoring.hpp"

#include <array>
#include <utility>

#include "lexitrain/errors.hpp"

namespace lexitrain {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Proficiency, std::string_view>, 4> kNames{{
    {Proficiency::Newbie, "newbie"},
    {Proficiency::Beginner, "beginner"},
    {Proficiency::Average, "average"},
    {Proficiency::Advanced, "advanced"},
}};

}  // namespace

std::string_view to_string(Proficiency proficiency) {
  for (const auto& [value, name] : kNames) {
    if (value == proficiency) return name;
  }
  return "unknown";
}

std::optional<Proficiency> parse_proficiency(std::string_view text) {
  for (const auto& [value, name] : kNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

ScoreState score_answer(const ScoreState& state, bool correct, const ScoringConfig& config) {
  ScoreState next = state;
  ++next.questions_asked;
  if (correct) {
    ++next.questions_correct;
    next.points_earned += config.points_per_correct;
  }
  return next;
}

double accuracy_of(const ScoreState& state) {
  if (state.questions_asked == 0) return 0.0;
  return static_cast<double>(state.questions_correct) / static_cast<double>(state.questions_asked);
}

Proficiency classify(double accuracy, int questions_asked, const ClassificationBands& bands) {
  if (questions_asked <= 0) return Proficiency::Newbie;
  if (accuracy >= bands.advanced) return Proficiency::Advanced;
  if (accuracy >= bands.average) return Proficiency::Average;
  if (accuracy >= bands.beginner) return Proficiency::Beginner;
  return Proficiency::Newbie;
}

CompletionReport make_report(LevelRank level, const std::string& category, const ScoreState& state,
                             const ScoringConfig& config) {
  CompletionReport report;
  report.level = level;
  report.category = category;
  report.points_earned = state.points_earned;
  report.questions_asked = state.questions_asked;
  report.questions_correct = state.questions_correct;
  report.accuracy = accuracy_of(state);
  report.words_seen = state.words_seen;
  report.classification = classify(report.accuracy, state.questions_asked, config.bands);
  report.bands = config.bands;
  return report;
}

json report_to_json(const CompletionReport& report) {
  return {{"level", to_string(report.level)},
          {"category", report.category},
          {"pointsEarned", report.points_earned},
          {"questionsAsked", report.questions_asked},
          {"questionsCorrect", report.questions_correct},
          {"accuracy", report.accuracy},
          {"wordsSeen", report.words_seen},
          {"classification", to_string(report.classification)},
          {"bands",
           {{"beginner", report.bands.beginner},
            {"average", report.bands.average},
            {"advanced", report.bands.advanced}}}};
}

CompletionReport completion_report_from_json(const json& node) {
  try {
    CompletionReport report;
    auto level = parse_level_rank(node.at("level").get<std::string>());
    auto classification = parse_proficiency(node.at("classification").get<std::string>());
    if (!level || !classification) {
      throw Error(ErrorCode::SchemaError, "report has an unknown level or classification");
    }
    report.level = *level;
    report.category = node.at("category").get<std::string>();
    report.points_earned = node.at("pointsEarned").get<int>();
    report.questions_asked = node.at("questionsAsked").get<int>();
    report.questions_correct = node.at("questionsCorrect").get<int>();
    report.accuracy = node.at("accuracy").get<double>();
    report.words_seen = node.at("wordsSeen").get<int>();
    report.classification = *classification;
    const json& bands = node.at("bands");
    report.bands = {bands.at("beginner").get<double>(), bands.at("average").get<double>(),
                    bands.at("advanced").get<double>()};
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed completion report: ") + e.what());
  }
}

}  // namespace lexitrain
