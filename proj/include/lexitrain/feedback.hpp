#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lexitrain/lexicon.hpp"
#include "lexitrain/random.hpp"

namespace lexitrain {

enum class FeedbackType { KR, KCR, EF };
enum class FeedbackLevel { Self, Task, Process, Regulation };
enum class FeedbackTiming { Immediate, Delayed };

std::string_view to_string(FeedbackType type);
std::string_view to_string(FeedbackLevel level);
std::string_view to_string(FeedbackTiming timing);
std::optional<FeedbackType> parse_feedback_type(std::string_view text);
std::optional<FeedbackLevel> parse_feedback_level(std::string_view text);
std::optional<FeedbackTiming> parse_feedback_timing(std::string_view text);

struct FeedbackModality {
  FeedbackType type = FeedbackType::KR;
  FeedbackLevel level = FeedbackLevel::Task;
  FeedbackTiming timing = FeedbackTiming::Immediate;

  bool operator==(const FeedbackModality&) const = default;
};

struct ModalityStatus {
  bool valid = false;
  std::optional<std::string> advisory;

  bool operator==(const ModalityStatus&) const = default;
};

inline constexpr std::string_view kSelfLevelAdvisory =
    "Elaborated feedback aimed at the self level carries no task information "
    "and is considered ineffective for learning.";

// KR and KCR attach to the task level only; EF attaches to all four levels,
// with the self level flagged as ineffective.
ModalityStatus validate_modality(const FeedbackModality& modality);

inline constexpr std::size_t kOptionCount = 4;

struct QuizQuestion {
  std::string question_id;
  std::string subject_item_id;
  std::string prompt;
  std::array<std::string, kOptionCount> options;
  int correct_index = 0;

  bool operator==(const QuizQuestion&) const = default;
};

enum class Verdict { Correct, Incorrect, Deferred };
enum class Highlight { Green, Red, None };

std::string_view to_string(Verdict verdict);
std::string_view to_string(Highlight highlight);

struct FeedbackMessage {
  std::string question_id;
  Verdict verdict = Verdict::Deferred;
  Highlight highlight = Highlight::None;
  std::optional<std::string> body;
  std::optional<std::string> level_note;
  std::optional<std::string> advisory;

  bool operator==(const FeedbackMessage&) const = default;
};

// Throws Error{InsufficientDistractors} when the pack has fewer than four
// distinct translations.
void require_quiz_capable(const LexiconPack& pack);

// Builds one question about `subject_id`. Distractors are drawn from the
// subject's category first, widening to its level and then the whole pack
// until three distinct translations other than the answer are available.
QuizQuestion build_question(const LexiconPack& pack, const std::string& subject_id,
                            std::string question_id, SeededStream& stream);

// Draws one subject uniformly from `pool`.
QuizQuestion generate_question(const LexiconPack& pack, std::span<const std::string> pool,
                               SeededStream& stream, std::string question_id = "q1");

// `count` questions whose subjects are drawn without replacement from `pool`
// (count is truncated to the pool size). Ids are "<prefix><n>" for
// n = first_number, first_number + 1, ...
std::vector<QuizQuestion> generate_quiz_block(const LexiconPack& pack,
                                              std::span<const std::string> pool,
                                              std::size_t count, SeededStream& stream,
                                              std::string_view id_prefix, int first_number);

// Full message regardless of timing.
FeedbackMessage compose_feedback(const QuizQuestion& question, int selected_index,
                                 const FeedbackModality& modality, const TrainingItem& item);

// Honors timing: under Delayed the returned message is a Deferred marker and
// the full content is produced later by compose_feedback (see flush_delayed).
FeedbackMessage render_feedback(const QuizQuestion& question, int selected_index,
                                const FeedbackModality& modality, const TrainingItem& item);

nlohmann::json modality_to_json(const FeedbackModality& modality);
FeedbackModality modality_from_json(const nlohmann::json& node);
nlohmann::json feedback_to_json(const FeedbackMessage& message);
// include_answer=false produces the client-facing form without correctIndex.
nlohmann::json question_to_json(const QuizQuestion& question, bool include_answer);

}  // namespace lexitrain
