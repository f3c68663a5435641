#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lexitrain/feedback.hpp"
#include "lexitrain/lexicon.hpp"
#include "lexitrain/progress_log.hpp"
#include "lexitrain/schedule.hpp"
#include "lexitrain/scoring.hpp"

namespace lexitrain {

enum class Phase { Presenting, Quizzing, Complete };

std::string_view to_string(Phase phase);

struct DeferredAnswer {
  QuizQuestion question;
  int selected_index = 0;

  bool operator==(const DeferredAnswer&) const = default;
};

// Live state of one learner working through one category. Values are
// transformed by the free functions below; nothing here is shared.
struct Session {
  std::string session_id;
  std::string learner_id;
  std::string pack_id;
  LevelRank level = LevelRank::Basic;
  std::string category;

  std::size_t cursor = 0;  // next unseen item
  std::vector<std::string> seen_item_ids;
  int items_since_last_quiz = 0;
  // Items presented since the last quiz block; the preferred question pool.
  std::vector<std::string> block_pool;

  Phase phase = Phase::Presenting;
  int quiz_remaining = 0;
  std::deque<QuizQuestion> pending_questions;
  // True once next_step has handed out the head of pending_questions.
  bool head_issued = false;
  std::vector<std::string> answered_question_ids;
  std::vector<DeferredAnswer> deferred;

  ScoreState score;
  FeedbackModality modality;
  SchedulePolicy policy;
  ScoringConfig scoring;
  std::uint64_t rng_seed = 0;
  int quiz_blocks_started = 0;
  int questions_generated = 0;

  // Level context captured from persisted progress at start.
  std::vector<std::string> level_seen_before;
  bool completes_level = false;
  bool level_review_pending = false;
  std::optional<CompletionReport> report;

  bool operator==(const Session&) const = default;
};

struct PresentStep {
  TrainingItem item;
  bool operator==(const PresentStep&) const = default;
};
struct QuizStep {
  QuizQuestion question;
  bool operator==(const QuizStep&) const = default;
};
struct CategoryCompleteStep {
  CompletionReport report;
  bool operator==(const CategoryCompleteStep&) const = default;
};
struct LevelCompleteStep {
  LevelRank level = LevelRank::Basic;
  std::vector<TrainingItem> review_list;  // first-seen order across the level
  bool operator==(const LevelCompleteStep&) const = default;
};

using Step = std::variant<PresentStep, QuizStep, CategoryCompleteStep, LevelCompleteStep>;

struct StepResult {
  Step step;
  Session session;
};

struct AnswerResult {
  FeedbackMessage feedback;
  Session session;
};

struct FlushResult {
  std::vector<FeedbackMessage> messages;
  Session session;
};

struct LevelAccess {
  std::set<LevelRank> unlocked;

  bool contains(LevelRank rank) const { return unlocked.contains(rank); }
  bool operator==(const LevelAccess&) const = default;
};

// Basic is always open; each further level opens once every category of the
// level below it has been completed.
LevelAccess unlock_state(const ProgressRecord& progress, const LexiconPack& pack);

// The first category (in pack order) that blocks access to `rank`, if any.
std::optional<std::pair<LevelRank, std::string>> first_missing_prerequisite(
    const ProgressRecord& progress, const LexiconPack& pack, LevelRank rank);

struct SessionRequest {
  std::string session_id;
  std::string learner_id;
  LevelRank level = LevelRank::Basic;
  std::string category;
  SchedulePolicy policy;
  FeedbackModality modality;
  std::uint64_t seed = 0;
  ScoringConfig scoring;
};

// Errors: LevelLocked (detail names the first incomplete prerequisite),
// UnknownCategory, InvalidModality, InvalidPolicy, and InsufficientDistractors
// when quizzes are on but the pack cannot seat four options.
Session start_session(const LexiconPack& pack, const ProgressRecord& progress,
                      const SessionRequest& request);

// Deterministic in (session, pack). Throws Error{SessionComplete} once the
// session has nothing left to show. While a question is awaiting its answer,
// calling again returns the same Quiz step without changing state.
StepResult next_step(const LexiconPack& pack, Session session);

// Errors: OutOfOrderAnswer (not the issued head, or already answered),
// UnknownQuestion, InvalidRequest (selected index outside 0..3).
AnswerResult submit_answer(const LexiconPack& pack, Session session, const std::string& question_id,
                           int selected_index);

// Full messages for every deferred answer, in answer order; clears the buffer.
// Throws Error{NothingDeferred} under immediate timing, while a block is still
// open, or when nothing is buffered.
FlushResult flush_delayed(const LexiconPack& pack, Session session);

// Throws Error{SessionNotComplete} before the category is finished.
CompletionReport completion_report(const Session& session);

nlohmann::json step_to_json(const Step& step);
nlohmann::json session_to_json(const Session& session);

}  // namespace lexitrain
