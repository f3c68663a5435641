#include "lexitrain/session.hpp"

#include <algorithm>

#include "lexitrain/errors.hpp"

namespace lexitrain {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const Category& category_of(const LexiconPack& pack, const Session& session) {
  const Category* category = pack.find_category(session.level, session.category);
  if (category == nullptr) {
    throw Error(ErrorCode::UnknownCategory, "category '" + session.category + "' is not in pack '" +
                                                pack.pack_id() + "'");
  }
  return *category;
}

void begin_quiz(const LexiconPack& pack, Session& session, std::size_t count) {
  const auto& pool = session.block_pool.size() >= count ? session.block_pool : session.seen_item_ids;
  SeededStream stream(mix64(session.rng_seed ^ mix64(static_cast<std::uint64_t>(session.quiz_blocks_started))));
  auto block = generate_quiz_block(pack, pool, count, stream, "q", session.questions_generated + 1);

  ++session.quiz_blocks_started;
  session.questions_generated += static_cast<int>(block.size());
  session.pending_questions.assign(block.begin(), block.end());
  session.quiz_remaining = static_cast<int>(block.size());
  session.head_issued = false;
  session.items_since_last_quiz = 0;
  session.block_pool.clear();
  session.phase = Phase::Quizzing;
}

StepResult issue_head(Session session) {
  session.head_issued = true;
  QuizStep step{session.pending_questions.front()};
  return {std::move(step), std::move(session)};
}

json item_list(const std::vector<TrainingItem>& items) {
  json out = json::array();
  for (const auto& item : items) out.push_back(item_to_json(item));
  return out;
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Presenting: return "presenting";
    case Phase::Quizzing: return "quizzing";
    case Phase::Complete: return "complete";
  }
  return "unknown";
}

std::optional<std::pair<LevelRank, std::string>> first_missing_prerequisite(
    const ProgressRecord& progress, const LexiconPack& pack, LevelRank rank) {
  if (rank == LevelRank::Basic) return std::nullopt;
  const LevelRank below = static_cast<LevelRank>(static_cast<int>(rank) - 1);
  const Level* level = pack.find_level(below);
  if (level == nullptr) return std::nullopt;
  for (const auto& category : level->categories) {
    if (!progress.is_completed(pack.pack_id(), below, category.name)) {
      return std::make_pair(below, category.name);
    }
  }
  return std::nullopt;
}

LevelAccess unlock_state(const ProgressRecord& progress, const LexiconPack& pack) {
  LevelAccess access;
  for (LevelRank rank : kAllLevels) {
    if (!first_missing_prerequisite(progress, pack, rank)) access.unlocked.insert(rank);
  }
  return access;
}

Session start_session(const LexiconPack& pack, const ProgressRecord& progress,
                      const SessionRequest& request) {
  check_policy(request.policy);
  const ModalityStatus status = validate_modality(request.modality);
  if (!status.valid) {
    throw Error(ErrorCode::InvalidModality,
                std::string(to_string(request.modality.type)) + " feedback cannot target the " +
                    std::string(to_string(request.modality.level)) + " level",
                modality_to_json(request.modality));
  }
  const Level* level = pack.find_level(request.level);
  const Category* category = pack.find_category(request.level, request.category);
  if (level == nullptr || category == nullptr) {
    throw Error(ErrorCode::UnknownCategory,
                "no category '" + request.category + "' at level " + std::string(to_string(request.level)) +
                    " in pack '" + pack.pack_id() + "'",
                {{"level", to_string(request.level)}, {"category", request.category}});
  }
  if (auto missing = first_missing_prerequisite(progress, pack, request.level)) {
    throw Error(ErrorCode::LevelLocked,
                "level " + std::string(to_string(request.level)) + " is locked until " +
                    std::string(to_string(missing->first)) + "/" + missing->second + " is completed",
                {{"level", to_string(request.level)},
                 {"prerequisite", {{"level", to_string(missing->first)}, {"category", missing->second}}}});
  }
  if (request.policy.quiz_enabled) require_quiz_capable(pack);

  Session session;
  session.session_id = request.session_id;
  session.learner_id = request.learner_id;
  session.pack_id = pack.pack_id();
  session.level = request.level;
  session.category = request.category;
  session.modality = request.modality;
  session.policy = request.policy;
  session.scoring = request.scoring;
  session.rng_seed = request.seed;
  session.level_seen_before = progress.seen(pack.pack_id(), request.level);

  const bool already_done = progress.is_completed(pack.pack_id(), request.level, request.category);
  const bool others_done = std::all_of(level->categories.begin(), level->categories.end(), [&](const Category& c) {
    return c.name == request.category || progress.is_completed(pack.pack_id(), request.level, c.name);
  });
  session.completes_level = others_done && !already_done;
  return session;
}

StepResult next_step(const LexiconPack& pack, Session session) {
  if (session.phase == Phase::Complete) {
    if (!session.level_review_pending) {
      throw Error(ErrorCode::SessionComplete, "session '" + session.session_id + "' is complete");
    }
    session.level_review_pending = false;
    LevelCompleteStep step{session.level, {}};
    std::vector<std::string> ids = session.level_seen_before;
    for (const auto& id : session.seen_item_ids) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    for (const auto& id : ids) {
      if (const TrainingItem* item = pack.find_item(id)) step.review_list.push_back(*item);
    }
    return {std::move(step), std::move(session)};
  }

  if (session.phase == Phase::Quizzing) return issue_head(std::move(session));

  const Category& category = category_of(pack, session);
  const auto block_size = session.policy.block_size;

  if (session.policy.quiz_enabled && session.items_since_last_quiz >= block_size) {
    begin_quiz(pack, session, static_cast<std::size_t>(session.policy.quiz_length));
    return issue_head(std::move(session));
  }

  if (session.cursor < category.items.size()) {
    if (session.items_since_last_quiz >= block_size) {
      // Quizzes are off; the block boundary passes silently.
      session.items_since_last_quiz = 0;
      session.block_pool.clear();
    }
    const TrainingItem& item = category.items[session.cursor++];
    if (std::find(session.seen_item_ids.begin(), session.seen_item_ids.end(), item.id) ==
        session.seen_item_ids.end()) {
      session.seen_item_ids.push_back(item.id);
    }
    session.block_pool.push_back(item.id);
    ++session.items_since_last_quiz;
    session.score.words_seen = static_cast<int>(session.seen_item_ids.size());
    return {PresentStep{item}, std::move(session)};
  }

  if (session.policy.quiz_enabled && session.items_since_last_quiz > 0) {
    const auto count = std::min(session.policy.quiz_length, session.items_since_last_quiz);
    begin_quiz(pack, session, static_cast<std::size_t>(count));
    return issue_head(std::move(session));
  }

  session.phase = Phase::Complete;
  session.report = make_report(session.level, session.category, session.score, session.scoring);
  session.level_review_pending = session.completes_level;
  return {CategoryCompleteStep{*session.report}, std::move(session)};
}

AnswerResult submit_answer(const LexiconPack& pack, Session session, const std::string& question_id,
                           int selected_index) {
  auto pending = std::find_if(session.pending_questions.begin(), session.pending_questions.end(),
                              [&](const QuizQuestion& q) { return q.question_id == question_id; });
  if (pending == session.pending_questions.end()) {
    if (std::find(session.answered_question_ids.begin(), session.answered_question_ids.end(), question_id) !=
        session.answered_question_ids.end()) {
      throw Error(ErrorCode::OutOfOrderAnswer, "question '" + question_id + "' was already answered",
                  {{"questionId", question_id}});
    }
    throw Error(ErrorCode::UnknownQuestion, "no question '" + question_id + "' in session '" +
                                                session.session_id + "'",
                {{"questionId", question_id}});
  }
  if (pending != session.pending_questions.begin() || !session.head_issued) {
    throw Error(ErrorCode::OutOfOrderAnswer, "question '" + question_id + "' has not been asked yet",
                {{"questionId", question_id}, {"expected", session.pending_questions.front().question_id}});
  }

  const QuizQuestion question = session.pending_questions.front();
  const TrainingItem* item = pack.find_item(question.subject_item_id);
  if (item == nullptr) {
    throw Error(ErrorCode::UnknownQuestion, "quiz subject '" + question.subject_item_id + "' vanished from pack");
  }
  FeedbackMessage feedback = render_feedback(question, selected_index, session.modality, *item);

  session.score = score_answer(session.score, selected_index == question.correct_index, session.scoring);
  if (session.modality.timing == FeedbackTiming::Delayed) {
    session.deferred.push_back({question, selected_index});
  }
  session.answered_question_ids.push_back(question_id);
  session.pending_questions.pop_front();
  session.head_issued = false;
  --session.quiz_remaining;
  if (session.pending_questions.empty()) {
    session.phase = Phase::Presenting;
    session.quiz_remaining = 0;
  }
  return {std::move(feedback), std::move(session)};
}

FlushResult flush_delayed(const LexiconPack& pack, Session session) {
  if (session.modality.timing != FeedbackTiming::Delayed) {
    throw Error(ErrorCode::NothingDeferred, "session '" + session.session_id + "' uses immediate feedback");
  }
  if (session.phase == Phase::Quizzing) {
    throw Error(ErrorCode::NothingDeferred, "delayed feedback is released when the quiz block completes");
  }
  if (session.deferred.empty()) {
    throw Error(ErrorCode::NothingDeferred, "no deferred answers to release");
  }
  FlushResult result;
  result.messages.reserve(session.deferred.size());
  for (const auto& answer : session.deferred) {
    const TrainingItem* item = pack.find_item(answer.question.subject_item_id);
    if (item == nullptr) {
      throw Error(ErrorCode::UnknownQuestion, "quiz subject '" + answer.question.subject_item_id + "' vanished");
    }
    result.messages.push_back(compose_feedback(answer.question, answer.selected_index, session.modality, *item));
  }
  session.deferred.clear();
  result.session = std::move(session);
  return result;
}

CompletionReport completion_report(const Session& session) {
  if (session.phase != Phase::Complete || !session.report) {
    throw Error(ErrorCode::SessionNotComplete, "session '" + session.session_id + "' is not complete");
  }
  return *session.report;
}

json step_to_json(const Step& step) {
  return std::visit(overloaded{
                        [](const PresentStep& s) -> json {
                          return {{"kind", "present"}, {"item", item_to_json(s.item)}};
                        },
                        [](const QuizStep& s) -> json {
                          return {{"kind", "quiz"}, {"question", question_to_json(s.question, false)}};
                        },
                        [](const CategoryCompleteStep& s) -> json {
                          return {{"kind", "category-complete"}, {"report", report_to_json(s.report)}};
                        },
                        [](const LevelCompleteStep& s) -> json {
                          return {{"kind", "level-complete"},
                                  {"level", to_string(s.level)},
                                  {"reviewList", item_list(s.review_list)}};
                        },
                    },
                    step);
}

json session_to_json(const Session& session) {
  json pending = json::array();
  for (const auto& q : session.pending_questions) pending.push_back(question_to_json(q, true));
  json deferred = json::array();
  for (const auto& d : session.deferred) {
    deferred.push_back({{"question", question_to_json(d.question, true)}, {"selectedIndex", d.selected_index}});
  }
  return {{"sessionId", session.session_id},
          {"learnerId", session.learner_id},
          {"packId", session.pack_id},
          {"level", to_string(session.level)},
          {"category", session.category},
          {"cursor", session.cursor},
          {"seenItemIds", session.seen_item_ids},
          {"itemsSinceLastQuiz", session.items_since_last_quiz},
          {"blockPool", session.block_pool},
          {"phase", to_string(session.phase)},
          {"quizRemaining", session.quiz_remaining},
          {"pendingQuestions", std::move(pending)},
          {"headIssued", session.head_issued},
          {"answeredQuestionIds", session.answered_question_ids},
          {"deferred", std::move(deferred)},
          {"score",
           {{"pointsEarned", session.score.points_earned},
            {"questionsAsked", session.score.questions_asked},
            {"questionsCorrect", session.score.questions_correct},
            {"wordsSeen", session.score.words_seen}}},
          {"modality", modality_to_json(session.modality)},
          {"policy", policy_to_json(session.policy)},
          {"pointsPerCorrect", session.scoring.points_per_correct},
          {"rngSeed", session.rng_seed},
          {"quizBlocksStarted", session.quiz_blocks_started},
          {"questionsGenerated", session.questions_generated},
          {"levelSeenBefore", session.level_seen_before},
          {"completesLevel", session.completes_level},
          {"levelReviewPending", session.level_review_pending},
          {"report", session.report ? report_to_json(*session.report) : json(nullptr)}};
}

}  // namespace lexitrain
