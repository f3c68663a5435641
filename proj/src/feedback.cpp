#include "lexitrain/feedback.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "lexitrain/errors.hpp"

namespace lexitrain {

using nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::pair<Enum, std::string_view>, N>& table,
                           std::string_view text) {
  for (const auto& [value, name] : table) {
    if (name == text) return value;
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table,
                         Enum value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "unknown";
}

constexpr std::array<std::pair<FeedbackType, std::string_view>, 3> kTypes{{
    {FeedbackType::KR, "KR"}, {FeedbackType::KCR, "KCR"}, {FeedbackType::EF, "EF"}}};
constexpr std::array<std::pair<FeedbackLevel, std::string_view>, 4> kLevels{{
    {FeedbackLevel::Self, "self"},
    {FeedbackLevel::Task, "task"},
    {FeedbackLevel::Process, "process"},
    {FeedbackLevel::Regulation, "regulation"}}};
constexpr std::array<std::pair<FeedbackTiming, std::string_view>, 2> kTimings{{
    {FeedbackTiming::Immediate, "immediate"}, {FeedbackTiming::Delayed, "delayed"}}};
constexpr std::array<std::pair<Verdict, std::string_view>, 3> kVerdicts{{
    {Verdict::Correct, "correct"}, {Verdict::Incorrect, "incorrect"}, {Verdict::Deferred, "deferred"}}};
constexpr std::array<std::pair<Highlight, std::string_view>, 3> kHighlights{{
    {Highlight::Green, "green"}, {Highlight::Red, "red"}, {Highlight::None, "none"}}};

// Appends up to `need` distinct translations from `source` to `chosen`,
// sampled uniformly from the eligible ones.
void draw_distractors(const std::vector<const TrainingItem*>& source, const std::string& answer,
                      std::vector<std::string>& chosen, std::size_t need, SeededStream& stream) {
  std::vector<std::string> eligible;
  std::unordered_set<std::string> seen(chosen.begin(), chosen.end());
  seen.insert(answer);
  for (const TrainingItem* item : source) {
    if (seen.insert(item->translation).second) eligible.push_back(item->translation);
  }
  const std::size_t take = std::min(need, eligible.size());
  stream.partial_shuffle(eligible, take);
  chosen.insert(chosen.end(), eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(take));
}

}  // namespace

std::string_view to_string(FeedbackType type) { return name_of(kTypes, type); }
std::string_view to_string(FeedbackLevel level) { return name_of(kLevels, level); }
std::string_view to_string(FeedbackTiming timing) { return name_of(kTimings, timing); }
std::string_view to_string(Verdict verdict) { return name_of(kVerdicts, verdict); }
std::string_view to_string(Highlight highlight) { return name_of(kHighlights, highlight); }

std::optional<FeedbackType> parse_feedback_type(std::string_view text) { return lookup(kTypes, text); }
std::optional<FeedbackLevel> parse_feedback_level(std::string_view text) { return lookup(kLevels, text); }
std::optional<FeedbackTiming> parse_feedback_timing(std::string_view text) { return lookup(kTimings, text); }

ModalityStatus validate_modality(const FeedbackModality& modality) {
  switch (modality.type) {
    case FeedbackType::KR:
    case FeedbackType::KCR:
      return {modality.level == FeedbackLevel::Task, std::nullopt};
    case FeedbackType::EF:
      if (modality.level == FeedbackLevel::Self) {
        return {true, std::string(kSelfLevelAdvisory)};
      }
      return {true, std::nullopt};
  }
  return {false, std::nullopt};
}

void require_quiz_capable(const LexiconPack& pack) {
  std::set<std::string_view> translations;
  for (const auto& level : pack.levels()) {
    for (const auto& category : level.categories) {
      for (const auto& item : category.items) {
        translations.insert(item.translation);
        if (translations.size() >= kOptionCount) return;
      }
    }
  }
  throw Error(ErrorCode::InsufficientDistractors,
              "pack '" + pack.pack_id() + "' has " + std::to_string(translations.size()) +
                  " distinct translations; a question needs " + std::to_string(kOptionCount),
              {{"distinctTranslations", translations.size()}});
}

QuizQuestion build_question(const LexiconPack& pack, const std::string& subject_id,
                            std::string question_id, SeededStream& stream) {
  require_quiz_capable(pack);
  auto location = pack.locate_item(subject_id);
  if (!location) {
    throw Error(ErrorCode::UnknownQuestion, "quiz subject '" + subject_id + "' is not in the pack");
  }
  const Level& level = pack.levels()[location->level_index];
  const Category& category = level.categories[location->category_index];
  const TrainingItem& subject = category.items[location->item_index];

  std::vector<const TrainingItem*> category_items;
  std::vector<const TrainingItem*> level_items;
  std::vector<const TrainingItem*> pack_items;
  for (const auto& item : category.items) category_items.push_back(&item);
  for (const auto& other : level.categories) {
    if (&other == &category) continue;
    for (const auto& item : other.items) level_items.push_back(&item);
  }
  for (const auto& other_level : pack.levels()) {
    if (&other_level == &level) continue;
    for (const auto& other : other_level.categories) {
      for (const auto& item : other.items) pack_items.push_back(&item);
    }
  }

  constexpr std::size_t kDistractors = kOptionCount - 1;
  std::vector<std::string> options;
  for (const auto* tier : {&category_items, &level_items, &pack_items}) {
    if (options.size() == kDistractors) break;
    draw_distractors(*tier, subject.translation, options, kDistractors - options.size(), stream);
  }
  options.push_back(subject.translation);
  stream.shuffle(options);

  QuizQuestion question;
  question.question_id = std::move(question_id);
  question.subject_item_id = subject.id;
  question.prompt = subject.english;
  std::copy(options.begin(), options.end(), question.options.begin());
  question.correct_index = static_cast<int>(
      std::find(options.begin(), options.end(), subject.translation) - options.begin());
  return question;
}

QuizQuestion generate_question(const LexiconPack& pack, std::span<const std::string> pool,
                               SeededStream& stream, std::string question_id) {
  if (pool.empty()) {
    throw Error(ErrorCode::InvalidRequest, "question pool is empty");
  }
  require_quiz_capable(pack);
  const std::string& subject = pool[stream.below(pool.size())];
  return build_question(pack, subject, std::move(question_id), stream);
}

std::vector<QuizQuestion> generate_quiz_block(const LexiconPack& pack,
                                              std::span<const std::string> pool,
                                              std::size_t count, SeededStream& stream,
                                              std::string_view id_prefix, int first_number) {
  if (pool.empty() || count == 0) return {};
  require_quiz_capable(pack);
  std::vector<std::string> subjects(pool.begin(), pool.end());
  count = std::min(count, subjects.size());
  stream.partial_shuffle(subjects, count);

  std::vector<QuizQuestion> block;
  block.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string id = std::string(id_prefix) + std::to_string(first_number + static_cast<int>(i));
    block.push_back(build_question(pack, subjects[i], std::move(id), stream));
  }
  return block;
}

FeedbackMessage compose_feedback(const QuizQuestion& question, int selected_index,
                                 const FeedbackModality& modality, const TrainingItem& item) {
  const ModalityStatus status = validate_modality(modality);
  if (!status.valid) {
    throw Error(ErrorCode::InvalidModality,
                std::string(to_string(modality.type)) + " feedback cannot target the " +
                    std::string(to_string(modality.level)) + " level",
                modality_to_json(modality));
  }
  if (selected_index < 0 || selected_index >= static_cast<int>(kOptionCount)) {
    throw Error(ErrorCode::InvalidRequest,
                "selected option " + std::to_string(selected_index) + " is outside 0..3");
  }

  FeedbackMessage message;
  message.question_id = question.question_id;
  const bool correct = selected_index == question.correct_index;
  message.verdict = correct ? Verdict::Correct : Verdict::Incorrect;
  message.highlight = correct ? Highlight::Green : Highlight::Red;
  message.advisory = status.advisory;

  const std::string& answer = question.options[static_cast<std::size_t>(question.correct_index)];
  switch (modality.type) {
    case FeedbackType::KR:
      break;
    case FeedbackType::KCR:
      if (!correct) message.body = answer;
      break;
    case FeedbackType::EF: {
      std::string body;
      auto add_line = [&body](const std::string& line) {
        if (!body.empty()) body += '\n';
        body += line;
      };
      if (!correct) {
        std::string line = "Correct answer: " + answer;
        if (item.romanization) line += " (" + *item.romanization + ")";
        add_line(line);
      }
      if (item.mnemonic) add_line("Mnemonic: " + *item.mnemonic);
      if (item.sample_sentence) add_line("Example: " + *item.sample_sentence);
      if (!item.mnemonic && !item.sample_sentence) {
        add_line("Study pointer: review '" + item.english + "' in this category before the next quiz.");
      }
      message.body = std::move(body);

      switch (modality.level) {
        case FeedbackLevel::Task:
          break;
        case FeedbackLevel::Process:
          if (item.mnemonic) {
            message.level_note = "Strategy: link '" + item.english + "' to '" + answer +
                                 "' through the mnemonic: " + *item.mnemonic;
          } else {
            message.level_note = "Strategy: say '" + answer + "' aloud with its audio prompt and tie it to '" +
                                 item.english + "'.";
          }
          break;
        case FeedbackLevel::Regulation:
          message.level_note = "Self-check: before the next question, recall the translation of '" +
                               item.english + "' without looking at the options.";
          break;
        case FeedbackLevel::Self:
          message.level_note = "You are putting in real effort. Keep going!";
          break;
      }
      break;
    }
  }
  return message;
}

FeedbackMessage render_feedback(const QuizQuestion& question, int selected_index,
                                const FeedbackModality& modality, const TrainingItem& item) {
  FeedbackMessage full = compose_feedback(question, selected_index, modality, item);
  if (modality.timing == FeedbackTiming::Immediate) return full;
  FeedbackMessage deferred;
  deferred.question_id = question.question_id;
  deferred.verdict = Verdict::Deferred;
  deferred.highlight = Highlight::None;
  return deferred;
}

json modality_to_json(const FeedbackModality& modality) {
  return {{"type", to_string(modality.type)},
          {"level", to_string(modality.level)},
          {"timing", to_string(modality.timing)}};
}

FeedbackModality modality_from_json(const json& node) {
  auto field = [&node](const char* key, const char* fallback) -> std::string {
    if (!node.is_object()) {
      throw Error(ErrorCode::InvalidModality, "modality must be an object");
    }
    auto it = node.find(key);
    if (it == node.end()) return fallback;
    if (!it->is_string()) {
      throw Error(ErrorCode::InvalidModality, std::string("modality.") + key + " must be a string");
    }
    return it->get<std::string>();
  };
  const std::string type = field("type", "KR");
  const std::string level = field("level", "task");
  const std::string timing = field("timing", "immediate");
  auto t = parse_feedback_type(type);
  auto l = parse_feedback_level(level);
  auto m = parse_feedback_timing(timing);
  if (!t || !l || !m) {
    throw Error(ErrorCode::InvalidModality,
                "unknown modality (" + type + ", " + level + ", " + timing + ")", node);
  }
  return {*t, *l, *m};
}

json feedback_to_json(const FeedbackMessage& message) {
  json node{{"questionId", message.question_id},
            {"verdict", to_string(message.verdict)},
            {"highlight", to_string(message.highlight)},
            {"body", nullptr},
            {"levelNote", nullptr},
            {"advisory", nullptr}};
  if (message.body) node["body"] = *message.body;
  if (message.level_note) node["levelNote"] = *message.level_note;
  if (message.advisory) node["advisory"] = *message.advisory;
  return node;
}

json question_to_json(const QuizQuestion& question, bool include_answer) {
  json node{{"questionId", question.question_id},
            {"prompt", question.prompt},
            {"options", question.options}};
  if (include_answer) {
    node["subjectItemId"] = question.subject_item_id;
    node["correctIndex"] = question.correct_index;
  }
  return node;
}

}  // namespace lexitrain
