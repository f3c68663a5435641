#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lexitrain/feedback.hpp"
#include "lexitrain/lexicon.hpp"
#include "lexitrain/schedule.hpp"
#include "lexitrain/scoring.hpp"

namespace lexitrain {

// Milliseconds since the epoch. Injected so tests control timestamps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override;
};

// Starts at `start` and advances by `step` on every reading.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start = 0, std::int64_t step = 1) : next_(start), step_(step) {}
  std::int64_t now_ms() override;

 private:
  std::mutex mutex_;
  std::int64_t next_;
  std::int64_t step_;
};

struct SessionStarted {
  std::string session_id;
  std::string pack_id;
  LevelRank level = LevelRank::Basic;
  std::string category;
  SchedulePolicy policy;
  FeedbackModality modality;
  std::uint64_t seed = 0;
  std::int64_t timestamp = 0;

  bool operator==(const SessionStarted&) const = default;
};

struct ItemPresented {
  std::string session_id;
  std::string item_id;
  std::int64_t timestamp = 0;

  bool operator==(const ItemPresented&) const = default;
};

struct AnswerSubmitted {
  std::string session_id;
  std::string question_id;
  std::string subject_item_id;
  bool correct = false;
  std::int64_t timestamp = 0;

  bool operator==(const AnswerSubmitted&) const = default;
};

struct CategoryCompleted {
  std::string session_id;
  CompletionReport report;
  std::int64_t timestamp = 0;

  bool operator==(const CategoryCompleted&) const = default;
};

using ProgressEvent = std::variant<SessionStarted, ItemPresented, AnswerSubmitted, CategoryCompleted>;

const std::string& event_session_id(const ProgressEvent& event);
std::int64_t event_timestamp(const ProgressEvent& event);

nlohmann::json event_to_json(const ProgressEvent& event);
// Throws Error{CorruptStream} on anything undecodable.
ProgressEvent event_from_json(const nlohmann::json& node);

struct CategoryKey {
  std::string pack_id;
  LevelRank level = LevelRank::Basic;
  std::string category;

  auto operator<=>(const CategoryKey&) const = default;
};

struct LevelKey {
  std::string pack_id;
  LevelRank level = LevelRank::Basic;

  auto operator<=>(const LevelKey&) const = default;
};

struct SessionScope {
  std::string pack_id;
  LevelRank level = LevelRank::Basic;
  std::string category;

  bool operator==(const SessionScope&) const = default;
};

// Fold of a learner's event stream. Progress is tracked per pack so that
// finishing one language's basic level never unlocks another's.
struct ProgressRecord {
  std::string learner_id;
  std::set<CategoryKey> completed_categories;
  // First-seen order, duplicate-free.
  std::map<LevelKey, std::vector<std::string>> seen_by_level;
  std::map<std::string, SessionScope> sessions;
  int total_points = 0;
  int total_asked = 0;
  int total_correct = 0;
  int total_words_seen = 0;
  std::int64_t last_timestamp = 0;
  std::uint64_t event_count = 0;

  bool operator==(const ProgressRecord&) const = default;

  bool is_completed(const std::string& pack_id, LevelRank level, const std::string& category) const {
    return completed_categories.contains({pack_id, level, category});
  }
  const std::vector<std::string>& seen(const std::string& pack_id, LevelRank level) const;
  // Sessions started by this learner for the given pack.
  std::size_t session_count(const std::string& pack_id) const;
};

// One step of the fold. Throws Error{OrderingViolation} when the event cannot
// follow the record (unknown or duplicate session, timestamp regression).
ProgressRecord apply_event(ProgressRecord record, const ProgressEvent& event);

ProgressRecord replay_events(const std::string& learner_id, std::span<const ProgressEvent> events);

nlohmann::json progress_to_json(const ProgressRecord& record);

// Append-only, line-framed event log with one file per learner under
// <data_dir>/learners/<learnerId>.log. Each line is a JSON object
// {"crc": <crc32 hex>, "event": {...}, "offset": n}; see docs/progress-log.md.
//
// Appends to one learner are serialized internally; replay may run
// concurrently and observes a prefix.
class ProgressLog {
 public:
  explicit ProgressLog(std::filesystem::path data_dir);
  ~ProgressLog();

  ProgressLog(const ProgressLog&) = delete;
  ProgressLog& operator=(const ProgressLog&) = delete;

  // Durable (fsync'd) before returning. Returns the event's stream offset.
  std::uint64_t append_event(const std::string& learner_id, const ProgressEvent& event);

  // Throws Error{CorruptStream} on an offset gap, checksum mismatch, or
  // undecodable line. A trailing line without newline is a torn write and
  // is ignored.
  std::vector<ProgressEvent> read_events(const std::string& learner_id) const;
  ProgressRecord replay(const std::string& learner_id) const;

  std::filesystem::path log_path(const std::string& learner_id) const;
  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

 private:
  struct Stream;
  Stream& stream_for(const std::string& learner_id);

  std::filesystem::path data_dir_;
  std::mutex streams_mutex_;
  std::map<std::string, std::unique_ptr<Stream>> streams_;
};

// Learner ids become file names, so they are restricted to [A-Za-z0-9_-.]
// and may not start with a dot. Throws Error{InvalidRequest} otherwise.
void check_learner_id(const std::string& learner_id);

}  // namespace lexitrain
