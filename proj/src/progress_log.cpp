#include "lexitrain/progress_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

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

std::string crc_hex(const std::string& payload) {
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                          static_cast<uInt>(payload.size()));
  char buffer[9];
  std::snprintf(buffer, sizeof buffer, "%08lx", static_cast<unsigned long>(crc));
  return buffer;
}

[[noreturn]] void ordering_violation(const std::string& message, const ProgressEvent& event) {
  throw Error(ErrorCode::OrderingViolation, message, event_to_json(event));
}

std::string frame(std::uint64_t offset, const ProgressEvent& event) {
  json body{{"event", event_to_json(event)}, {"offset", offset}};
  std::string payload = body.dump();
  body["crc"] = crc_hex(payload);
  return body.dump() + "\n";
}

LevelRank level_field(const json& node, const char* key) {
  auto rank = parse_level_rank(node.at(key).get<std::string>());
  if (!rank) throw Error(ErrorCode::CorruptStream, std::string("unknown level in event field ") + key);
  return *rank;
}

// Splits on '\n'; a final fragment without terminator is dropped as torn.
std::vector<std::string> complete_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) break;
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::int64_t SystemClock::now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::int64_t ManualClock::now_ms() {
  std::lock_guard lock(mutex_);
  std::int64_t value = next_;
  next_ += step_;
  return value;
}

const std::string& event_session_id(const ProgressEvent& event) {
  return std::visit([](const auto& e) -> const std::string& { return e.session_id; }, event);
}

std::int64_t event_timestamp(const ProgressEvent& event) {
  return std::visit([](const auto& e) { return e.timestamp; }, event);
}

json event_to_json(const ProgressEvent& event) {
  return std::visit(
      overloaded{
          [](const SessionStarted& e) -> json {
            return {{"type", "SessionStarted"},     {"sessionId", e.session_id},
                    {"packId", e.pack_id},          {"level", to_string(e.level)},
                    {"category", e.category},       {"policy", policy_to_json(e.policy)},
                    {"modality", modality_to_json(e.modality)},
                    {"seed", e.seed},               {"timestamp", e.timestamp}};
          },
          [](const ItemPresented& e) -> json {
            return {{"type", "ItemPresented"},
                    {"sessionId", e.session_id},
                    {"itemId", e.item_id},
                    {"timestamp", e.timestamp}};
          },
          [](const AnswerSubmitted& e) -> json {
            return {{"type", "AnswerSubmitted"},         {"sessionId", e.session_id},
                    {"questionId", e.question_id},       {"subjectItemId", e.subject_item_id},
                    {"correct", e.correct},              {"timestamp", e.timestamp}};
          },
          [](const CategoryCompleted& e) -> json {
            return {{"type", "CategoryCompleted"},
                    {"sessionId", e.session_id},
                    {"report", report_to_json(e.report)},
                    {"timestamp", e.timestamp}};
          },
      },
      event);
}

ProgressEvent event_from_json(const json& node) {
  try {
    const std::string type = node.at("type").get<std::string>();
    if (type == "SessionStarted") {
      SessionStarted e;
      e.session_id = node.at("sessionId").get<std::string>();
      e.pack_id = node.at("packId").get<std::string>();
      e.level = level_field(node, "level");
      e.category = node.at("category").get<std::string>();
      e.policy = policy_from_json(node.at("policy"));
      e.modality = modality_from_json(node.at("modality"));
      e.seed = node.at("seed").get<std::uint64_t>();
      e.timestamp = node.at("timestamp").get<std::int64_t>();
      return e;
    }
    if (type == "ItemPresented") {
      return ItemPresented{node.at("sessionId").get<std::string>(),
                           node.at("itemId").get<std::string>(),
                           node.at("timestamp").get<std::int64_t>()};
    }
    if (type == "AnswerSubmitted") {
      return AnswerSubmitted{node.at("sessionId").get<std::string>(),
                             node.at("questionId").get<std::string>(),
                             node.at("subjectItemId").get<std::string>(),
                             node.at("correct").get<bool>(),
                             node.at("timestamp").get<std::int64_t>()};
    }
    if (type == "CategoryCompleted") {
      return CategoryCompleted{node.at("sessionId").get<std::string>(),
                               completion_report_from_json(node.at("report")),
                               node.at("timestamp").get<std::int64_t>()};
    }
    throw Error(ErrorCode::CorruptStream, "unknown event type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptStream, std::string("undecodable event: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptStream) throw;
    throw Error(ErrorCode::CorruptStream, std::string("undecodable event: ") + e.what());
  }
}

const std::vector<std::string>& ProgressRecord::seen(const std::string& pack_id, LevelRank level) const {
  static const std::vector<std::string> empty;
  auto it = seen_by_level.find({pack_id, level});
  return it == seen_by_level.end() ? empty : it->second;
}

std::size_t ProgressRecord::session_count(const std::string& pack_id) const {
  return static_cast<std::size_t>(std::count_if(sessions.begin(), sessions.end(),
                                                [&](const auto& entry) { return entry.second.pack_id == pack_id; }));
}

ProgressRecord apply_event(ProgressRecord record, const ProgressEvent& event) {
  if (event_timestamp(event) < record.last_timestamp) {
    ordering_violation("event timestamp " + std::to_string(event_timestamp(event)) +
                           " precedes stream tail " + std::to_string(record.last_timestamp),
                       event);
  }
  const std::string& session_id = event_session_id(event);
  auto scope_it = record.sessions.find(session_id);

  if (const auto* started = std::get_if<SessionStarted>(&event)) {
    if (scope_it != record.sessions.end()) {
      ordering_violation("session '" + session_id + "' started twice", event);
    }
    record.sessions.emplace(session_id,
                            SessionScope{started->pack_id, started->level, started->category});
  } else {
    if (scope_it == record.sessions.end()) {
      ordering_violation("event for session '" + session_id + "' precedes its SessionStarted", event);
    }
    const SessionScope& scope = scope_it->second;
    std::visit(overloaded{
                   [](const SessionStarted&) {},
                   [&](const ItemPresented& e) {
                     auto& seen = record.seen_by_level[{scope.pack_id, scope.level}];
                     if (std::find(seen.begin(), seen.end(), e.item_id) == seen.end()) {
                       seen.push_back(e.item_id);
                       ++record.total_words_seen;
                     }
                   },
                   [&](const AnswerSubmitted& e) {
                     ++record.total_asked;
                     if (e.correct) ++record.total_correct;
                   },
                   [&](const CategoryCompleted& e) {
                     if (e.report.level != scope.level || e.report.category != scope.category) {
                       ordering_violation("completion report scope does not match session '" +
                                              session_id + "'",
                                          event);
                     }
                     record.completed_categories.insert({scope.pack_id, scope.level, scope.category});
                     record.total_points += e.report.points_earned;
                   },
               },
               event);
  }
  record.last_timestamp = event_timestamp(event);
  ++record.event_count;
  return record;
}

ProgressRecord replay_events(const std::string& learner_id, std::span<const ProgressEvent> events) {
  ProgressRecord record;
  record.learner_id = learner_id;
  for (const auto& event : events) record = apply_event(std::move(record), event);
  return record;
}

json progress_to_json(const ProgressRecord& record) {
  json completed = json::array();
  for (const auto& key : record.completed_categories) {
    completed.push_back({{"packId", key.pack_id}, {"level", to_string(key.level)}, {"category", key.category}});
  }
  json seen = json::array();
  for (const auto& [key, items] : record.seen_by_level) {
    seen.push_back({{"packId", key.pack_id}, {"level", to_string(key.level)}, {"itemIds", items}});
  }
  return {{"learnerId", record.learner_id},
          {"completedCategories", std::move(completed)},
          {"seenByLevel", std::move(seen)},
          {"totals",
           {{"points", record.total_points},
            {"asked", record.total_asked},
            {"correct", record.total_correct},
            {"wordsSeen", record.total_words_seen}}},
          {"sessions", record.sessions.size()},
          {"events", record.event_count}};
}

void check_learner_id(const std::string& learner_id) {
  const bool ok = !learner_id.empty() && learner_id.size() <= 128 && learner_id.front() != '.' &&
                  std::all_of(learner_id.begin(), learner_id.end(), [](char c) {
                    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                           c == '-' || c == '_' || c == '.';
                  });
  if (!ok) {
    throw Error(ErrorCode::InvalidRequest, "invalid learner id '" + learner_id + "'");
  }
}

struct ProgressLog::Stream {
  std::mutex mutex;
  bool loaded = false;
  int fd = -1;
  ProgressRecord tail;
  std::uint64_t next_offset = 0;

  ~Stream() {
    if (fd >= 0) ::close(fd);
  }
};

ProgressLog::ProgressLog(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {}

ProgressLog::~ProgressLog() = default;

std::filesystem::path ProgressLog::log_path(const std::string& learner_id) const {
  check_learner_id(learner_id);
  return data_dir_ / "learners" / (learner_id + ".log");
}

ProgressLog::Stream& ProgressLog::stream_for(const std::string& learner_id) {
  std::lock_guard lock(streams_mutex_);
  auto& slot = streams_[learner_id];
  if (!slot) slot = std::make_unique<Stream>();
  return *slot;
}

std::uint64_t ProgressLog::append_event(const std::string& learner_id, const ProgressEvent& event) {
  const auto path = log_path(learner_id);
  Stream& stream = stream_for(learner_id);
  std::lock_guard lock(stream.mutex);

  if (!stream.loaded) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::StorageFailure, "cannot create " + path.parent_path().string() + ": " + ec.message());
    if (std::filesystem::exists(path)) {
      const std::string text = read_file(path);
      if (!text.empty() && text.back() != '\n') {
        std::filesystem::resize_file(path, text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1, ec);
        if (ec) throw Error(ErrorCode::StorageFailure, "cannot trim torn tail of " + path.string());
      }
    }
    auto events = read_events(learner_id);
    stream.tail = replay_events(learner_id, events);
    stream.next_offset = events.size();
    if (stream.fd < 0) {
      stream.fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
      if (stream.fd < 0) {
        throw Error(ErrorCode::StorageFailure, "cannot open " + path.string() + ": " + std::strerror(errno));
      }
    }
    stream.loaded = true;
  }

  ProgressRecord next = apply_event(stream.tail, event);
  const std::string line = frame(stream.next_offset, event);

  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(stream.fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      stream.loaded = false;
      throw Error(ErrorCode::StorageFailure, "write to " + path.string() + " failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(stream.fd) != 0) {
    stream.loaded = false;
    throw Error(ErrorCode::StorageFailure, "fsync of " + path.string() + " failed: " + std::strerror(errno));
  }

  stream.tail = std::move(next);
  return stream.next_offset++;
}

std::vector<ProgressEvent> ProgressLog::read_events(const std::string& learner_id) const {
  const auto path = log_path(learner_id);
  std::vector<ProgressEvent> events;
  if (!std::filesystem::exists(path)) return events;

  const auto lines = complete_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.filename().string() + " line " + std::to_string(i + 1);
    json node;
    try {
      node = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::CorruptStream, where + ": not a JSON record", {{"line", i + 1}});
    }
    if (!node.is_object() || !node.contains("crc") || !node["crc"].is_string() ||
        !node.contains("offset") || !node.contains("event")) {
      throw Error(ErrorCode::CorruptStream, where + ": malformed frame", {{"line", i + 1}});
    }
    const std::string crc = node["crc"].get<std::string>();
    node.erase("crc");
    if (crc_hex(node.dump()) != crc) {
      throw Error(ErrorCode::CorruptStream, where + ": checksum mismatch", {{"line", i + 1}});
    }
    if (!node["offset"].is_number_unsigned() || node["offset"].get<std::uint64_t>() != i) {
      throw Error(ErrorCode::CorruptStream, where + ": offset gap (expected " + std::to_string(i) + ")",
                  {{"line", i + 1}});
    }
    events.push_back(event_from_json(node["event"]));
  }
  return events;
}

ProgressRecord ProgressLog::replay(const std::string& learner_id) const {
  auto events = read_events(learner_id);
  try {
    return replay_events(learner_id, events);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OrderingViolation) {
      throw Error(ErrorCode::CorruptStream, std::string("stream violates ordering: ") + e.what(), e.detail());
    }
    throw;
  }
}

}  // namespace lexitrain
