#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lexitrain/lexicon.hpp"
#include "lexitrain/progress_log.hpp"
#include "lexitrain/scoring.hpp"
#include "lexitrain/session.hpp"

namespace httplib {
class Server;
}

namespace lexitrain {

// Engine driver shared by the HTTP layer and the CLI. Every mutating call
// appends its progress events before the new session state is committed, so
// a failed append leaves the session untouched.
class TrainerService {
 public:
  TrainerService(std::vector<LexiconPack> packs, ProgressLog& log, Clock& clock, ScoringConfig scoring = {});

  // Request: {learnerId, packId, level, category, policy?, modality?, seed?}.
  // Response: {sessionId, firstStep}.
  nlohmann::json create_session(const nlohmann::json& request);

  // A repeated idempotency token returns the previous response verbatim.
  nlohmann::json step(const std::string& session_id, const std::optional<std::string>& token = std::nullopt);

  // Body: {questionId, selectedIndex}. Under delayed timing the answer that
  // closes a block also carries "blockFeedback" with the released messages.
  nlohmann::json answer(const std::string& session_id, const nlohmann::json& body,
                        const std::optional<std::string>& token = std::nullopt);

  nlohmann::json report(const std::string& session_id);
  nlohmann::json list_packs() const;
  nlohmann::json categories(const std::string& pack_id, const std::optional<std::string>& level) const;
  nlohmann::json learner_progress(const std::string& learner_id) const;

  Session snapshot(const std::string& session_id) const;
  const LexiconPack& pack(const std::string& pack_id) const;

  // Session ids are "<learnerId>-s<NNNN>" numbered from the learner's history;
  // the default seed is derived from the id.
  static std::string session_id_for(const std::string& learner_id, std::size_t ordinal);
  static std::uint64_t default_seed(const std::string& session_id);

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
    std::optional<std::pair<std::string, nlohmann::json>> last_step;
    std::optional<std::pair<std::string, nlohmann::json>> last_answer;
  };

  std::shared_ptr<Entry> entry(const std::string& session_id) const;
  nlohmann::json advance(Entry& entry);
  void persist(const std::string& learner_id, const ProgressEvent& event);

  std::map<std::string, LexiconPack> packs_;
  ProgressLog& log_;
  Clock& clock_;
  ScoringConfig scoring_;
  std::mutex create_mutex_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// HTTP surface:
//   POST /v1/sessions                     GET /v1/packs
//   GET  /v1/sessions/{id}/step           GET /v1/packs/{id}/categories?level=
//   POST /v1/sessions/{id}/answer         GET /v1/learners/{id}/progress
//   GET  /v1/sessions/{id}/report         GET /v1/audio/<path>
// Errors are returned as {code, message, detail} with the mapped status.
class HttpServer {
 public:
  HttpServer(TrainerService& service, std::optional<std::filesystem::path> audio_dir = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  void install_routes();

  TrainerService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread worker_;
};

// Loads every *.json pack under `dir`, sorted by file name.
std::vector<LexiconPack> load_pack_directory(const std::filesystem::path& dir);

}  // namespace lexitrain
