#include "lexitrain/service.hpp"

#include <algorithm>
#include <cstdio>

#include <httplib.h>

#include "lexitrain/errors.hpp"

namespace lexitrain {

using nlohmann::json;

namespace {

std::string require_text(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorCode::InvalidRequest, std::string("request field '") + key + "' must be a non-empty string");
  }
  return it->get<std::string>();
}

LevelRank require_level(const std::string& text) {
  auto rank = parse_level_rank(text);
  if (!rank) throw Error(ErrorCode::InvalidRequest, "unknown level '" + text + "'");
  return *rank;
}

json parse_body(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    json body = json::parse(text);
    if (!body.is_object()) throw Error(ErrorCode::InvalidRequest, "request body must be a JSON object");
    return body;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("request body is not valid JSON: ") + e.what());
  }
}

json category_list(const LexiconPack& pack, LevelRank rank) {
  json out = json::array();
  for (const auto& [name, count] : list_categories(pack, rank)) {
    out.push_back({{"name", name}, {"itemCount", count}});
  }
  return out;
}

}  // namespace

TrainerService::TrainerService(std::vector<LexiconPack> packs, ProgressLog& log, Clock& clock, ScoringConfig scoring)
    : log_(log), clock_(clock), scoring_(scoring) {
  for (auto& pack : packs) {
    std::string id = pack.pack_id();
    packs_.insert_or_assign(std::move(id), std::move(pack));
  }
}

std::string TrainerService::session_id_for(const std::string& learner_id, std::size_t ordinal) {
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "-s%04zu", ordinal);
  return learner_id + suffix;
}

std::uint64_t TrainerService::default_seed(const std::string& session_id) {
  // FNV-1a, then mixed.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : session_id) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return mix64(hash);
}

const LexiconPack& TrainerService::pack(const std::string& pack_id) const {
  auto it = packs_.find(pack_id);
  if (it == packs_.end()) {
    throw Error(ErrorCode::UnknownPack, "no pack '" + pack_id + "' is loaded", {{"packId", pack_id}});
  }
  return it->second;
}

std::shared_ptr<TrainerService::Entry> TrainerService::entry(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::UnknownSession, "no session '" + session_id + "'", {{"sessionId", session_id}});
  }
  return it->second;
}

void TrainerService::persist(const std::string& learner_id, const ProgressEvent& event) {
  log_.append_event(learner_id, event);
}

json TrainerService::advance(Entry& entry) {
  const LexiconPack& content = pack(entry.session.pack_id);
  StepResult result = next_step(content, entry.session);
  const auto now = clock_.now_ms();
  if (const auto* present = std::get_if<PresentStep>(&result.step)) {
    persist(result.session.learner_id, ItemPresented{result.session.session_id, present->item.id, now});
  } else if (const auto* done = std::get_if<CategoryCompleteStep>(&result.step)) {
    persist(result.session.learner_id, CategoryCompleted{result.session.session_id, done->report, now});
  }
  json document = step_to_json(result.step);
  entry.session = std::move(result.session);
  return document;
}

json TrainerService::create_session(const json& request) {
  if (!request.is_object()) throw Error(ErrorCode::InvalidRequest, "request body must be a JSON object");
  const std::string learner_id = require_text(request, "learnerId");
  check_learner_id(learner_id);
  const LexiconPack& content = pack(require_text(request, "packId"));

  SessionRequest wanted;
  wanted.learner_id = learner_id;
  wanted.level = require_level(require_text(request, "level"));
  wanted.category = require_text(request, "category");
  wanted.policy = policy_from_json(request.value("policy", json()));
  if (auto it = request.find("modality"); it != request.end() && !it->is_null()) {
    wanted.modality = modality_from_json(*it);
  }
  wanted.scoring = scoring_;

  std::lock_guard create_lock(create_mutex_);
  const ProgressRecord progress = log_.replay(learner_id);
  wanted.session_id = session_id_for(learner_id, progress.sessions.size() + 1);
  if (auto it = request.find("seed"); it != request.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw Error(ErrorCode::InvalidRequest, "seed must be a non-negative integer");
    wanted.seed = it->get<std::uint64_t>();
  } else {
    wanted.seed = default_seed(wanted.session_id);
  }

  auto created = std::make_shared<Entry>();
  created->session = start_session(content, progress, wanted);
  persist(learner_id, SessionStarted{wanted.session_id, content.pack_id(), wanted.level, wanted.category, wanted.policy,
                                     wanted.modality, wanted.seed, clock_.now_ms()});
  json first = advance(*created);
  {
    std::unique_lock lock(sessions_mutex_);
    sessions_[wanted.session_id] = created;
  }
  return {{"sessionId", wanted.session_id}, {"firstStep", std::move(first)}};
}

json TrainerService::step(const std::string& session_id, const std::optional<std::string>& token) {
  auto target = entry(session_id);
  std::lock_guard lock(target->mutex);
  if (token && target->last_step && target->last_step->first == *token) return target->last_step->second;
  json document = advance(*target);
  if (token) target->last_step = std::make_pair(*token, document);
  return document;
}

json TrainerService::answer(const std::string& session_id, const json& body, const std::optional<std::string>& token) {
  auto target = entry(session_id);
  std::lock_guard lock(target->mutex);
  if (token && target->last_answer && target->last_answer->first == *token) return target->last_answer->second;

  const std::string question_id = require_text(body, "questionId");
  auto selected = body.find("selectedIndex");
  if (selected == body.end() || !selected->is_number_integer()) {
    throw Error(ErrorCode::InvalidRequest, "request field 'selectedIndex' must be an integer");
  }
  const LexiconPack& content = pack(target->session.pack_id);
  AnswerResult result = submit_answer(content, target->session, question_id, selected->get<int>());

  const auto& answered = target->session.pending_questions.front();
  persist(result.session.learner_id,
          AnswerSubmitted{result.session.session_id, question_id, answered.subject_item_id,
                          selected->get<int>() == answered.correct_index, clock_.now_ms()});

  json document = feedback_to_json(result.feedback);
  Session next = std::move(result.session);
  const bool block_closed = next.phase != Phase::Quizzing;
  document["blockComplete"] = block_closed;
  if (block_closed && next.modality.timing == FeedbackTiming::Delayed && !next.deferred.empty()) {
    FlushResult flushed = flush_delayed(content, std::move(next));
    json messages = json::array();
    for (const auto& message : flushed.messages) messages.push_back(feedback_to_json(message));
    document["blockFeedback"] = std::move(messages);
    next = std::move(flushed.session);
  }
  target->session = std::move(next);
  if (token) target->last_answer = std::make_pair(*token, document);
  return document;
}

json TrainerService::report(const std::string& session_id) {
  auto target = entry(session_id);
  std::lock_guard lock(target->mutex);
  return report_to_json(completion_report(target->session));
}

json TrainerService::list_packs() const {
  json out = json::array();
  for (const auto& [id, content] : packs_) {
    json levels = json::array();
    for (const auto& level : content.levels()) {
      levels.push_back({{"rank", to_string(level.rank)}, {"categories", category_list(content, level.rank)}});
    }
    out.push_back({{"packId", id},
                   {"packVersion", content.pack_version()},
                   {"language", to_string(content.language())},
                   {"levels", std::move(levels)}});
  }
  return out;
}

json TrainerService::categories(const std::string& pack_id, const std::optional<std::string>& level) const {
  const LexiconPack& content = pack(pack_id);
  if (level) return category_list(content, require_level(*level));
  json out = json::object();
  for (LevelRank rank : kAllLevels) out[std::string(to_string(rank))] = category_list(content, rank);
  return out;
}

json TrainerService::learner_progress(const std::string& learner_id) const {
  check_learner_id(learner_id);
  const ProgressRecord record = log_.replay(learner_id);
  json document = progress_to_json(record);
  json unlocked = json::object();
  for (const auto& [id, content] : packs_) {
    json levels = json::array();
    for (LevelRank rank : unlock_state(record, content).unlocked) levels.push_back(to_string(rank));
    unlocked[id] = std::move(levels);
  }
  document["unlocked"] = std::move(unlocked);
  return document;
}

Session TrainerService::snapshot(const std::string& session_id) const {
  auto target = entry(session_id);
  std::lock_guard lock(target->mutex);
  return target->session;
}

HttpServer::HttpServer(TrainerService& service, std::optional<std::filesystem::path> audio_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
  if (audio_dir && std::filesystem::is_directory(*audio_dir)) {
    server_->set_mount_point("/v1/audio", audio_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto send = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto guarded = [send](auto handler) {
    return [handler, send](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send(res, http_status(e.code()), e.to_json());
      } catch (const std::exception& e) {
        send(res, 500, {{"code", "INTERNAL"}, {"message", e.what()}, {"detail", nullptr}});
      }
    };
  };
  auto token_of = [](const httplib::Request& req) -> std::optional<std::string> {
    if (req.has_header("Idempotency-Key")) return req.get_header_value("Idempotency-Key");
    return std::nullopt;
  };

  server_->Post("/v1/sessions", guarded([this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, 201, service_.create_session(parse_body(req.body)));
  }));
  server_->Get(R"(/v1/sessions/([^/]+)/step)",
               guarded([this, send, token_of](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200, service_.step(req.matches[1], token_of(req)));
               }));
  server_->Post(R"(/v1/sessions/([^/]+)/answer)",
                guarded([this, send, token_of](const httplib::Request& req, httplib::Response& res) {
                  send(res, 200, service_.answer(req.matches[1], parse_body(req.body), token_of(req)));
                }));
  server_->Get(R"(/v1/sessions/([^/]+)/report)",
               guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200, service_.report(req.matches[1]));
               }));
  server_->Get("/v1/packs", guarded([this, send](const httplib::Request&, httplib::Response& res) {
    send(res, 200, service_.list_packs());
  }));
  server_->Get(R"(/v1/packs/([^/]+)/categories)",
               guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                 std::optional<std::string> level;
                 if (req.has_param("level")) level = req.get_param_value("level");
                 send(res, 200, service_.categories(req.matches[1], level));
               }));
  server_->Get(R"(/v1/learners/([^/]+)/progress)",
               guarded([this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200, service_.learner_progress(req.matches[1]));
               }));
}

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpServer::start_background(const std::string& host) {
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error(ErrorCode::StorageFailure, "cannot bind an HTTP port on " + host);
  worker_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void HttpServer::stop() {
  server_->stop();
  if (worker_.joinable()) worker_.join();
}

std::vector<LexiconPack> load_pack_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LexiconPack> packs;
  for (const auto& file : files) packs.push_back(load_pack_file(file));
  return packs;
}

}  // namespace lexitrain
