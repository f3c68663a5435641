// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <httplib.h>

#include "lexitrain/errors.hpp"
#include "lexitrain/session.hpp"
#include "lexitrain/stats.hpp"
#include "stats_oracles.hpp"
#include "test_support.hpp"

using namespace lexitrain;
using lexitrain::testing::synthetic_pack;
using lexitrain::testing::TempDir;
using nlohmann::json;

namespace {

// Collects failure notes for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && notes_.size() < 5) notes_.push_back(what);
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  bool failed_ = false;
  std::vector<std::string> notes_;
};

struct Outcome {
  std::string name;
  bool pass;
};

std::vector<Outcome> outcomes;

void run_criterion(const std::string& name, const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line << (check.failed() ? "FAIL" : "PASS") << "  " << name << "  (" << std::fixed << std::setprecision(3) << seconds
       << " s)";
  std::cout << line.str() << '\n';
  for (const auto& note : check.notes()) std::cout << "      " << note << '\n';
  outcomes.push_back({name, !check.failed()});
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

using Chooser = std::function<int(const QuizQuestion&, int)>;

struct Trace {
  std::string kinds;
  Session session;
  std::vector<FeedbackMessage> feedback;
  std::vector<FeedbackMessage> flushed;
};

// Runs the engine to exhaustion, flushing delayed feedback whenever a block closes.
Trace drive(const LexiconPack& pack, Session session, const Chooser& choose) {
  Trace trace;
  int answered = 0;
  for (;;) {
    std::optional<StepResult> result;
    try {
      result = next_step(pack, session);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SessionComplete) throw;
      break;
    }
    session = std::move(result->session);
    if (std::holds_alternative<PresentStep>(result->step)) {
      trace.kinds += 'P';
    } else if (const auto* quiz = std::get_if<QuizStep>(&result->step)) {
      trace.kinds += 'Q';
      AnswerResult answer =
          submit_answer(pack, session, quiz->question.question_id, choose(quiz->question, answered++));
      trace.feedback.push_back(answer.feedback);
      session = std::move(answer.session);
      if (session.phase != Phase::Quizzing && !session.deferred.empty()) {
        FlushResult flushed = flush_delayed(pack, session);
        trace.flushed.insert(trace.flushed.end(), flushed.messages.begin(), flushed.messages.end());
        session = std::move(flushed.session);
      }
    } else if (std::holds_alternative<CategoryCompleteStep>(result->step)) {
      trace.kinds += 'C';
    } else {
      trace.kinds += 'L';
    }
  }
  trace.session = std::move(session);
  return trace;
}

SessionRequest request_for(const std::string& category, SchedulePolicy policy, FeedbackModality modality,
                           std::uint64_t seed) {
  SessionRequest request;
  request.session_id = "acc-1";
  request.learner_id = "acc";
  request.category = category;
  request.policy = policy;
  request.modality = modality;
  request.seed = seed;
  return request;
}

// Wrong on every third question; otherwise right.
int scripted_choice(const QuizQuestion& q, int n) { return n % 3 == 2 ? (q.correct_index + 1) % 4 : q.correct_index; }

// ---------------------------------------------------------------------------

void scheduler_law(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20261015);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    const int block = std::uniform_int_distribution<int>(1, 10)(rng);
    const int length = std::uniform_int_distribution<int>(1, block)(rng);
    const bool enabled = rng() % 4 != 0;
    // A second category guarantees four distinct translations for tiny categories.
    const LexiconPack pack = synthetic_pack({{static_cast<std::size_t>(n), 4}});
    const Session session = start_session(pack, ProgressRecord{}, request_for("cat-0-0", {block, length, enabled}, {}, rng()));
    const Trace trace = drive(pack, session, scripted_choice);
    const long quizzes = std::count(trace.kinds.begin(), trace.kinds.end(), 'Q');
    const long expected = enabled ? length * (n / block) + std::min(length, n % block) : 0;
    check.expect(quizzes == expected, "N=" + std::to_string(n) + " b=" + std::to_string(block) + " q=" +
                                          std::to_string(length) + " on=" + std::to_string(enabled) + ": got " +
                                          std::to_string(quizzes) + ", want " + std::to_string(expected));
  }
  const LexiconPack five = synthetic_pack({{5, 4}});
  const Trace defaults = drive(five, start_session(five, ProgressRecord{}, request_for("cat-0-0", {}, {}, 7)), scripted_choice);
  check.expect(defaults.kinds == "PPPPPQQQC", "default policy gave " + defaults.kinds);
  check.expect(seconds_since(start) < 5.0, "runtime over 5 s");
}

void feedback_matrix(Check& check) {
  const FeedbackType types[] = {FeedbackType::KR, FeedbackType::KCR, FeedbackType::EF};
  const FeedbackLevel levels[] = {FeedbackLevel::Self, FeedbackLevel::Task, FeedbackLevel::Process,
                                  FeedbackLevel::Regulation};
  const FeedbackTiming timings[] = {FeedbackTiming::Immediate, FeedbackTiming::Delayed};
  int combos = 0;
  for (auto type : types) {
    for (auto level : levels) {
      for (auto timing : timings) {
        ++combos;
        const FeedbackModality modality{type, level, timing};
        const ModalityStatus status = validate_modality(modality);
        const bool want_valid = type == FeedbackType::EF || level == FeedbackLevel::Task;
        const bool want_advisory = type == FeedbackType::EF && level == FeedbackLevel::Self;
        const std::string label = std::string(to_string(type)) + "/" + std::string(to_string(level)) + "/" +
                                  std::string(to_string(timing));
        check.expect(status.valid == want_valid, label + " validity");
        check.expect(status.advisory.has_value() == want_advisory, label + " advisory");
      }
    }
  }
  check.expect(combos == 24, "combination count");

  const LexiconPack& pack = lexitrain::testing::korean_pack();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto type : {FeedbackType::KR, FeedbackType::KCR, FeedbackType::EF}) {
      const FeedbackModality now{type, FeedbackLevel::Task, FeedbackTiming::Immediate};
      const FeedbackModality later{type, FeedbackLevel::Task, FeedbackTiming::Delayed};
      const Trace immediate = drive(pack, start_session(pack, ProgressRecord{}, request_for("numbering", {}, now, seed)),
                                    scripted_choice);
      const Trace delayed = drive(pack, start_session(pack, ProgressRecord{}, request_for("numbering", {}, later, seed)),
                                  scripted_choice);
      check.expect(!immediate.feedback.empty(), "no quiz answers");
      for (const auto& message : immediate.feedback) {
        if (type == FeedbackType::KR) check.expect(!message.body.has_value(), "KR message has a body");
        if (type == FeedbackType::KCR) {
          check.expect(message.body.has_value() == (message.verdict == Verdict::Incorrect),
                       "KCR body present iff incorrect");
        }
      }
      for (const auto& message : delayed.feedback) check.expect(message.verdict == Verdict::Deferred, "marker");
      check.expect(delayed.flushed == immediate.feedback, std::string(to_string(type)) + " delayed != immediate");
    }
  }
}

void gating(Check& check) {
  const LexiconPack pack = synthetic_pack({{4, 6, 5}, {5}});
  TempDir data;
  ProgressLog log(data.path());
  ManualClock clock;
  TrainerService service({pack}, log, clock);

  json final_step;
  for (const std::string category : {"cat-0-0", "cat-0-1", "cat-0-2"}) {
    check.expect(!unlock_state(log.replay("kim"), pack).contains(LevelRank::Intermediate), "unlocked early");
    json created = service.create_session({{"learnerId", "kim"}, {"packId", "synthetic"}, {"level", "basic"},
                                            {"category", category}});
    const std::string id = created["sessionId"];
    json step = created["firstStep"];
    int n = 0;
    for (;;) {
      if (step["kind"] == "quiz") {
        const QuizQuestion q = service.snapshot(id).pending_questions.front();
        service.answer(id, {{"questionId", q.question_id}, {"selectedIndex", scripted_choice(q, n++)}});
      }
      if (step["kind"] == "level-complete") break;
      if (step["kind"] == "category-complete" && !service.snapshot(id).level_review_pending) break;
      step = service.step(id);
    }
    final_step = step;
  }
  check.expect(unlock_state(log.replay("kim"), pack).contains(LevelRank::Intermediate), "intermediate still locked");
  check.expect(final_step["kind"] == "level-complete", "no level review step");

  // Union of presented items, first-seen order, straight from the raw log.
  std::vector<std::string> presented;
  const auto events = log.read_events("kim");
  for (const auto& event : events) {
    if (const auto* shown = std::get_if<ItemPresented>(&event)) {
      if (std::find(presented.begin(), presented.end(), shown->item_id) == presented.end()) {
        presented.push_back(shown->item_id);
      }
    }
  }
  std::vector<std::string> review;
  for (const auto& item : final_step["reviewList"]) review.push_back(item["id"]);
  check.expect(presented.size() == 15u, "presented " + std::to_string(presented.size()) + " items");
  check.expect(review == presented, "review list differs from presented items");

  // Truncate a copy of the log at random event boundaries and replay it fresh.
  const auto path = data.path() / "learners" / "kim.log";
  std::vector<std::string> lines;
  {
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  }
  check.expect(lines.size() == events.size(), "line count");
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t keep = std::uniform_int_distribution<std::size_t>(0, lines.size())(rng);
    TempDir copy;
    std::filesystem::create_directories(copy.path() / "learners");
    {
      std::ofstream out(copy.path() / "learners" / "kim.log");
      for (std::size_t i = 0; i < keep; ++i) out << lines[i] << '\n';
    }
    const ProgressRecord record = ProgressLog(copy.path()).replay("kim");
    const std::span<const ProgressEvent> prefix(events.data(), keep);
    check.expect(record == lexitrain::testing::recount("kim", prefix), "replay != recount at " + std::to_string(keep));
    check.expect(lexitrain::testing::record_invariants_hold(record), "invariants at " + std::to_string(keep));
    check.expect(record.event_count == keep, "event count at " + std::to_string(keep));
  }
}

void likert(Check& check) {
  for (double mean : {4.295, 4.266, 4.323, 4.485, 4.142}) {
    check.expect(stats::likert_band(mean) == "Very Good", std::to_string(mean));
  }
  const std::pair<double, const char*> edges[] = {{4.60, "Excellent"}, {3.60, "Very Good"}, {2.60, "Good"},
                                                  {1.60, "Fair"},      {1.00, "Poor"},      {5.00, "Excellent"},
                                                  {4.59, "Very Good"}, {3.59, "Good"},      {2.59, "Fair"},
                                                  {1.59, "Poor"}};
  for (const auto& [mean, label] : edges) check.expect(stats::likert_band(mean) == label, std::to_string(mean));
  check.expect(stats::likert_band(4.595) == "Very Good", "4.595 gap case");
}

double relative_gap(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

void anova(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 500; ++trial) {
    const auto groups = oracles::random_groups(rng);
    const stats::AnovaResult direct = stats::one_way_anova(groups);
    const oracles::AnovaOracle oracle = oracles::brute_force_anova(groups);
    check.expect(relative_gap(direct.f, oracle.f) < 1e-9, "oracle F, trial " + std::to_string(trial));
    std::vector<stats::GroupSummary> summaries;
    for (const auto& g : groups) summaries.push_back(stats::summarize(g));
    const stats::AnovaResult summarized = stats::anova_from_summary(summaries);
    check.expect(relative_gap(summarized.f, direct.f) < 1e-9, "summary F, trial " + std::to_string(trial));
  }
  int points = 0;
  for (const auto& p : oracles::f_cdf_grid()) {
    ++points;
    const double got = stats::f_cdf(p.x, p.d1, p.d2);
    const double want = oracles::f_cdf_by_integration(p.x, p.d1, p.d2);
    std::ostringstream where;
    where << "f_cdf(" << p.x << "," << p.d1 << "," << p.d2 << ") = " << got << " vs " << want;
    check.expect(std::fabs(got - want) < 1e-8, where.str());
  }
  check.expect(points == 50, "grid size");

  // k = 3 groups of the survey sizes, N = 105.
  std::vector<std::vector<double>> design(3);
  const int sizes[] = {59, 25, 21};
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < sizes[g]; ++i) design[static_cast<std::size_t>(g)].push_back(1 + (i * 7 + g) % 5);
  }
  const stats::AnovaResult r = stats::one_way_anova(design);
  check.expect(r.df_between == 2 && r.df_within == 102 && r.df_between + r.df_within == 104, "design df");
  check.expect(seconds_since(start) < 30.0, "runtime over 30 s");
}

void non_reproduction(Check& check) {
  struct Row {
    const char* criterion;
    const char* groups;
    double published;
  };
  const Row rows[] = {{"Functionality", "59,4.32,0.65;25,3.95,0.56;21,4.30,0.62", 4.480},
                      {"Reliability", "59,4.40,0.71;25,3.86,0.82;21,4.27,0.65", 4.183},
                      {"Efficiency", "59,4.48,0.58;25,4.10,0.51;21,4.49,0.77", 5.906}};
  std::ifstream doc(lexitrain::testing::source_dir() / "docs" / "stats-reproduction.md");
  check.expect(doc.good(), "docs/stats-reproduction.md missing");
  const std::string text((std::istreambuf_iterator<char>(doc)), std::istreambuf_iterator<char>());
  for (const auto& row : rows) {
    const auto summaries = stats::parse_group_summaries(row.groups);
    const stats::AnovaResult r = stats::anova_from_summary(summaries);
    char computed[16];
    std::snprintf(computed, sizeof computed, "%.3f", r.f);
    char published[16];
    std::snprintf(published, sizeof published, "%.3f", row.published);
    std::cout << "      " << row.criterion << ": F(" << r.df_between << "," << r.df_within << ") = " << computed
              << ", p = " << r.p << " (published " << published << ")\n";
    check.expect(r.df_between == 2 && r.df_within == 102, std::string(row.criterion) + " df");
    check.expect(std::fabs(r.f - row.published) > 0.1, std::string(row.criterion) + " unexpectedly reproduced");
    check.expect(text.find(computed) != std::string::npos, std::string(row.criterion) + " computed F not documented");
    check.expect(text.find(published) != std::string::npos, std::string(row.criterion) + " published F not documented");
  }
}

// Answers from the pack alone (prompt -> translation), never peeking at the engine.
int http_choice(const LexiconPack& pack, const json& question, int n) {
  std::string answer;
  for (const auto& level : pack.levels()) {
    for (const auto& category : level.categories) {
      for (const auto& item : category.items) {
        if (item.english == question["prompt"]) answer = item.translation;
      }
    }
  }
  int correct = 0;
  for (int i = 0; i < 4; ++i) {
    if (question["options"][static_cast<std::size_t>(i)] == answer) correct = i;
  }
  return n % 3 == 2 ? (correct + 1) % 4 : correct;
}

void http_differential(Check& check) {
  const LexiconPack pack = synthetic_pack({{8, 4}});
  TempDir data;
  ProgressLog log(data.path());
  ManualClock clock;
  TrainerService service({pack}, log, clock);
  HttpServer server(service);
  const int port = server.start_background();
  httplib::Client client("127.0.0.1", port);

  auto call = [&](const httplib::Result& res) {
    if (!res) throw std::runtime_error("HTTP transport failure");
    if (res->status >= 300) throw std::runtime_error("HTTP " + std::to_string(res->status) + ": " + res->body);
    return json::parse(res->body);
  };
  const json created = call(client.Post("/v1/sessions",
                                        json{{"learnerId", "lee"}, {"packId", "synthetic"}, {"level", "basic"},
                                             {"category", "cat-0-0"}}
                                            .dump(),
                                        "application/json"));
  const std::string id = created["sessionId"];
  json step = created["firstStep"];
  int n = 0;
  while (step["kind"] != "category-complete") {
    if (step["kind"] == "quiz") {
      const json body{{"questionId", step["question"]["questionId"]},
                      {"selectedIndex", http_choice(pack, step["question"], n++)}};
      call(client.Post("/v1/sessions/" + id + "/answer", body.dump(), "application/json"));
    }
    step = call(client.Get("/v1/sessions/" + id + "/step"));
  }
  const json http_report = call(client.Get("/v1/sessions/" + id + "/report"));
  const Session http_state = service.snapshot(id);
  server.stop();

  SessionRequest request = request_for("cat-0-0", {}, {}, TrainerService::default_seed(id));
  request.session_id = id;
  request.learner_id = "lee";
  ProgressRecord fresh;
  fresh.learner_id = "lee";
  Session local = start_session(pack, fresh, request);
  const Trace trace = drive(pack, local, scripted_choice);
  const CompletionReport report = completion_report(trace.session);

  check.expect(trace.kinds == "PPPPPQQQPPPQQQC", "in-process steps " + trace.kinds);
  check.expect(session_to_json(http_state) == session_to_json(trace.session), "engine state differs");
  check.expect(http_state == trace.session, "session values differ");
  check.expect(http_report == report_to_json(report), "report differs");
  check.expect(report.questions_asked == 6 && report.questions_correct == 4, "scripted score");
  check.expect(report.points_earned == 10 * report.questions_correct, "points != 10 x correct");
  check.expect(report.accuracy == static_cast<double>(report.questions_correct) / report.questions_asked,
               "accuracy != correct / asked");
}

}  // namespace

int main() {
  std::cout.precision(3);
  run_criterion("scheduler law", scheduler_law);
  run_criterion("feedback matrix", feedback_matrix);
  run_criterion("level gating and log truncation", gating);
  run_criterion("likert banding", likert);
  run_criterion("anova oracle equivalence", anova);
  run_criterion("documented non-reproduction", non_reproduction);
  run_criterion("http vs in-process differential", http_differential);
  const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.pass; });
  std::cout << (outcomes.size() - failed) << "/" << outcomes.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
