#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexitrain/errors.hpp"
#include "lexitrain/lexicon.hpp"
#include "lexitrain/service.hpp"
#include "lexitrain/stats.hpp"

namespace {

using namespace lexitrain;
using nlohmann::json;

FeedbackModality parse_modality_flag(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) parts.push_back(part);
  if (parts.size() != 3) {
    throw Error(ErrorCode::InvalidModality, "modality must be TYPE,LEVEL,TIMING (e.g. KCR,task,immediate)");
  }
  return modality_from_json({{"type", parts[0]}, {"level", parts[1]}, {"timing", parts[2]}});
}

std::vector<std::string> read_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot open answer script " + path);
  std::vector<std::string> answers;
  for (std::string line; std::getline(in, line);) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    answers.push_back(line.substr(begin, end - begin + 1));
  }
  return answers;
}

int choose_option(const std::string& token, const QuizQuestion& question) {
  if (token == "correct") return question.correct_index;
  if (token == "wrong") return (question.correct_index + 1) % static_cast<int>(kOptionCount);
  if (token.size() == 1 && token[0] >= '0' && token[0] <= '3') return token[0] - '0';
  throw Error(ErrorCode::InvalidRequest, "answer script token '" + token + "' is not correct|wrong|0..3");
}

int validate_pack_command(const std::string& file, bool canonical, const std::string& audio_root) {
  const LexiconPack pack = load_pack_file(file);
  std::optional<std::filesystem::path> root;
  if (!audio_root.empty()) root = audio_root;
  const auto report = validate_pack(pack, canonical ? ValidationMode::Canonical : ValidationMode::Lenient, root);
  for (const auto& finding : report.findings) {
    std::cout << (finding.severity == Severity::Error ? "error   " : "warning ") << finding.location << ": "
              << finding.message << "\n";
  }
  std::cout << pack.pack_id() << " (" << to_string(pack.language()) << ", " << pack.item_count() << " items): "
            << (report.valid ? "valid" : "INVALID") << "\n";
  return report.valid ? 0 : 1;
}

struct RunOptions {
  std::string pack_file;
  std::string level;
  std::string category;
  std::string script;
  std::string learner = "cli-learner";
  std::string data_dir = "data";
  std::string modality = "KR,task,immediate";
  int block_size = 5;
  int quiz_length = 3;
  bool no_quiz = false;
  std::optional<std::uint64_t> seed;
};

int run_session_command(const RunOptions& options) {
  const auto answers = read_script(options.script);
  std::vector<LexiconPack> packs;
  packs.push_back(load_pack_file(options.pack_file));
  const std::string pack_id = packs.front().pack_id();

  ProgressLog log(options.data_dir);
  SystemClock clock;
  TrainerService service(std::move(packs), log, clock);

  json request{{"learnerId", options.learner},
               {"packId", pack_id},
               {"level", options.level},
               {"category", options.category},
               {"policy", {{"blockSize", options.block_size}, {"quizLength", options.quiz_length},
                           {"quizToggle", !options.no_quiz}}},
               {"modality", modality_to_json(parse_modality_flag(options.modality))}};
  if (options.seed) request["seed"] = *options.seed;

  json created = service.create_session(request);
  const std::string session_id = created["sessionId"];
  std::cout << "session " << session_id << "\n";

  std::size_t next_answer = 0;
  json step = created["firstStep"];
  for (;;) {
    const std::string kind = step["kind"];
    if (kind == "present") {
      const json& item = step["item"];
      std::cout << "  present  " << item["english"].get<std::string>() << " = "
                << item["translation"].get<std::string>() << "\n";
    } else if (kind == "quiz") {
      const Session state = service.snapshot(session_id);
      const QuizQuestion& question = state.pending_questions.front();
      if (next_answer >= answers.size()) {
        throw Error(ErrorCode::InvalidRequest, "answer script ran out at question " + question.question_id);
      }
      const int selected = choose_option(answers[next_answer++], question);
      json feedback = service.answer(session_id, {{"questionId", question.question_id}, {"selectedIndex", selected}});
      std::cout << "  quiz     " << question.prompt << " -> " << question.options[static_cast<std::size_t>(selected)]
                << " [" << feedback["verdict"].get<std::string>() << "]\n";
      if (feedback.contains("blockFeedback")) {
        for (const auto& message : feedback["blockFeedback"]) {
          std::cout << "    feedback " << message["questionId"].get<std::string>() << ": "
                    << message["verdict"].get<std::string>() << "\n";
        }
      }
    } else if (kind == "category-complete") {
      std::cout << "category complete\n";
    } else if (kind == "level-complete") {
      std::cout << "level complete; review list has " << step["reviewList"].size() << " items\n";
    }
    if (kind == "level-complete") break;
    if (kind == "category-complete" && !service.snapshot(session_id).level_review_pending) break;
    step = service.step(session_id);
  }
  std::cout << service.report(session_id).dump(2) << "\n";
  return 0;
}

HttpServer* g_server = nullptr;

int serve_command(const std::string& host, int port, const std::string& packs_dir, const std::string& data_dir) {
  ProgressLog log(data_dir);
  SystemClock clock;
  TrainerService service(load_pack_directory(packs_dir), log, clock);
  HttpServer server(service, std::filesystem::path(packs_dir) / "audio");
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server != nullptr) g_server->stop();
  });
  std::cout << "serving " << service.list_packs().size() << " pack(s) on " << host << ":" << port << std::endl;
  return server.listen(host, port) ? 0 : 1;
}

int anova_command(const std::string& input, bool as_json) {
  std::ifstream in(input);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot open " + input);
  const auto responses = stats::parse_survey_csv(in);
  const auto rows = stats::analyze_survey(responses);
  if (as_json) {
    json out = json::array();
    for (const auto& row : rows) out.push_back(stats::analysis_to_json(row));
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << stats::format_anova_table(rows);
  }
  return 0;
}

// Each value may hold one group or several separated by ';'.
int anova_summary_command(const std::vector<std::string>& groups, bool as_json) {
  std::string joined;
  for (const auto& g : groups) joined += g + ";";
  const auto summaries = stats::parse_group_summaries(joined);
  const auto result = stats::anova_from_summary(summaries);
  if (as_json) {
    std::cout << stats::anova_to_json(result).dump(2) << "\n";
  } else {
    std::printf("F(%ld,%ld) = %.3f, p = %.3f\n", result.df_between, result.df_within, result.f, result.p);
    std::printf("SS between = %.6f, SS within = %.6f\n", result.ss_between, result.ss_within);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vocabulary trainer: content validation, session runs, service and evaluation statistics"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate-pack", "Check a lexicon pack file");
  std::string pack_file;
  bool canonical = false;
  std::string audio_root;
  validate->add_option("file", pack_file, "Pack file")->required()->check(CLI::ExistingFile);
  validate->add_flag("--canonical", canonical, "Require the full canonical category lists");
  validate->add_option("--audio-root", audio_root, "Directory audio references resolve against");

  auto* run = app.add_subcommand("run-session", "Drive one category session from an answer script");
  RunOptions run_options;
  run->add_option("--pack", run_options.pack_file, "Pack file")->required()->check(CLI::ExistingFile);
  run->add_option("--level", run_options.level, "basic|intermediate|advanced")->required();
  run->add_option("--category", run_options.category, "Category name")->required();
  run->add_option("--script", run_options.script, "Answers file: one of correct|wrong|0..3 per line")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--learner", run_options.learner, "Learner id");
  run->add_option("--data-dir", run_options.data_dir, "Progress log directory");
  run->add_option("--modality", run_options.modality, "TYPE,LEVEL,TIMING");
  run->add_option("--block-size", run_options.block_size, "Items per block");
  run->add_option("--quiz-length", run_options.quiz_length, "Questions per block");
  run->add_flag("--no-quiz", run_options.no_quiz, "Turn the quiz toggle off");
  run->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t seed) { run_options.seed = seed; },
                                          "Question generation seed");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string packs_dir = "packs";
  std::string data_dir = "data";
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--packs-dir", packs_dir, "Directory of *.json packs (audio under <dir>/audio)")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--data-dir", data_dir, "Progress log directory");

  auto* stats_cmd = app.add_subcommand("stats", "Evaluation statistics");
  stats_cmd->require_subcommand(1);
  auto* anova = stats_cmd->add_subcommand("anova", "One-way ANOVA per criterion from raw survey CSV");
  std::string input;
  bool as_json = false;
  anova->add_option("--input", input, "CSV with columns group,criterion,rating")->required()->check(CLI::ExistingFile);
  anova->add_flag("--json", as_json, "Emit JSON");
  auto* summary = stats_cmd->add_subcommand("anova-summary", "One-way ANOVA from per-group n, mean, sd");
  std::vector<std::string> groups;
  summary->add_option("--groups", groups, "\"n,mean,sd;n,mean,sd;...\" or one n,mean,sd per value")->required();
  summary->add_flag("--json", as_json, "Emit JSON");
  auto* likert = stats_cmd->add_subcommand("likert", "Descriptive band of a mean rating");
  double mean = 0.0;
  likert->add_option("mean", mean, "Mean rating in [1, 5]")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return validate_pack_command(pack_file, canonical, audio_root);
    if (*run) return run_session_command(run_options);
    if (*serve) return serve_command(host, port, packs_dir, data_dir);
    if (*anova) return anova_command(input, as_json);
    if (*summary) return anova_summary_command(groups, as_json);
    if (*likert) {
      std::cout << stats::likert_band(mean) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << api_code(e.code()) << "]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
