#include "lexitrain/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lexitrain/errors.hpp"

namespace lexitrain {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Language, std::string_view>, 4> kLanguageNames{{
    {Language::Korean, "korean"},
    {Language::MandarinChinese, "mandarin-chinese"},
    {Language::Japanese, "japanese"},
    {Language::Spanish, "spanish"},
}};

constexpr std::array<std::pair<LevelRank, std::string_view>, 3> kRankNames{{
    {LevelRank::Basic, "basic"},
    {LevelRank::Intermediate, "intermediate"},
    {LevelRank::Advanced, "advanced"},
}};

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what, {{"location", where}});
}

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) schema_error(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) schema_error(where, std::string("missing required field '") + key + "'");
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_string()) schema_error(where + "." + key, "expected a string");
  return value.get<std::string>();
}

std::optional<std::string> optional_string(const json& object, const char* key,
                                           const std::string& where) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_error(where + "." + key, "expected a string");
  return it->get<std::string>();
}

const json& require_array(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_array()) schema_error(where + "." + key, "expected an array");
  return value;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

TrainingItem parse_item(const json& node, const std::string& where) {
  TrainingItem item;
  item.id = require_string(node, "id", where);
  item.english = require_string(node, "english", where);
  item.translation = require_string(node, "translation", where);
  item.romanization = optional_string(node, "romanization", where);
  item.mnemonic = optional_string(node, "mnemonic", where);
  item.sample_sentence = optional_string(node, "sampleSentence", where);
  item.audio = optional_string(node, "audio", where);
  return item;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

bool is_safe_relative_path(std::string_view text) {
  if (text.empty() || text.front() == '/' || text.front() == '\\') return false;
  if (text.find(':') != std::string_view::npos) return false;
  std::filesystem::path path{std::string(text)};
  if (path.is_absolute() || path.has_root_name()) return false;
  for (const auto& part : path) {
    if (part == "..") return false;
  }
  return true;
}

std::string item_location(const Level& level, const Category& category, std::size_t index) {
  std::ostringstream out;
  out << to_string(level.rank) << "/" << category.name << "/items[" << index << "]";
  return out.str();
}

}  // namespace

std::string_view to_string(Language language) {
  for (const auto& [value, name] : kLanguageNames) {
    if (value == language) return name;
  }
  return "unknown";
}

std::string_view to_string(LevelRank rank) {
  for (const auto& [value, name] : kRankNames) {
    if (value == rank) return name;
  }
  return "unknown";
}

std::optional<Language> parse_language(std::string_view text) {
  for (const auto& [value, name] : kLanguageNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

std::optional<LevelRank> parse_level_rank(std::string_view text) {
  for (const auto& [value, name] : kRankNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

LexiconPack::LexiconPack(std::string pack_id, std::string pack_version, Language language,
                         std::vector<Level> levels)
    : pack_id_(std::move(pack_id)),
      pack_version_(std::move(pack_version)),
      language_(language),
      levels_(std::move(levels)) {
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const auto& categories = levels_[l].categories;
    for (std::size_t c = 0; c < categories.size(); ++c) {
      const auto& items = categories[c].items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        index_.try_emplace(items[i].id, ItemLocation{l, c, i});
        ++item_count_;
      }
    }
  }
}

const Level* LexiconPack::find_level(LevelRank rank) const {
  for (const auto& level : levels_) {
    if (level.rank == rank) return &level;
  }
  return nullptr;
}

const Category* LexiconPack::find_category(LevelRank rank, std::string_view name) const {
  const Level* level = find_level(rank);
  if (level == nullptr) return nullptr;
  for (const auto& category : level->categories) {
    if (category.name == name) return &category;
  }
  return nullptr;
}

const TrainingItem* LexiconPack::find_item(std::string_view id) const {
  auto location = locate_item(id);
  if (!location) return nullptr;
  return &levels_[location->level_index]
              .categories[location->category_index]
              .items[location->item_index];
}

std::optional<ItemLocation> LexiconPack::locate_item(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& canonical_categories(LevelRank rank) {
  static const std::vector<std::string> basic{"alphabet", "numbering"};
  static const std::vector<std::string> intermediate{
      "pronouns", "interrogatives", "school-supplies", "sports", "time-reading"};
  static const std::vector<std::string> advanced{
      "greetings", "introducing-oneself", "phone-conversation", "street", "eating"};
  switch (rank) {
    case LevelRank::Basic: return basic;
    case LevelRank::Intermediate: return intermediate;
    case LevelRank::Advanced: return advanced;
  }
  return basic;
}

LexiconPack parse_pack(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = line_and_column(text, e.byte);
    std::ostringstream message;
    message << "malformed pack document at line " << line << ", column " << column;
    throw Error(ErrorCode::SyntaxError, message.str(),
                {{"line", line}, {"column", column}, {"parser", e.what()}});
  }
  if (!root.is_object()) schema_error("$", "pack document must be an object");

  std::string pack_id = require_string(root, "packId", "$");
  std::string pack_version = require_string(root, "packVersion", "$");
  std::string language_name = require_string(root, "language", "$");
  auto language = parse_language(language_name);
  if (!language) schema_error("$.language", "unknown language '" + language_name + "'");

  const json& level_nodes = require_array(root, "levels", "$");
  if (level_nodes.size() != kAllLevels.size()) {
    schema_error("$.levels", "expected exactly 3 levels (basic, intermediate, advanced), found " +
                                 std::to_string(level_nodes.size()));
  }

  std::vector<Level> levels;
  levels.reserve(level_nodes.size());
  for (std::size_t l = 0; l < level_nodes.size(); ++l) {
    const std::string where = "$.levels[" + std::to_string(l) + "]";
    const json& node = level_nodes[l];
    std::string rank_name = require_string(node, "rank", where);
    auto rank = parse_level_rank(rank_name);
    if (!rank) schema_error(where + ".rank", "unknown level rank '" + rank_name + "'");
    if (*rank != kAllLevels[l]) {
      schema_error(where + ".rank", "levels must appear in order basic, intermediate, advanced; found '" +
                                        rank_name + "' at position " + std::to_string(l));
    }
    Level level{*rank, {}};
    const json& category_nodes = require_array(node, "categories", where);
    for (std::size_t c = 0; c < category_nodes.size(); ++c) {
      const std::string cwhere = where + ".categories[" + std::to_string(c) + "]";
      Category category;
      category.name = require_string(category_nodes[c], "name", cwhere);
      const json& item_nodes = require_array(category_nodes[c], "items", cwhere);
      for (std::size_t i = 0; i < item_nodes.size(); ++i) {
        category.items.push_back(
            parse_item(item_nodes[i], cwhere + ".items[" + std::to_string(i) + "]"));
      }
      level.categories.push_back(std::move(category));
    }
    levels.push_back(std::move(level));
  }
  return LexiconPack(std::move(pack_id), std::move(pack_version), *language, std::move(levels));
}

LexiconPack load_pack_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::StorageFailure, "cannot open pack file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pack(buffer.str());
}

json item_to_json(const TrainingItem& item) {
  json node{{"id", item.id}, {"english", item.english}, {"translation", item.translation}};
  if (item.romanization) node["romanization"] = *item.romanization;
  if (item.mnemonic) node["mnemonic"] = *item.mnemonic;
  if (item.sample_sentence) node["sampleSentence"] = *item.sample_sentence;
  if (item.audio) node["audio"] = *item.audio;
  return node;
}

json pack_to_json(const LexiconPack& pack) {
  json levels = json::array();
  for (const auto& level : pack.levels()) {
    json categories = json::array();
    for (const auto& category : level.categories) {
      json items = json::array();
      for (const auto& item : category.items) items.push_back(item_to_json(item));
      categories.push_back({{"name", category.name}, {"items", std::move(items)}});
    }
    levels.push_back({{"rank", to_string(level.rank)}, {"categories", std::move(categories)}});
  }
  return {{"packId", pack.pack_id()},
          {"packVersion", pack.pack_version()},
          {"language", to_string(pack.language())},
          {"levels", std::move(levels)}};
}

std::string serialize_pack(const LexiconPack& pack) { return pack_to_json(pack).dump(2); }

ValidationReport validate_pack(const LexiconPack& pack, ValidationMode mode,
                               const std::optional<std::filesystem::path>& audio_root) {
  ValidationReport report;
  auto error = [&](std::string location, std::string message) {
    report.findings.push_back({Severity::Error, std::move(location), std::move(message)});
  };
  auto warning = [&](std::string location, std::string message) {
    report.findings.push_back({Severity::Warning, std::move(location), std::move(message)});
  };

  if (pack.pack_id().empty()) error("packId", "pack id is empty");
  if (pack.levels().size() != kAllLevels.size()) {
    error("levels", "expected exactly 3 levels, found " + std::to_string(pack.levels().size()));
  }
  for (std::size_t l = 0; l < pack.levels().size() && l < kAllLevels.size(); ++l) {
    if (pack.levels()[l].rank != kAllLevels[l]) {
      error("levels[" + std::to_string(l) + "]",
            "level out of order: expected " + std::string(to_string(kAllLevels[l])) + ", found " +
                std::string(to_string(pack.levels()[l].rank)));
    }
  }

  std::map<std::string, std::string> first_seen;
  std::set<std::string> translations;
  for (const auto& level : pack.levels()) {
    const std::string level_name{to_string(level.rank)};
    if (level.categories.empty()) error(level_name, "level has no categories");

    std::set<std::string> names;
    for (const auto& category : level.categories) {
      const std::string cwhere = level_name + "/" + category.name;
      if (!is_identifier(category.name)) {
        error(cwhere, "category name '" + category.name + "' is not an identifier");
      }
      if (!names.insert(category.name).second) {
        error(cwhere, "duplicate category name '" + category.name + "' within level " + level_name);
      }
      if (category.items.empty()) error(cwhere, "category has no items");

      for (std::size_t i = 0; i < category.items.size(); ++i) {
        const TrainingItem& item = category.items[i];
        const std::string where = item_location(level, category, i);
        if (!is_identifier(item.id)) error(where, "item id '" + item.id + "' is not an identifier");
        auto [it, inserted] = first_seen.emplace(item.id, where);
        if (!inserted) {
          error(where, "duplicate item id '" + item.id + "' (also at " + it->second + ")");
        }
        if (item.english.empty()) error(where, "english text is empty");
        if (item.translation.empty()) error(where, "translation is empty");
        translations.insert(item.translation);
        if (item.audio) {
          if (!is_safe_relative_path(*item.audio)) {
            error(where, "audio reference '" + *item.audio +
                             "' must be a relative path without parent traversal");
          } else if (audio_root && !std::filesystem::exists(*audio_root / *item.audio)) {
            warning(where, "audio file '" + *item.audio + "' not found");
          }
        }
      }
    }

    if (mode == ValidationMode::Canonical) {
      for (const auto& required : canonical_categories(level.rank)) {
        if (!names.contains(required)) {
          error(level_name, "missing canonical category '" + required + "'");
        }
      }
    }
  }

  if (translations.size() < 4) {
    warning("levels", "fewer than 4 distinct translations; quizzes cannot be generated");
  }

  report.valid = std::none_of(report.findings.begin(), report.findings.end(),
                              [](const Finding& f) { return f.severity == Severity::Error; });
  return report;
}

std::vector<std::pair<std::string, std::size_t>> list_categories(const LexiconPack& pack,
                                                                 LevelRank rank) {
  std::vector<std::pair<std::string, std::size_t>> out;
  if (const Level* level = pack.find_level(rank)) {
    for (const auto& category : level->categories) {
      out.emplace_back(category.name, category.items.size());
    }
  }
  return out;
}

json report_to_json(const ValidationReport& report) {
  json findings = json::array();
  for (const auto& f : report.findings) {
    findings.push_back({{"severity", f.severity == Severity::Error ? "error" : "warning"},
                        {"location", f.location},
                        {"message", f.message}});
  }
  return {{"valid", report.valid}, {"findings", std::move(findings)}};
}

}  // namespace lexitrain
