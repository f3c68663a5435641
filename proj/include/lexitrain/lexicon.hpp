#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lexitrain {

enum class Language { Korean, MandarinChinese, Japanese, Spanish };

enum class LevelRank { Basic = 0, Intermediate = 1, Advanced = 2 };

inline constexpr std::array<LevelRank, 3> kAllLevels = {
    LevelRank::Basic, LevelRank::Intermediate, LevelRank::Advanced};

std::string_view to_string(Language language);
std::string_view to_string(LevelRank rank);
std::optional<Language> parse_language(std::string_view text);
std::optional<LevelRank> parse_level_rank(std::string_view text);

struct TrainingItem {
  std::string id;
  std::string english;
  std::string translation;
  std::optional<std::string> romanization;
  std::optional<std::string> mnemonic;
  std::optional<std::string> sample_sentence;
  // Relative to the pack's audio root.
  std::optional<std::string> audio;

  bool operator==(const TrainingItem&) const = default;
};

struct Category {
  std::string name;
  std::vector<TrainingItem> items;

  bool operator==(const Category&) const = default;
};

struct Level {
  LevelRank rank = LevelRank::Basic;
  std::vector<Category> categories;

  bool operator==(const Level&) const = default;
};

struct ItemLocation {
  std::size_t level_index = 0;
  std::size_t category_index = 0;
  std::size_t item_index = 0;
};

// One language's content tree. Immutable once constructed; the item index
// is built eagerly so lookups by id are O(1) expected.
class LexiconPack {
 public:
  LexiconPack(std::string pack_id, std::string pack_version, Language language,
              std::vector<Level> levels);

  const std::string& pack_id() const noexcept { return pack_id_; }
  const std::string& pack_version() const noexcept { return pack_version_; }
  Language language() const noexcept { return language_; }
  const std::vector<Level>& levels() const noexcept { return levels_; }

  // nullptr when the rank is absent (only possible for hand-built packs).
  const Level* find_level(LevelRank rank) const;
  const Category* find_category(LevelRank rank, std::string_view name) const;

  // First occurrence wins when ids collide; validate_pack reports the rest.
  const TrainingItem* find_item(std::string_view id) const;
  std::optional<ItemLocation> locate_item(std::string_view id) const;

  std::size_t item_count() const noexcept { return item_count_; }

  bool operator==(const LexiconPack& other) const {
    return pack_id_ == other.pack_id_ && pack_version_ == other.pack_version_ &&
           language_ == other.language_ && levels_ == other.levels_;
  }

 private:
  std::string pack_id_;
  std::string pack_version_;
  Language language_;
  std::vector<Level> levels_;
  std::unordered_map<std::string, ItemLocation> index_;
  std::size_t item_count_ = 0;
};

enum class Severity { Error, Warning };

struct Finding {
  Severity severity = Severity::Error;
  std::string location;
  std::string message;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Finding> findings;
};

enum class ValidationMode { Lenient, Canonical };

// Categories every level must contain in canonical mode, in curriculum order.
const std::vector<std::string>& canonical_categories(LevelRank rank);

// Throws Error{SyntaxError} with line/column on malformed text and
// Error{SchemaError} on missing fields, bad enum values or level order.
LexiconPack parse_pack(std::string_view text);
LexiconPack load_pack_file(const std::filesystem::path& path);

nlohmann::json pack_to_json(const LexiconPack& pack);
std::string serialize_pack(const LexiconPack& pack);

// Reports every finding rather than stopping at the first. When audio_root is
// given, audio references that do not resolve to a file produce warnings.
ValidationReport validate_pack(
    const LexiconPack& pack, ValidationMode mode,
    const std::optional<std::filesystem::path>& audio_root = std::nullopt);

std::vector<std::pair<std::string, std::size_t>> list_categories(
    const LexiconPack& pack, LevelRank rank);

nlohmann::json item_to_json(const TrainingItem& item);
nlohmann::json report_to_json(const ValidationReport& report);

}  // namespace lexitrain
