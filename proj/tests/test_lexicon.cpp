#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <random>

#include "lexitrain/errors.hpp"
#include "lexitrain/lexicon.hpp"
#include "test_support.hpp"

using namespace lexitrain;
using lexitrain::testing::fixture;
using lexitrain::testing::korean_pack;
using lexitrain::testing::synthetic_pack;
using nlohmann::json;

namespace {

json minimal_document() {
  return json::parse(R"({
    "packId": "mini", "packVersion": "1", "language": "spanish",
    "levels": [
      {"rank": "basic", "categories": [{"name": "numbering", "items": [{"id": "a", "english": "one", "translation": "uno"}]}]},
      {"rank": "intermediate", "categories": [{"name": "pronouns", "items": [{"id": "b", "english": "I", "translation": "yo"}]}]},
      {"rank": "advanced", "categories": [{"name": "greetings", "items": [{"id": "c", "english": "hello", "translation": "hola"}]}]}
    ]})");
}

ErrorCode code_of(const std::function<void()>& action) {
  try {
    action();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lexitrain::Error thrown";
  return ErrorCode::InvalidRequest;
}

bool has_error_mentioning(const ValidationReport& report, const std::string& needle) {
  for (const auto& f : report.findings) {
    if (f.severity == Severity::Error &&
        (f.message.find(needle) != std::string::npos || f.location.find(needle) != std::string::npos)) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST(ParsePack, MinimalSpanishPackHasThreeItems) {
  const LexiconPack pack = parse_pack(minimal_document().dump());
  EXPECT_EQ(pack.item_count(), 3u);
  EXPECT_EQ(pack.language(), Language::Spanish);
  ASSERT_EQ(pack.levels().size(), 3u);
  EXPECT_EQ(pack.levels()[2].rank, LevelRank::Advanced);
}

TEST(ParsePack, MinimalFixtureFileMatchesShape) {
  const LexiconPack pack = load_pack_file(fixture("es-minimal.json"));
  EXPECT_EQ(pack.item_count(), 3u);
  EXPECT_TRUE(validate_pack(pack, ValidationMode::Lenient).valid);
}

TEST(ParsePack, CanonicalKoreanBasicHasAlphabetAndNumbering) {
  const auto basic = list_categories(korean_pack(), LevelRank::Basic);
  ASSERT_EQ(basic.size(), 2u);
  EXPECT_EQ(basic[0].first, "alphabet");
  EXPECT_EQ(basic[1].first, "numbering");
  EXPECT_GE(basic[0].second, 8u);
  EXPECT_GE(basic[1].second, 8u);
}

TEST(ParsePack, IntermediateListsFiveCategoriesInCurriculumOrder) {
  const auto rows = list_categories(korean_pack(), LevelRank::Intermediate);
  std::vector<std::string> names;
  for (const auto& [name, count] : rows) {
    names.push_back(name);
    EXPECT_GE(count, 8u);
  }
  EXPECT_EQ(names, canonical_categories(LevelRank::Intermediate));
  EXPECT_EQ(names.size(), 5u);
}

TEST(ParsePack, LevelsOutOfOrderIsSchemaError) {
  json doc = minimal_document();
  std::swap(doc["levels"][0], doc["levels"][1]);
  EXPECT_EQ(code_of([&] { parse_pack(doc.dump()); }), ErrorCode::SchemaError);
}

TEST(ParsePack, WrongLevelCountIsSchemaError) {
  json doc = minimal_document();
  doc["levels"].erase(2);
  EXPECT_EQ(code_of([&] { parse_pack(doc.dump()); }), ErrorCode::SchemaError);
}

TEST(ParsePack, MissingFieldAndBadEnumAreSchemaErrors) {
  json missing = minimal_document();
  missing["levels"][0]["categories"][0]["items"][0].erase("translation");
  EXPECT_EQ(code_of([&] { parse_pack(missing.dump()); }), ErrorCode::SchemaError);

  json language = minimal_document();
  language["language"] = "klingon";
  EXPECT_EQ(code_of([&] { parse_pack(language.dump()); }), ErrorCode::SchemaError);

  json rank = minimal_document();
  rank["levels"][1]["rank"] = "expert";
  EXPECT_EQ(code_of([&] { parse_pack(rank.dump()); }), ErrorCode::SchemaError);
}

TEST(ParsePack, SyntaxErrorReportsLineAndColumn) {
  const std::string text = "{\n  \"packId\": \"x\",\n  \"packVersion\": oops\n}";
  try {
    parse_pack(text);
    FAIL() << "expected SyntaxError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(e.detail()["line"], 3);
    EXPECT_GE(e.detail()["column"].get<int>(), 18);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParsePack, PreservesDocumentOrder) {
  const LexiconPack& pack = korean_pack();
  const Category* alphabet = pack.find_category(LevelRank::Basic, "alphabet");
  ASSERT_NE(alphabet, nullptr);
  EXPECT_EQ(alphabet->items.front().translation, "ㄱ");
  EXPECT_EQ(alphabet->items.front().romanization, "giyeok");
}

TEST(ValidatePack, CanonicalFixtureHasNoFindings) {
  const auto report = validate_pack(korean_pack(), ValidationMode::Canonical);
  EXPECT_TRUE(report.valid);
  EXPECT_TRUE(report.findings.empty());
}

TEST(ValidatePack, MissingTimeReadingNamedInCanonicalMode) {
  json doc = pack_to_json(korean_pack());
  auto& cats = doc["levels"][1]["categories"];
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (cats[i]["name"] == "time-reading") {
      cats.erase(i);
      break;
    }
  }
  const LexiconPack pack = parse_pack(doc.dump());
  const auto canonical = validate_pack(pack, ValidationMode::Canonical);
  EXPECT_FALSE(canonical.valid);
  EXPECT_TRUE(has_error_mentioning(canonical, "time-reading"));
  EXPECT_TRUE(validate_pack(pack, ValidationMode::Lenient).valid);
}

TEST(ValidatePack, DuplicateItemIdNamesBothLocations) {
  json doc = minimal_document();
  doc["levels"][2]["categories"][0]["items"][0]["id"] = "a";
  const auto report = validate_pack(parse_pack(doc.dump()), ValidationMode::Lenient);
  EXPECT_FALSE(report.valid);
  bool found = false;
  for (const auto& f : report.findings) {
    if (f.message.find("duplicate item id") == std::string::npos) continue;
    found = true;
    EXPECT_NE(f.location.find("advanced/greetings"), std::string::npos);
    EXPECT_NE(f.message.find("basic/numbering"), std::string::npos);
  }
  EXPECT_TRUE(found);
}

TEST(ValidatePack, ReportsEveryFindingNotJustTheFirst) {
  json doc = minimal_document();
  doc["levels"][0]["categories"][0]["items"][0]["english"] = "";
  doc["levels"][1]["categories"][0]["items"][0]["audio"] = "../secret.mp3";
  doc["levels"][2]["categories"][0]["name"] = "Not An Identifier";
  const auto report = validate_pack(parse_pack(doc.dump()), ValidationMode::Lenient);
  EXPECT_FALSE(report.valid);
  EXPECT_TRUE(has_error_mentioning(report, "english text is empty"));
  EXPECT_TRUE(has_error_mentioning(report, "secret.mp3"));
  EXPECT_TRUE(has_error_mentioning(report, "Not An Identifier"));
}

TEST(ValidatePack, EmptyCategoryAndDuplicateCategoryAreErrors) {
  json doc = minimal_document();
  doc["levels"][0]["categories"].push_back({{"name", "numbering"}, {"items", json::array()}});
  const auto report = validate_pack(parse_pack(doc.dump()), ValidationMode::Lenient);
  EXPECT_TRUE(has_error_mentioning(report, "duplicate category"));
  EXPECT_TRUE(has_error_mentioning(report, "no items"));
}

TEST(ValidatePack, MissingAudioIsOnlyAWarning) {
  lexitrain::testing::TempDir root;
  const auto report = validate_pack(korean_pack(), ValidationMode::Canonical, root.path());
  EXPECT_TRUE(report.valid);
  ASSERT_FALSE(report.findings.empty());
  for (const auto& f : report.findings) EXPECT_EQ(f.severity, Severity::Warning);

  std::filesystem::create_directories(root.path() / "audio/ko");
  std::ofstream(root.path() / "audio/ko/ko-alpha-01.mp3") << "x";
  const auto after = validate_pack(korean_pack(), ValidationMode::Canonical, root.path());
  EXPECT_EQ(after.findings.size() + 1, report.findings.size());
}

TEST(ValidatePack, IsPure) {
  json doc = minimal_document();
  doc["levels"][0]["categories"][0]["items"][0]["translation"] = "";
  const LexiconPack pack = parse_pack(doc.dump());
  const auto a = report_to_json(validate_pack(pack, ValidationMode::Canonical));
  const auto b = report_to_json(validate_pack(pack, ValidationMode::Canonical));
  EXPECT_EQ(a, b);
}

TEST(PackIndex, EveryListedItemIsFoundById) {
  const LexiconPack& pack = korean_pack();
  std::size_t total = 0;
  for (const auto& level : pack.levels()) {
    for (const auto& category : level.categories) {
      for (const auto& item : category.items) {
        ++total;
        const TrainingItem* found = pack.find_item(item.id);
        ASSERT_NE(found, nullptr) << item.id;
        EXPECT_EQ(*found, item);
        const auto where = pack.locate_item(item.id);
        ASSERT_TRUE(where.has_value());
        EXPECT_EQ(pack.levels()[where->level_index].categories[where->category_index].items[where->item_index],
                  item);
      }
    }
  }
  EXPECT_EQ(total, pack.item_count());
  EXPECT_EQ(pack.find_item("no-such-item"), nullptr);
}

TEST(RoundTrip, FixturesSurviveSerializeThenParse) {
  for (const char* name : {"ko-canonical.json", "es-minimal.json"}) {
    const LexiconPack pack = load_pack_file(fixture(name));
    EXPECT_EQ(parse_pack(serialize_pack(pack)), pack) << name;
  }
}

TEST(RoundTrip, RandomPacksSurviveSerializeThenParse) {
  std::mt19937_64 rng(20240517);
  const std::vector<std::string> alphabet = {"a", "ñ", "한", "語", " ", "\"", "\\", "é", "z", "\n"};
  auto text = [&](std::size_t max_len) {
    std::string out;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t i = 0; i < len; ++i) out += alphabet[rng() % alphabet.size()];
    return out;
  };
  for (int round = 0; round < 100; ++round) {
    std::vector<Level> levels;
    int serial = 0;
    for (LevelRank rank : kAllLevels) {
      Level level{rank, {}};
      const std::size_t categories = 1 + rng() % 3;
      for (std::size_t c = 0; c < categories; ++c) {
        Category category{"c" + std::to_string(c), {}};
        const std::size_t items = 1 + rng() % 5;
        for (std::size_t i = 0; i < items; ++i) {
          TrainingItem item{"i" + std::to_string(serial++), text(8), text(8), {}, {}, {}, {}};
          if (rng() % 2) item.romanization = text(6);
          if (rng() % 2) item.mnemonic = text(20);
          if (rng() % 2) item.sample_sentence = text(20);
          if (rng() % 2) item.audio = "audio/" + std::to_string(serial) + ".mp3";
          category.items.push_back(std::move(item));
        }
        level.categories.push_back(std::move(category));
      }
      levels.push_back(std::move(level));
    }
    const LexiconPack pack("p" + std::to_string(round), "v", static_cast<Language>(rng() % 4), std::move(levels));
    ASSERT_EQ(parse_pack(serialize_pack(pack)), pack) << "round " << round;
  }
}

TEST(Language, NamesRoundTrip) {
  for (Language language : {Language::Korean, Language::MandarinChinese, Language::Japanese, Language::Spanish}) {
    EXPECT_EQ(parse_language(to_string(language)), language);
  }
  for (LevelRank rank : kAllLevels) EXPECT_EQ(parse_level_rank(to_string(rank)), rank);
  EXPECT_FALSE(parse_language("english").has_value());
}

TEST(Errors, HttpMappingIsStable) {
  EXPECT_EQ(http_status(ErrorCode::LevelLocked), 409);
  EXPECT_EQ(http_status(ErrorCode::UnknownSession), 404);
  EXPECT_EQ(http_status(ErrorCode::InvalidModality), 422);
  EXPECT_EQ(http_status(ErrorCode::SessionComplete), 410);
  EXPECT_EQ(http_status(ErrorCode::CorruptStream), 500);
  EXPECT_EQ(api_code(ErrorCode::OutOfOrderAnswer), "OUT_OF_ORDER_ANSWER");
  const Error e(ErrorCode::UnknownPack, "nope", {{"packId", "x"}});
  EXPECT_EQ(e.to_json()["code"], "UNKNOWN_PACK");
  EXPECT_EQ(e.to_json()["detail"]["packId"], "x");
}

TEST(SyntheticPack, BuildsRequestedShape) {
  const LexiconPack pack = synthetic_pack({{3}, {2, 2}, {1}});
  EXPECT_EQ(pack.item_count(), 8u);
  EXPECT_TRUE(validate_pack(pack, ValidationMode::Lenient).valid);
}
