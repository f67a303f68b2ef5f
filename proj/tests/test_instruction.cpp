#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "cml/instruction.hpp"
#include "cml/providers.hpp"
#include "support/fixtures.hpp"

using namespace cml;

namespace {

struct StubChat final : ChatProvider {
  std::string reply;
  bool throws = false;
  std::string model_name() const override { return "stub"; }
  std::string complete(const std::string&, const std::string&) override {
    if (throws) throw ProviderError("connection refused");
    return reply;
  }
};

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("instruction prompt carries the four components in order") {
  PromptBundle bundle = build_cml_instruction("Lake Placid", "A crocodile surfaces in Maine.");

  CHECK(bundle.kind == PromptKind::cml_instruction);
  CHECK(bundle.text.rfind("You are an expert AI scriptwriter", 0) == 0);
  const std::string ending =
      "starting with `<script>` and ending with `</script>`.";
  REQUIRE(bundle.text.size() >= ending.size());
  CHECK(bundle.text.compare(bundle.text.size() - ending.size(), ending.size(), ending) == 0);

  // components 2-4 appear verbatim, component 1 with its substitutions applied
  const PromptTemplates& defaults = PromptTemplates::defaults();
  std::size_t p2 = bundle.text.find(defaults.prompt_instructions_content);
  std::size_t p3 = bundle.text.find(defaults.prompt_example);
  std::size_t p4 = bundle.text.find(defaults.prompt_end_llm);
  REQUIRE(p2 != std::string::npos);
  REQUIRE(p3 != std::string::npos);
  REQUIRE(p4 != std::string::npos);
  CHECK(p2 < p3);
  CHECK(p3 < p4);
  CHECK(bundle.text.find(defaults.prompt_instructions_content, p2 + 1) == std::string::npos);

  CHECK(bundle.text.find("Movie Title: Lake Placid") != std::string::npos);
  CHECK(bundle.text.find("Movie Summary: A crocodile surfaces in Maine.") != std::string::npos);
  CHECK(bundle.text.find("INT. COFFEE SHOP - DAY") != std::string::npos);
  CHECK(bundle.text.find("{movie_name}") == std::string::npos);
  CHECK(bundle.text.find("{summary}") == std::string::npos);

  CHECK(bundle.substitutions.size() == 2);
  CHECK(bundle.component_order ==
        std::vector<std::string>{"prompt_start_llm", "prompt_instructions_content",
                                 "prompt_example", "prompt_end_llm"});
  CHECK(bundle.system_message == "You are an award-winning screenwriter");

  // byte-identical across runs
  CHECK(build_cml_instruction("Lake Placid", "A crocodile surfaces in Maine.").text ==
        bundle.text);
}

TEST_CASE("base prompt is a single substituted component") {
  PromptBundle bundle = build_base_prompt("Heat", "Two careful men cross paths.");
  CHECK(bundle.kind == PromptKind::base);
  CHECK(bundle.component_order == std::vector<std::string>{"base_prompt"});
  CHECK(bundle.text.find("Heat") != std::string::npos);
  CHECK(bundle.text.find("Two careful men cross paths.") != std::string::npos);
  CHECK(bundle.text.find('{') == std::string::npos);

  CHECK_THROWS_AS(build_base_prompt("", "x"), std::invalid_argument);
  CHECK_THROWS_AS(build_base_prompt("x", ""), std::invalid_argument);
  CHECK_THROWS_AS(build_cml_instruction("", "x"), std::invalid_argument);
}

TEST_CASE("prompt templates are overridable from a JSON config") {
  auto path = write_temp("cml_prompts_test.json",
                         R"({"version": "2", "base_prompt": "OVERRIDE {movie_name} :: {summary}"})");
  PromptTemplates templates = PromptTemplates::load(path);
  CHECK(templates.version == "2");
  // untouched fields keep their defaults
  CHECK(templates.prompt_example == PromptTemplates::defaults().prompt_example);

  PromptBundle bundle = build_base_prompt("Heat", "summary text", templates);
  CHECK(bundle.text == "OVERRIDE Heat :: summary text");

  auto bad = write_temp("cml_prompts_bad.json", R"({"base_prompt": "{no_such_key}"})");
  PromptTemplates broken = PromptTemplates::load(bad);
  CHECK_THROWS_AS(build_base_prompt("a", "b", broken), std::invalid_argument);
}

TEST_CASE("validate_output checks wrapper and parse structure") {
  SUBCASE("the canned local script validates") {
    LocalChatProvider chat;
    ValidationResult result = validate_output(chat.complete("s", "u"));
    CHECK(result.valid);
    CHECK(result.issues.empty());
  }
  SUBCASE("the fenced coffee-shop snippet validates") {
    ValidationResult result = validate_output(fixtures::kCoffeeShopSnippet);
    CHECK(result.valid);
  }
  SUBCASE("free prose fails with missing-script-wrapper") {
    ValidationResult result = validate_output(fixtures::kTagFreeProse);
    CHECK(!result.valid);
    bool found = false;
    for (const auto& issue : result.issues)
      if (issue == "missing-script-wrapper") found = true;
    CHECK(found);
  }
  SUBCASE("wrapper present but zero dialogues") {
    ValidationResult result = validate_output(
        "<script><scene><scene_description>Just scenery.</scene_description></scene></script>");
    CHECK(!result.valid);
    bool found = false;
    for (const auto& issue : result.issues)
      if (issue == "no-dialogue") found = true;
    CHECK(found);
  }
  SUBCASE("re-validation is stable") {
    LocalChatProvider chat;
    std::string output = chat.complete("s", "u");
    ValidationResult first = validate_output(output);
    ValidationResult second = validate_output(output);
    CHECK(first.valid == second.valid);
    CHECK(first.issues == second.issues);
  }
}

TEST_CASE("generate records output, verdict and issues") {
  CorpusEntry entry{"Lake Placid", "tt0139414", "content text", "A crocodile surfaces."};

  SUBCASE("valid canned script") {
    LocalChatProvider chat;
    GenerationRecord record = generate(entry, PromptKind::cml_instruction, chat);
    CHECK(record.validated);
    CHECK(record.issues.empty());
    CHECK(record.movie_name == "Lake Placid");
    CHECK(record.imdb_id == "tt0139414");
    CHECK(record.model_name == "local-canned");
    CHECK(!record.timestamp.empty());
  }
  SUBCASE("prose reply fails validation") {
    StubChat chat;
    chat.reply = "Here is a story about a crocodile, told in plain prose.";
    GenerationRecord record = generate(entry, PromptKind::base, chat);
    CHECK(!record.validated);
    CHECK(!record.issues.empty());
  }
  SUBCASE("transport errors are recorded, not thrown") {
    StubChat chat;
    chat.throws = true;
    GenerationRecord record = generate(entry, PromptKind::base, chat);
    CHECK(!record.validated);
    REQUIRE(!record.issues.empty());
    CHECK(record.issues[0].rfind("transport:", 0) == 0);
  }
  SUBCASE("identical inputs give identical records modulo timestamp") {
    LocalChatProvider chat;
    GenerationRecord a = generate(entry, PromptKind::cml_instruction, chat);
    GenerationRecord b = generate(entry, PromptKind::cml_instruction, chat);
    CHECK(a.raw_output == b.raw_output);
    CHECK(a.validated == b.validated);
    CHECK(a.issues == b.issues);
    CHECK(a.prompt.text == b.prompt.text);
  }
}
