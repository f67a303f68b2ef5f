#include "doctest.h"

#include "cml/metrics.hpp"
#include "cml/parser.hpp"
#include "cml/providers.hpp"

using namespace cml;

TEST_CASE("local embed is deterministic, arity- and order-preserving") {
  LocalProvider provider;
  auto vectors = provider.embed({"x", "y", "x"});
  REQUIRE(vectors.size() == 3);
  CHECK(vectors[0] == vectors[2]);
  CHECK(vectors[0] != vectors[1]);
  for (const auto& v : vectors) CHECK(v.dimension() == LocalProvider::kDefaultDimension);

  LocalProvider other;
  CHECK(other.embed({"x", "y", "x"}) == vectors);  // instance-independent
}

TEST_CASE("local embed self-similarity and zero-text guard") {
  LocalProvider provider;
  auto vectors = provider.embed({"abc", "abc", "", "completely different words"});
  CHECK(cosine(vectors[0], vectors[1]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vectors[2].is_zero());
  CHECK(cosine(vectors[2], vectors[0]) == 0.0);
  CHECK(vectors[0].norm() == doctest::Approx(1.0).epsilon(1e-12));  // L2-normalized
  CHECK_THROWS_AS(provider.embed({}), std::invalid_argument);
}

TEST_CASE("keyword extraction drops stop words, dedupes, keeps order") {
  LocalProvider provider;
  CHECK(provider.extract_keywords("The traffic was insane") ==
        std::vector<std::string>{"traffic", "insane"});
  CHECK(provider.extract_keywords("") == std::vector<std::string>{});
  CHECK(provider.extract_keywords("to of the") == std::vector<std::string>{});
  CHECK(provider.extract_keywords("Rain, rain and RAIN again") ==
        std::vector<std::string>{"rain"});
}

TEST_CASE("emotion lexicon classification") {
  LocalProvider provider;
  CHECK(provider.classify_emotion("I love this wonderful plan") == EmotionLabel::positive);
  CHECK(provider.classify_emotion("") == EmotionLabel::neutral);
  CHECK(provider.classify_emotion("I hate this awful mess") == EmotionLabel::negative);
  CHECK(provider.classify_emotion("the report arrived on time") == EmotionLabel::neutral);
  CHECK(provider.classify_emotion("I love it but I hate it") == EmotionLabel::neutral);  // tie
}

TEST_CASE("creative feature extraction is a deterministic trigram window") {
  LocalProvider provider;
  CHECK(provider.extract_creative_features({}) == std::vector<std::string>{});
  auto features = provider.extract_creative_features({"time is a thief"});
  REQUIRE(features.size() == 1);
  CHECK(features[0] == "time is a");
  auto twice = provider.extract_creative_features({"time is a thief", "time is a thief"});
  REQUIRE(twice.size() == 2);
  CHECK(twice[0] == twice[1]);
}

TEST_CASE("creativity analysis is a fixed injective template") {
  LocalProvider provider;
  CHECK(provider.analyze_creativity("time is a") == "creativity-analysis: time is a");
  CHECK(provider.analyze_creativity("x") == provider.analyze_creativity("x"));
  CHECK(provider.analyze_creativity("x") != provider.analyze_creativity("y"));
  CHECK_THROWS_AS(provider.analyze_creativity(""), std::invalid_argument);
}

TEST_CASE("uniqueness extraction surfaces the character's frequent tokens") {
  LocalProvider provider;
  std::string described = provider.extract_uniqueness("ANNA", {"strategy now", "strategy later"});
  CHECK(described.find("strategy") != std::string::npos);
  CHECK(described ==
        provider.extract_uniqueness("ANNA", {"strategy now", "strategy later"}));
  CHECK(provider.extract_uniqueness("X", {"a the to"}) == "no-distinctive-features");
}

TEST_CASE("intention detection uses the fixed marker list") {
  LocalProvider provider;
  auto turn = [](std::string line) {
    DialogueTurn t;
    t.character = "A";
    t.line = std::move(line);
    return t;
  };
  auto hits = provider.detect_intentions({turn("We need a new strategy.")});
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].turn_index == 0);
  CHECK(hits[0].text == "We need a new strategy.");

  CHECK(provider.detect_intentions({turn("Hello.")}).empty());
  CHECK(provider.detect_intentions({}).empty());

  auto multi = provider.detect_intentions(
      {turn("Nothing here."), turn("I will go."), turn("Let's move."), turn("I'm going to win.")});
  REQUIRE(multi.size() == 3);
  CHECK(multi[0].turn_index == 1);
  CHECK(multi[1].turn_index == 2);
  CHECK(multi[2].turn_index == 3);
}

TEST_CASE("event extraction takes the first sentence of each action block") {
  LocalProvider provider;
  ParsedScript script = std::move(ScriptBuilder()
                                      .begin_scene()
                                      .add_action("She runs. He follows.")
                                      .add_action("The door slams!")
                                      .add_action("no terminator here"))
                            .build();
  auto events = provider.extract_events(script);
  REQUIRE(events.size() == 3);
  CHECK(events[0] == "She runs.");
  CHECK(events[1] == "The door slams!");
  CHECK(events[2] == "no terminator here");
  CHECK(provider.extract_events(ParsedScript{}).empty());

  // abbreviation dots do not truncate sluglines to one-token stubs
  ParsedScript slug = std::move(ScriptBuilder().begin_scene("INT. LAB - NIGHT")).build();
  auto slug_events = provider.extract_events(slug);
  REQUIRE(slug_events.size() == 1);
  CHECK(slug_events[0] == "INT. LAB - NIGHT");
}

TEST_CASE("pattern extraction emits one descriptor per scene") {
  LocalProvider provider;
  ParsedScript script = std::move(ScriptBuilder()
                                      .begin_scene("INT. LAB - NIGHT")
                                      .add_description("Machines hum. Lights blink.")
                                      .begin_scene("EXT. PARK - DAY"))
                            .build();
  auto patterns = provider.extract_patterns(script);
  REQUIRE(patterns.size() == 2);
  CHECK(patterns[0] == "INT. LAB - NIGHT Machines hum.");
  CHECK(patterns[1] == "EXT. PARK - DAY");
  CHECK(provider.extract_patterns(ParsedScript{}).empty());
}

TEST_CASE("local chat stub returns a canned script that validates") {
  LocalChatProvider chat;
  std::string script = chat.complete("sys", "user");
  CHECK(script == chat.complete("sys", "other user"));  // canned
  ParseResult parsed = parse(script);
  CHECK(parsed.diagnostics.mode_used == SourceMode::structured);
  CHECK(parsed.script.scenes.size() == 2);
  CHECK(!parsed.script.dialogues_ordered.empty());
}
