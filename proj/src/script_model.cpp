#include "cml/script_model.hpp"

#include <cctype>

namespace cml {

const char* to_string(SourceMode mode) {
  return mode == SourceMode::structured ? "structured" : "fallback";
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::string normalize_character_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::toupper(c)));
  }
  return out;
}

std::string validate_entry(const CorpusEntry& entry) {
  if (entry.imdb_id.size() < 3 || entry.imdb_id.compare(0, 2, "tt") != 0)
    return "imdb_id must match tt<digits>, got \"" + entry.imdb_id + "\"";
  for (std::size_t i = 2; i < entry.imdb_id.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(entry.imdb_id[i])))
      return "imdb_id must match tt<digits>, got \"" + entry.imdb_id + "\"";
  if (count_tokens(entry.content) == 0) return "content is empty";
  if (count_tokens(entry.summary) == 0) return "summary is empty";
  return {};
}

void rebuild_dialogue_views(ParsedScript& script) {
  script.dialogues_ordered.clear();
  script.dialogues_by_character.clear();
  for (const Scene& scene : script.scenes) {
    for (const DialogueTurn& turn : scene.turns) {
      script.dialogues_ordered.push_back(turn);
      script.dialogues_by_character[turn.character].push_back(turn);
    }
  }
}

ScriptBuilder& ScriptBuilder::begin_scene(std::optional<std::string> heading) {
  Scene scene;
  scene.heading = std::move(heading);
  scene.index = static_cast<int>(script_.scenes.size());
  if (scene.heading) script_.actions.push_back(*scene.heading);
  script_.scenes.push_back(std::move(scene));
  return *this;
}

ScriptBuilder& ScriptBuilder::add_description(std::string text) {
  if (script_.scenes.empty()) begin_scene();
  script_.actions.push_back(text);
  script_.scenes.back().descriptions.push_back(std::move(text));
  return *this;
}

ScriptBuilder& ScriptBuilder::add_action(std::string text) {
  script_.actions.push_back(std::move(text));
  return *this;
}

ScriptBuilder& ScriptBuilder::add_turn(std::string_view character, std::string line,
                                       std::vector<std::string> parentheticals) {
  if (script_.scenes.empty()) begin_scene();
  DialogueTurn turn;
  turn.character = normalize_character_name(character);
  turn.line = std::move(line);
  turn.parentheticals = std::move(parentheticals);
  turn.scene_index = script_.scenes.back().index;
  script_.scenes.back().turns.push_back(turn);
  script_.dialogues_by_character[turn.character].push_back(turn);
  script_.dialogues_ordered.push_back(std::move(turn));
  return *this;
}

ParsedScript ScriptBuilder::build(SourceMode mode) && {
  script_.source_mode = mode;
  return std::move(script_);
}

}  // namespace cml
