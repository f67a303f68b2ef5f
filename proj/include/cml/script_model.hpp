#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cml {

/// One character cue plus its spoken line.
struct DialogueTurn {
  std::string character;  // normalized: trimmed, uppercased, whitespace collapsed
  std::string line;
  std::vector<std::string> parentheticals;
  int scene_index = 0;

  bool operator==(const DialogueTurn&) const = default;
};

struct Scene {
  std::optional<std::string> heading;  // slugline, e.g. "INT. COFFEE SHOP - DAY"
  std::vector<std::string> descriptions;
  std::vector<DialogueTurn> turns;
  int index = 0;

  bool operator==(const Scene&) const = default;
};

enum class SourceMode { structured, fallback };

const char* to_string(SourceMode mode);

/// Structured view of a script. All containers preserve source order;
/// dialogues_by_character holds exactly the turns of dialogues_ordered,
/// grouped under the normalized character name.
struct ParsedScript {
  std::vector<Scene> scenes;
  std::vector<DialogueTurn> dialogues_ordered;
  std::map<std::string, std::vector<DialogueTurn>> dialogues_by_character;
  std::vector<std::string> actions;  // action + scene_description + stage_direction blocks
  SourceMode source_mode = SourceMode::structured;

  bool empty() const { return scenes.empty() && dialogues_ordered.empty() && actions.empty(); }
  bool operator==(const ParsedScript&) const = default;
};

/// Incremental assembly of a ParsedScript that keeps the redundant views
/// (ordered list, per-character grouping, action pool) consistent.
class ScriptBuilder {
 public:
  ScriptBuilder& begin_scene(std::optional<std::string> heading = std::nullopt);
  ScriptBuilder& add_description(std::string text);   // joins scene descriptions and the action pool
  ScriptBuilder& add_action(std::string text);        // action pool only
  ScriptBuilder& add_turn(std::string_view character, std::string line,
                          std::vector<std::string> parentheticals = {});
  ParsedScript build(SourceMode mode = SourceMode::structured) &&;

 private:
  ParsedScript script_;
};

/// One dataset tuple: (movie_name, imdb_id, content, summary).
struct CorpusEntry {
  std::string movie_name;
  std::string imdb_id;  // "tt" followed by digits
  std::string content;
  std::string summary;

  bool operator==(const CorpusEntry&) const = default;
};

/// Validates the CorpusEntry invariants; returns an error message or empty.
std::string validate_entry(const CorpusEntry& entry);

/// Rebuilds dialogues_ordered and dialogues_by_character from the scenes,
/// which are the single source of truth for turns.
void rebuild_dialogue_views(ParsedScript& script);

/// The nine metric values for one script. All values are in [0, 1];
/// a metric whose input count fell below its minimum is exactly 0.
struct ScoreReport {
  double dc1 = 0, dc2 = 0, dc3 = 0;
  double cc1 = 0, cc2 = 0, cc3 = 0;
  double pr1 = 0, pr2 = 0, pr3 = 0;
  std::map<std::string, std::size_t> counts;
  std::string provider_id;
  std::string script_id;

  std::vector<double> values() const { return {dc1, dc2, dc3, cc1, cc2, cc3, pr1, pr2, pr3}; }
};

/// Fixed column order used by every table/JSON export.
inline constexpr const char* kMetricNames[9] = {"dc1", "dc2", "dc3", "cc1", "cc2",
                                                "cc3", "pr1", "pr2", "pr3"};

/// Number of maximal whitespace-separated units in `text`.
std::size_t count_tokens(std::string_view text);

/// Trims, uppercases (ASCII) and collapses internal whitespace runs to one
/// space. Whitespace-only input yields "" (callers treat that as a reject).
std::string normalize_character_name(std::string_view raw);

}  // namespace cml
