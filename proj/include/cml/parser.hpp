#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cml/script_model.hpp"

namespace cml {

struct ParseWarning {
  std::string code;
  std::string message;
  std::optional<int> line;  // 1-based, in the cleaned text
};

struct ParseDiagnostics {
  SourceMode mode_used = SourceMode::structured;
  std::vector<ParseWarning> warnings;
  int rejected_blocks = 0;

  bool has_warning(std::string_view code) const;
};

struct ParseResult {
  ParsedScript script;
  ParseDiagnostics diagnostics;
};

/// The CML tag vocabulary. Matching is case-insensitive and tolerates
/// attributes inside the markers.
inline constexpr const char* kRecognizedTags[] = {
    "scene",     "stage_direction", "scene_description", "parenthetical",
    "character", "dialogue",        "action"};

/// Cleans common generation wrappers: outer whitespace, leading/trailing
/// code fences (``` with optional label), one enclosing <script>...</script>
/// marker pair, and the HTML entities &amp; &lt; &gt; &quot; &#39;.
/// Runs to a fixpoint, so preprocess(preprocess(x)) == preprocess(x).
std::string preprocess(std::string_view raw);

/// True when the cleaned text contains at least one recognized tag marker.
bool has_structured_tags(std::string_view cleaned);

/// Markup parser over explicit CML tags. Expects preprocessed input.
ParseResult parse_structured(std::string_view cleaned);

/// Plain-text parser: scenes split on runs of >=2 empty lines or INT./EXT.
/// lines, dialogue recovered from "NAME: text" cue lines. Expects
/// preprocessed input. Never fails on text input.
ParseResult parse_fallback(std::string_view cleaned);

/// Two-stage entry point: preprocess, then structured parsing when any
/// recognized tag is present, plain-text fallback otherwise.
ParseResult parse(std::string_view raw);

}  // namespace cml
