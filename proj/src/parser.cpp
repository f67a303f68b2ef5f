#include "cml/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace cml {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// One <...> marker. [begin, end) spans the whole marker in the source text.
struct TagToken {
  std::string name;  // lowercased
  bool closing = false;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Finds the next thing that looks like a tag marker at or after `from`.
// Attributes between the name and '>' are ignored. A '<' that does not
// open a well-formed marker is literal text.
std::optional<TagToken> next_tag(std::string_view text, std::size_t from) {
  while (true) {
    std::size_t lt = text.find('<', from);
    if (lt == std::string_view::npos) return std::nullopt;
    std::size_t pos = lt + 1;
    bool closing = false;
    if (pos < text.size() && text[pos] == '/') {
      closing = true;
      ++pos;
    }
    if (pos < text.size() && is_name_start(text[pos])) {
      std::size_t name_begin = pos;
      while (pos < text.size() && is_name_char(text[pos])) ++pos;
      std::size_t gt = text.find('>', pos);
      if (gt != std::string_view::npos) {
        TagToken tok;
        tok.closing = closing;
        tok.begin = lt;
        tok.end = gt + 1;
        tok.name.reserve(pos - name_begin);
        for (std::size_t i = name_begin; i < pos; ++i) tok.name.push_back(lower(text[i]));
        return tok;
      }
    }
    from = lt + 1;
  }
}

bool is_recognized(const std::string& name) {
  for (const char* tag : kRecognizedTags)
    if (name == tag) return true;
  return false;
}

// Removes every tag marker from a content slice, keeping the inner text.
std::string strip_markers(std::string_view content) {
  std::string out;
  out.reserve(content.size());
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto tok = next_tag(content, pos);
    if (!tok) {
      out.append(content.substr(pos));
      break;
    }
    out.append(content.substr(pos, tok->begin - pos));
    pos = tok->end;
  }
  return std::string(trim(out));
}

int line_of(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(
                 std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// --- preprocess steps -------------------------------------------------------

std::string strip_fences(const std::string& s) {
  std::string_view v = trim(s);
  if (v.substr(0, 3) == "```") {
    std::size_t eol = v.find('\n');
    if (eol != std::string_view::npos) {
      v = v.substr(eol + 1);
    } else if (v.size() > 6 && v.substr(v.size() - 3) == "```") {
      v = v.substr(3, v.size() - 6);  // one-line fenced blob
    }
  }
  v = trim(v);
  if (v.size() >= 3 && v.substr(v.size() - 3) == "```") {
    std::size_t line_start = v.rfind('\n', v.size() - 3);
    std::string_view last = (line_start == std::string_view::npos) ? v : v.substr(line_start + 1);
    if (trim(last) == "```")
      v = (line_start == std::string_view::npos) ? std::string_view{} : v.substr(0, line_start);
  }
  return std::string(trim(v));
}

std::string strip_script_wrapper(const std::string& s) {
  std::string_view v = trim(s);
  auto open = next_tag(v, 0);
  if (!open || open->closing || open->name != "script" || open->begin != 0) return std::string(v);
  std::size_t close_lt = v.rfind('<');
  if (close_lt == std::string_view::npos || close_lt < open->end) return std::string(v);
  auto close = next_tag(v, close_lt);
  if (!close || !close->closing || close->name != "script" || close->end != v.size())
    return std::string(v);
  return std::string(trim(v.substr(open->end, close->begin - open->end)));
}

std::string unescape_entities(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, char>, 5> kEntities{{
      {"&amp;", '&'},
      {"&lt;", '<'},
      {"&gt;", '>'},
      {"&quot;", '"'},
      {"&#39;", '\''},
  }};
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (s[pos] == '&') {
      bool matched = false;
      for (const auto& [entity, ch] : kEntities) {
        if (s.compare(pos, entity.size(), entity) == 0) {
          out.push_back(ch);
          pos += entity.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out.push_back(s[pos++]);
  }
  return out;
}

std::string preprocess_once(std::string s) {
  s = std::string(trim(s));
  s = strip_fences(s);
  s = strip_script_wrapper(s);
  s = unescape_entities(s);
  return std::string(trim(s));
}

// --- structured parsing -----------------------------------------------------

struct SceneSpan {
  std::size_t begin = 0;  // content span, relative to the cleaned text
  std::size_t end = 0;
};

class StructuredParser {
 public:
  explicit StructuredParser(std::string_view text) : text_(text) {
    result_.diagnostics.mode_used = SourceMode::structured;
    result_.script.source_mode = SourceMode::structured;
  }

  ParseResult run() {
    if (trim(text_).empty()) {
      warn("empty-input", "input is empty after preprocessing", std::nullopt);
      return std::move(result_);
    }
    auto spans = scene_spans();
    if (spans.empty()) {
      // No <scene> tags: the whole input is one scene/action block.
      if (has_structured_tags(text_)) {
        parse_scene({0, text_.size()});
      } else {
        warn("no-recognized-tags", "no recognized tags in input", std::nullopt);
      }
    } else {
      for (const auto& span : spans) parse_scene(span);
    }
    rebuild_dialogue_views(result_.script);
    return std::move(result_);
  }

 private:
  void warn(std::string code, std::string message, std::optional<int> line) {
    result_.diagnostics.warnings.push_back({std::move(code), std::move(message), line});
  }

  // Top-level scan: collects <scene> content spans and flags recognized
  // elements that sit outside every scene.
  std::vector<SceneSpan> scene_spans() {
    std::vector<SceneSpan> spans;
    std::vector<std::size_t> stray_elements;
    std::size_t pos = 0;
    while (auto tok = next_tag(text_, pos)) {
      if (!tok->closing && tok->name == "scene") {
        std::size_t content_begin = tok->end;
        std::size_t content_end = text_.size();
        std::size_t resume = text_.size();
        std::size_t scan = content_begin;
        bool closed = false;
        while (auto inner = next_tag(text_, scan)) {
          if (inner->closing && inner->name == "scene") {
            content_end = inner->begin;
            resume = inner->end;
            closed = true;
            break;
          }
          scan = inner->end;
        }
        if (!closed)
          warn("unclosed-tag", "<scene> has no closing tag; content taken to end of input",
               line_of(text_, tok->begin));
        spans.push_back({content_begin, content_end});
        pos = resume;
        continue;
      }
      if (!tok->closing && is_recognized(tok->name)) stray_elements.push_back(tok->begin);
      pos = tok->end;
    }
    if (!spans.empty() && !stray_elements.empty()) {
      warn("content-outside-scene", "elements outside <scene> tags are ignored",
           line_of(text_, stray_elements.front()));
      result_.diagnostics.rejected_blocks += static_cast<int>(stray_elements.size());
    }
    return spans;
  }

  void parse_scene(SceneSpan span) {
    Scene scene;
    scene.index = static_cast<int>(result_.script.scenes.size());
    result_.script.scenes.push_back(std::move(scene));
    Scene& current = result_.script.scenes.back();

    std::string speaker;             // most recent <character> in this scene
    bool awaiting_dialogue = false;  // cue seen, its dialogue not yet
    std::vector<std::string> pending_parens;

    std::size_t pos = span.begin;
    while (pos < span.end) {
      auto tok = next_tag(text_, pos);
      if (!tok || tok->begin >= span.end) break;
      if (tok->closing) {  // stray close marker
        pos = tok->end;
        continue;
      }
      if (tok->name == "scene") {
        if (unknown_warned_.insert(tok->name).second)
          warn("nested-scene", "<scene> inside a scene ignored", line_of(text_, tok->begin));
        pos = tok->end;
        continue;
      }
      if (!is_recognized(tok->name)) {
        if (unknown_warned_.insert(tok->name).second)
          warn("unknown-tag", "unrecognized tag <" + tok->name + "> stripped",
               line_of(text_, tok->begin));
        pos = tok->end;
        continue;
      }

      // locate the matching close; content runs to scene end when unclosed
      std::size_t content_begin = tok->end;
      std::size_t content_end = span.end;
      std::size_t next_pos = span.end;
      std::size_t scan = content_begin;
      bool closed = false;
      while (auto inner = next_tag(text_, scan)) {
        if (inner->begin >= span.end) break;
        if (inner->closing && inner->name == tok->name) {
          content_end = inner->begin;
          next_pos = inner->end;
          closed = true;
          break;
        }
        scan = inner->end;
      }
      if (!closed)
        warn("unclosed-tag", "<" + tok->name + "> has no closing tag; content taken to scene end",
             line_of(text_, tok->begin));

      std::string content = strip_markers(text_.substr(content_begin, content_end - content_begin));
      handle_element(current, tok->name, std::move(content), tok->begin, speaker,
                     awaiting_dialogue, pending_parens);
      pos = next_pos;
    }
    settle_pending(current, std::move(pending_parens));
  }

  void handle_element(Scene& scene, const std::string& name, std::string content, std::size_t at,
                      std::string& speaker, bool& awaiting_dialogue,
                      std::vector<std::string>& pending_parens) {
    if (name == "stage_direction") {
      if (content.empty()) return;
      if (!scene.heading)
        scene.heading = content;
      else
        scene.descriptions.push_back(content);
      result_.script.actions.push_back(std::move(content));
    } else if (name == "scene_description") {
      if (content.empty()) return;
      scene.descriptions.push_back(content);
      result_.script.actions.push_back(std::move(content));
    } else if (name == "action") {
      if (content.empty()) return;
      result_.script.actions.push_back(std::move(content));
    } else if (name == "character") {
      std::string normalized = normalize_character_name(content);
      if (normalized.empty()) {
        warn("empty-character", "character cue with empty name dropped", line_of(text_, at));
        ++result_.diagnostics.rejected_blocks;
        return;
      }
      if (!pending_parens.empty()) {
        settle_pending(scene, std::move(pending_parens));
        pending_parens.clear();
      }
      speaker = std::move(normalized);
      awaiting_dialogue = true;
    } else if (name == "parenthetical") {
      if (content.empty()) return;
      if (awaiting_dialogue) {
        pending_parens.push_back(std::move(content));
      } else if (!scene.turns.empty()) {
        scene.turns.back().parentheticals.push_back(std::move(content));
      } else {
        warn("orphan-parenthetical", "parenthetical with no dialogue to attach to",
             line_of(text_, at));
        ++result_.diagnostics.rejected_blocks;
      }
    } else if (name == "dialogue") {
      if (content.empty()) {
        warn("empty-dialogue", "dialogue with empty line dropped", line_of(text_, at));
        ++result_.diagnostics.rejected_blocks;
        return;
      }
      if (speaker.empty()) {
        warn("orphan-dialogue", "dialogue with no preceding character cue dropped",
             line_of(text_, at));
        ++result_.diagnostics.rejected_blocks;
        return;
      }
      DialogueTurn turn;
      turn.character = speaker;
      turn.line = std::move(content);
      turn.parentheticals = std::move(pending_parens);
      pending_parens.clear();
      turn.scene_index = scene.index;
      scene.turns.push_back(std::move(turn));
      awaiting_dialogue = false;
    }
  }

  // Dangling parentheticals (cue changed or scene ended before a dialogue)
  // attach backward to the scene's last turn when one exists.
  void settle_pending(Scene& scene, std::vector<std::string> pending) {
    if (pending.empty()) return;
    if (!scene.turns.empty()) {
      for (auto& p : pending) scene.turns.back().parentheticals.push_back(std::move(p));
    } else {
      warn("orphan-parenthetical", "parenthetical with no dialogue to attach to", std::nullopt);
      ++result_.diagnostics.rejected_blocks;
    }
  }

  std::string_view text_;
  ParseResult result_;
  std::set<std::string> unknown_warned_;
};

// --- fallback parsing -------------------------------------------------------

bool is_blank(std::string_view line) { return trim(line).empty(); }

bool is_slugline(std::string_view line) {
  std::string_view t = trim(line);
  return t.substr(0, 4) == "INT." || t.substr(0, 4) == "EXT.";
}

// "NAME: text" where NAME is 1-40 chars with no lowercase letters.
std::optional<DialogueTurn> match_cue(std::string_view line) {
  std::size_t colon = line.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string_view name = trim(line.substr(0, colon));
  if (name.empty() || name.size() > 40) return std::nullopt;
  if (std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::islower(c); }))
    return std::nullopt;
  std::string_view rest = trim(line.substr(colon + 1));
  if (rest.empty()) return std::nullopt;
  std::string normalized = normalize_character_name(name);
  if (normalized.empty()) return std::nullopt;
  DialogueTurn turn;
  turn.character = std::move(normalized);
  turn.line = std::string(rest);
  return turn;
}

struct Segment {
  std::optional<std::string> heading;
  std::vector<std::string_view> lines;
  bool has_content() const { return heading.has_value() || !lines.empty(); }
};

}  // namespace

bool ParseDiagnostics::has_warning(std::string_view code) const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [&](const ParseWarning& w) { return w.code == code; });
}

std::string preprocess(std::string_view raw) {
  std::string current(raw);
  // every rewriting step strictly shrinks the string, so this terminates
  while (true) {
    std::string next = preprocess_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

bool has_structured_tags(std::string_view cleaned) {
  std::size_t pos = 0;
  while (auto tok = next_tag(cleaned, pos)) {
    if (is_recognized(tok->name)) return true;
    pos = tok->end;
  }
  return false;
}

ParseResult parse_structured(std::string_view cleaned) { return StructuredParser(cleaned).run(); }

ParseResult parse_fallback(std::string_view cleaned) {
  ParseResult result;
  result.diagnostics.mode_used = SourceMode::fallback;
  result.script.source_mode = SourceMode::fallback;
  result.diagnostics.warnings.push_back(
      {"no-structured-tags", "no recognized tags; plain-text rules applied", std::nullopt});
  if (trim(cleaned).empty()) {
    result.diagnostics.warnings.push_back({"empty-input", "input is empty", std::nullopt});
    return result;
  }

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    std::size_t eol = cleaned.find('\n', start);
    if (eol == std::string_view::npos) {
      lines.push_back(cleaned.substr(start));
      break;
    }
    lines.push_back(cleaned.substr(start, eol - start));
    start = eol + 1;
  }

  std::vector<Segment> segments(1);
  int blank_run = 0;
  for (std::string_view line : lines) {
    if (is_blank(line)) {
      if (++blank_run == 2 && segments.back().has_content()) segments.emplace_back();
      continue;
    }
    blank_run = 0;
    if (is_slugline(line)) {
      if (segments.back().has_content()) segments.emplace_back();
      segments.back().heading = std::string(trim(line));
      continue;
    }
    segments.back().lines.push_back(line);
  }

  for (Segment& segment : segments) {
    if (!segment.has_content()) continue;
    Scene scene;
    scene.index = static_cast<int>(result.script.scenes.size());
    scene.heading = std::move(segment.heading);
    std::string action_block;
    for (std::string_view line : segment.lines) {
      if (auto turn = match_cue(line)) {
        turn->scene_index = scene.index;
        scene.turns.push_back(std::move(*turn));
      } else {
        if (!action_block.empty()) action_block.push_back('\n');
        action_block.append(trim(line));
      }
    }
    if (!action_block.empty()) result.script.actions.push_back(std::move(action_block));
    result.script.scenes.push_back(std::move(scene));
  }
  rebuild_dialogue_views(result.script);
  return result;
}

ParseResult parse(std::string_view raw) {
  std::string cleaned = preprocess(raw);
  if (has_structured_tags(cleaned)) return parse_structured(cleaned);
  return parse_fallback(cleaned);
}

}  // namespace cml
