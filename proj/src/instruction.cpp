#include "cml/instruction.hpp"

#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cml/parser.hpp"

namespace cml {
namespace {

const char* kStartComponent =
    R"(You are an expert AI scriptwriter. Your task is to generate a detailed and professional movie script segment based on the provided Movie Title and Movie Summary. The script should be formatted in an XML-like structure, mirroring professional screenplay standards.

**Input:**
Movie Title: {movie_name}
Movie Summary: {summary})";

const char* kInstructionsComponent =
    R"(**Instructions for Script Generation:**

1.  **Overall Structure:**
    *   The entire script segment must be enclosed within `<script> ... </script>` tags.
    *   The script should be divided into multiple `<scene> ... </scene>` blocks.

2.  **Scene Elements (within each `<scene>`):**
    *   **Stage Direction (Scene Heading):** Start each scene with a `<stage_direction>...</stage_direction>` tag. This should specify the location (INT. or EXT.), the specific place, and the time (DAY, NIGHT, CONTINUOUS, etc.). For example: `<stage_direction>INT. POLICE STATION - DAY</stage_direction>`.
    *   **Scene Description:** Use `<scene_description>...</scene_description>` tags for detailed narrative descriptions. This includes:
        *   Setting details (visuals, atmosphere).
        *   Character actions, movements, and significant non-verbal expressions.
        *   Key sounds or visual cues.
        *   The flow of events within the scene.
    *   **Character Dialogue:**
        *   Introduce a speaking character with `<character>CHARACTER NAME</character>` tag (character names are typically in ALL CAPS).
        *   Follow with their speech in a `<dialogue>...</dialogue>` tag.
        *   If a character has brief acting notes or delivery instructions directly related to their dialogue, use a `<parenthetical>(note)</parenthetical>` tag immediately before or interspersed within their `<dialogue>` as appropriate. For example, `<parenthetical>(whispering)</parenthetical>` or `<parenthetical>(V.O.)</parenthetical>`.
    *   **Actions/Further Descriptions within Scenes:** Additional `<scene_description>` tags can be used within a scene to describe actions that occur between dialogues or to elaborate further on the ongoing scene. Ensure these descriptions are vivid and contribute to the scene's progression.

3.  **Content and Style:**
    *   The generated script segment should logically follow from the provided Movie Summary, developing key events and character interactions implied by it.
    *   Maintain consistency in character voice, behavior, and motivations throughout the segment.
    *   Ensure dialogue is natural, engaging, and serves both plot advancement and character development.
    *   Scene descriptions should be vivid, concise, and provide enough detail for visualization, focusing on what can be seen and heard.
    *   The script should be coherent, with smooth and logical transitions between descriptions, actions, and dialogues.
    *   Focus on creating a script segment that feels like a continuous and integral part of a larger, professional screenplay.
    *   The tone and style should match that of a production-ready script.)";

const char* kExampleComponent =
    R"(**Example Snippet of Expected Format:**
```xml
<script>
  <scene>
    <stage_direction>INT. COFFEE SHOP - DAY</stage_direction>
    <scene_description>The coffee shop is bustling. ANNA (30s), dressed in a sharp business suit, sips her latte, looking impatient. MARK (30s), disheveled and out of breath, rushes in.</scene_description>
    <character>MARK</character>
    <dialogue>Sorry I'm late! The traffic was insane.</dialogue>
    <character>ANNA</character>
    <parenthetical>(glancing at her watch)</parenthetical>
    <dialogue>Insane or you overslept?</dialogue>
    <scene_description>Mark pulls out a chair and slumps into it, running a hand through his messy hair. He looks exhausted.</scene_description>
    <character>MARK</character>
    <dialogue>Okay, a bit of both. But mostly insane traffic.</dialogue>
  </scene>
  <scene>
    <stage_direction>EXT. PARK - LATER</stage_direction>
    <scene_description>Sunlight dapples through the trees. Anna and Mark walk along a paved path, a little more relaxed now.</scene_description>
    <character>ANNA</character>
    <dialogue>So, about the Henderson account... We need a new strategy.</dialogue>
  </scene>
</script>
```)";

const char* kEndComponent =
    R"(Please generate the script segment based on the Movie Title and Summary provided above, adhering strictly to this XML-like format and content guidelines. Ensure the output is a single block of text starting with `<script>` and ending with `</script>`.)";

const char* kBasePrompt =
    "Write a movie script for {movie_name} based on the following summary:\n\n{summary}\n";

const char* kSystemMessage = "You are an award-winning screenwriter";

// Replaces every {placeholder} occurrence; unknown placeholders in the
// template are an error, braces inside substituted values are plain text.
std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    std::size_t close = text.find('}', open + 1);
    if (close == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    std::string name = text.substr(open + 1, close - open - 1);
    bool identifier = !name.empty() &&
                      std::all_of(name.begin(), name.end(), [](unsigned char c) {
                        return std::isalnum(c) || c == '_';
                      });
    if (!identifier) {
      out.append(text, pos, close - pos);  // literal braces, not a placeholder
      pos = close;
      continue;
    }
    auto it = values.find(name);
    if (it == values.end())
      throw std::invalid_argument("unknown placeholder {" + name + "} in prompt template");
    out.append(text, pos, open - pos);
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

std::string now_utc_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* to_string(PromptKind kind) {
  return kind == PromptKind::base ? "base" : "cml_instruction";
}

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates kDefaults{
      "1",
      kSystemMessage,
      kStartComponent,
      kInstructionsComponent,
      kExampleComponent,
      kEndComponent,
      kBasePrompt,
  };
  return kDefaults;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& json_file) {
  std::ifstream in(json_file);
  if (!in) throw std::runtime_error("cannot open prompt config: " + json_file.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  PromptTemplates templates = defaults();
  auto maybe = [&doc](const char* key, std::string& field) {
    if (doc.contains(key)) field = doc.at(key).get<std::string>();
  };
  maybe("version", templates.version);
  maybe("system_message", templates.system_message);
  maybe("prompt_start_llm", templates.prompt_start_llm);
  maybe("prompt_instructions_content", templates.prompt_instructions_content);
  maybe("prompt_example", templates.prompt_example);
  maybe("prompt_end_llm", templates.prompt_end_llm);
  maybe("base_prompt", templates.base_prompt);
  return templates;
}

PromptBundle build_cml_instruction(const std::string& movie_name, const std::string& summary,
                                   const PromptTemplates& templates) {
  if (movie_name.empty()) throw std::invalid_argument("build_cml_instruction: empty movie_name");
  if (summary.empty()) throw std::invalid_argument("build_cml_instruction: empty summary");

  PromptBundle bundle;
  bundle.kind = PromptKind::cml_instruction;
  bundle.substitutions = {{"movie_name", movie_name}, {"summary", summary}};
  bundle.component_order = {"prompt_start_llm", "prompt_instructions_content", "prompt_example",
                            "prompt_end_llm"};
  bundle.system_message = templates.system_message;

  const std::string* components[] = {&templates.prompt_start_llm,
                                     &templates.prompt_instructions_content,
                                     &templates.prompt_example, &templates.prompt_end_llm};
  for (const std::string* component : components) {
    if (!bundle.text.empty()) bundle.text += "\n\n";
    bundle.text += substitute(*component, bundle.substitutions);
  }
  return bundle;
}

PromptBundle build_base_prompt(const std::string& movie_name, const std::string& summary,
                               const PromptTemplates& templates) {
  if (movie_name.empty()) throw std::invalid_argument("build_base_prompt: empty movie_name");
  if (summary.empty()) throw std::invalid_argument("build_base_prompt: empty summary");

  PromptBundle bundle;
  bundle.kind = PromptKind::base;
  bundle.substitutions = {{"movie_name", movie_name}, {"summary", summary}};
  bundle.component_order = {"base_prompt"};
  bundle.system_message = templates.system_message;
  bundle.text = substitute(templates.base_prompt, bundle.substitutions);
  return bundle;
}

ValidationResult validate_output(std::string_view raw) {
  ValidationResult result;

  // wrapper check happens before preprocessing would strip the markers
  std::string cleaned(raw);
  {
    // peel code fences only; entity unescaping must not run before the check
    std::string_view v = cleaned;
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
      return s;
    };
    v = trim(v);
    if (v.substr(0, 3) == "```") {
      std::size_t eol = v.find('\n');
      v = (eol == std::string_view::npos) ? std::string_view{} : v.substr(eol + 1);
      v = trim(v);
    }
    if (v.size() >= 3 && v.substr(v.size() - 3) == "```") {
      std::size_t line_start = v.rfind('\n', v.size() - 3);
      std::string_view last = (line_start == std::string_view::npos) ? v : v.substr(line_start + 1);
      if (trim(last) == "```") {
        v = (line_start == std::string_view::npos) ? std::string_view{} : v.substr(0, line_start);
        v = trim(v);
      }
    }
    cleaned.assign(v);
  }

  auto lowered = cleaned;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  bool starts = lowered.rfind("<script", 0) == 0 && lowered.size() > 7 &&
                (lowered[7] == '>' || lowered[7] == '/' ||
                 std::isspace(static_cast<unsigned char>(lowered[7]))) &&
                lowered.find('>') != std::string::npos &&
                lowered.find('>') < lowered.find('<', 1);
  bool ends = lowered.size() >= 9 && lowered.rfind("</script") != std::string::npos &&
              lowered.compare(lowered.size() - 9, 9, "</script>") == 0;
  if (!starts || !ends) result.issues.push_back("missing-script-wrapper");

  ParseResult parsed = parse(raw);
  if (parsed.diagnostics.mode_used != SourceMode::structured)
    result.issues.push_back("not-structured");
  if (parsed.script.scenes.empty()) result.issues.push_back("no-scene");
  if (parsed.script.dialogues_ordered.empty()) result.issues.push_back("no-dialogue");

  result.valid = result.issues.empty();
  return result;
}

GenerationRecord generate(const CorpusEntry& entry, PromptKind kind, ChatProvider& chat,
                          const PromptTemplates& templates) {
  GenerationRecord record;
  record.movie_name = entry.movie_name;
  record.imdb_id = entry.imdb_id;
  record.model_name = chat.model_name();
  record.prompt = kind == PromptKind::base
                      ? build_base_prompt(entry.movie_name, entry.summary, templates)
                      : build_cml_instruction(entry.movie_name, entry.summary, templates);
  record.timestamp = now_utc_iso8601();
  try {
    record.raw_output = chat.complete(record.prompt.system_message, record.prompt.text);
  } catch (const std::exception& e) {
    record.validated = false;
    record.issues.push_back(std::string("transport: ") + e.what());
    return record;
  }
  ValidationResult validation = validate_output(record.raw_output);
  record.validated = validation.valid;
  record.issues = std::move(validation.issues);
  return record;
}

}  // namespace cml
