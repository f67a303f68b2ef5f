#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cml/providers.hpp"
#include "cml/script_model.hpp"

namespace cml {

enum class PromptKind { base, cml_instruction };

const char* to_string(PromptKind kind);

/// Assembled prompt text plus the substitution record.
struct PromptBundle {
  PromptKind kind = PromptKind::base;
  std::string text;
  std::map<std::string, std::string> substitutions;
  std::vector<std::string> component_order;
  std::string system_message;
};

/// The prompt component texts. Shipped as embedded defaults; any field can be
/// overridden from a JSON config file so prompt evolution needs no rebuild.
struct PromptTemplates {
  std::string version;
  std::string system_message;
  std::string prompt_start_llm;
  std::string prompt_instructions_content;
  std::string prompt_example;
  std::string prompt_end_llm;
  std::string base_prompt;

  static const PromptTemplates& defaults();

  /// Defaults overlaid with the fields present in `json_file`.
  static PromptTemplates load(const std::filesystem::path& json_file);
};

/// Concatenates the four instruction components with {movie_name} and
/// {summary} substituted. Pure: identical inputs yield byte-identical text.
PromptBundle build_cml_instruction(const std::string& movie_name, const std::string& summary,
                                   const PromptTemplates& templates = PromptTemplates::defaults());

/// Single-component minimal prompt for the uninstructed baseline setting.
PromptBundle build_base_prompt(const std::string& movie_name, const std::string& summary,
                               const PromptTemplates& templates = PromptTemplates::defaults());

struct ValidationResult {
  bool valid = false;
  std::vector<std::string> issues;
};

/// A generation is valid when (after fence stripping) it is wrapped in
/// <script>...</script> markers and structured parsing recovers at least one
/// scene and one dialogue turn.
ValidationResult validate_output(std::string_view raw);

struct GenerationRecord {
  std::string movie_name;
  std::string imdb_id;
  PromptBundle prompt;
  std::string raw_output;
  bool validated = false;
  std::vector<std::string> issues;
  std::string model_name;
  std::string timestamp;  // ISO-8601 UTC
};

/// Builds the prompt of the requested kind, sends one chat request, and
/// stores the raw output with its validation verdict. Transport errors land
/// in `issues` with validated = false.
GenerationRecord generate(const CorpusEntry& entry, PromptKind kind, ChatProvider& chat,
                          const PromptTemplates& templates = PromptTemplates::defaults());

}  // namespace cml
