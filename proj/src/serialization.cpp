#include "cml/serialization.hpp"

namespace cml {

void to_json(nlohmann::json& j, const DialogueTurn& turn) {
  j = {{"character", turn.character},
       {"line", turn.line},
       {"parentheticals", turn.parentheticals},
       {"scene_index", turn.scene_index}};
}

void from_json(const nlohmann::json& j, DialogueTurn& turn) {
  j.at("character").get_to(turn.character);
  j.at("line").get_to(turn.line);
  turn.parentheticals = j.value("parentheticals", std::vector<std::string>{});
  turn.scene_index = j.value("scene_index", 0);
}

void to_json(nlohmann::json& j, const Scene& scene) {
  j = nlohmann::json{{"descriptions", scene.descriptions},
                     {"turns", scene.turns},
                     {"index", scene.index}};
  if (scene.heading)
    j["heading"] = *scene.heading;
  else
    j["heading"] = nullptr;
}

void from_json(const nlohmann::json& j, Scene& scene) {
  if (j.contains("heading") && !j["heading"].is_null())
    scene.heading = j["heading"].get<std::string>();
  else
    scene.heading.reset();
  scene.descriptions = j.value("descriptions", std::vector<std::string>{});
  scene.turns = j.value("turns", std::vector<DialogueTurn>{});
  scene.index = j.value("index", 0);
}

void to_json(nlohmann::json& j, const ParsedScript& script) {
  j = {{"scenes", script.scenes},
       {"dialogues_ordered", script.dialogues_ordered},
       {"dialogues_by_character", script.dialogues_by_character},
       {"actions", script.actions},
       {"source_mode", to_string(script.source_mode)}};
}

void from_json(const nlohmann::json& j, ParsedScript& script) {
  script.scenes = j.value("scenes", std::vector<Scene>{});
  script.actions = j.value("actions", std::vector<std::string>{});
  script.source_mode =
      j.value("source_mode", std::string("structured")) == "fallback" ? SourceMode::fallback
                                                                       : SourceMode::structured;
  rebuild_dialogue_views(script);
}

void to_json(nlohmann::json& j, const ParseWarning& warning) {
  j = {{"code", warning.code}, {"message", warning.message}};
  if (warning.line)
    j["line"] = *warning.line;
  else
    j["line"] = nullptr;
}

void to_json(nlohmann::json& j, const ParseDiagnostics& diagnostics) {
  j = {{"mode_used", to_string(diagnostics.mode_used)},
       {"warnings", diagnostics.warnings},
       {"rejected_blocks", diagnostics.rejected_blocks}};
}

void to_json(nlohmann::json& j, const ParseResult& result) {
  j = {{"script", result.script}, {"diagnostics", result.diagnostics}};
}

void to_json(nlohmann::json& j, const CorpusEntry& entry) {
  j = {{"movie_name", entry.movie_name},
       {"imdb_id", entry.imdb_id},
       {"content", entry.content},
       {"summary", entry.summary}};
}

void from_json(const nlohmann::json& j, CorpusEntry& entry) {
  j.at("movie_name").get_to(entry.movie_name);
  j.at("imdb_id").get_to(entry.imdb_id);
  j.at("content").get_to(entry.content);
  j.at("summary").get_to(entry.summary);
}

void to_json(nlohmann::json& j, const ScoreReport& report) {
  j = {{"dc1", report.dc1}, {"dc2", report.dc2}, {"dc3", report.dc3}, {"cc1", report.cc1},
       {"cc2", report.cc2}, {"cc3", report.cc3}, {"pr1", report.pr1}, {"pr2", report.pr2},
       {"pr3", report.pr3}, {"counts", report.counts}, {"provider_id", report.provider_id},
       {"script_id", report.script_id}};
}

void from_json(const nlohmann::json& j, ScoreReport& report) {
  report.dc1 = j.value("dc1", 0.0);
  report.dc2 = j.value("dc2", 0.0);
  report.dc3 = j.value("dc3", 0.0);
  report.cc1 = j.value("cc1", 0.0);
  report.cc2 = j.value("cc2", 0.0);
  report.cc3 = j.value("cc3", 0.0);
  report.pr1 = j.value("pr1", 0.0);
  report.pr2 = j.value("pr2", 0.0);
  report.pr3 = j.value("pr3", 0.0);
  report.counts = j.value("counts", std::map<std::string, std::size_t>{});
  report.provider_id = j.value("provider_id", std::string{});
  report.script_id = j.value("script_id", std::string{});
}

void to_json(nlohmann::json& j, const Histogram& histogram) {
  // JSON object keys must be strings; counts are small so this stays readable
  j = nlohmann::json::object();
  for (const auto& [value, scripts] : histogram.buckets) j[std::to_string(value)] = scripts;
}

void to_json(nlohmann::json& j, const StatsReport& stats) {
  j = {{"entry_count", stats.entry_count},
       {"total_tokens_content", stats.total_tokens_content},
       {"total_tokens_summary", stats.total_tokens_summary},
       {"mean_tokens_content", stats.mean_tokens_content},
       {"mean_tokens_summary", stats.mean_tokens_summary},
       {"tag_histograms", stats.tag_histograms}};
}

void to_json(nlohmann::json& j, const PromptBundle& bundle) {
  j = {{"kind", to_string(bundle.kind)},
       {"text", bundle.text},
       {"substitutions", bundle.substitutions},
       {"component_order", bundle.component_order},
       {"system_message", bundle.system_message}};
}

void to_json(nlohmann::json& j, const GenerationRecord& record) {
  j = {{"movie_name", record.movie_name},
       {"imdb_id", record.imdb_id},
       {"kind", to_string(record.prompt.kind)},
       {"model_name", record.model_name},
       {"raw_output", record.raw_output},
       {"validated", record.validated},
       {"issues", record.issues},
       {"timestamp", record.timestamp}};
}

void from_json(const nlohmann::json& j, GenerationRecord& record) {
  record.movie_name = j.value("movie_name", std::string{});
  record.imdb_id = j.value("imdb_id", std::string{});
  record.prompt.kind =
      j.value("kind", std::string("base")) == "cml_instruction" ? PromptKind::cml_instruction
                                                                 : PromptKind::base;
  record.model_name = j.value("model_name", std::string{});
  record.raw_output = j.value("raw_output", std::string{});
  record.validated = j.value("validated", false);
  record.issues = j.value("issues", std::vector<std::string>{});
  record.timestamp = j.value("timestamp", std::string{});
}

nlohmann::json benchmark_table_json(const BenchmarkTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  auto row_json = [](const BenchmarkRow& row) {
    return nlohmann::json{{"source_id", row.source_id},
                          {"values", row.metrics},
                          {"dc", row.dc},
                          {"cc", row.cc},
                          {"pr", row.pr},
                          {"report_count", row.report_count}};
  };
  for (const BenchmarkRow& row : table.rows) rows.push_back(row_json(row));
  return {{"metric_order", kMetricNames}, {"rows", rows}, {"means", row_json(table.means)}};
}

}  // namespace cml
