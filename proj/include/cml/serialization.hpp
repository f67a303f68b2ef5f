#pragma once

#include "json.hpp"

#include "cml/corpus.hpp"
#include "cml/instruction.hpp"
#include "cml/parser.hpp"
#include "cml/script_model.hpp"

namespace cml {

// nlohmann ADL hooks for the external JSON/JSONL interfaces.

void to_json(nlohmann::json& j, const DialogueTurn& turn);
void from_json(const nlohmann::json& j, DialogueTurn& turn);

void to_json(nlohmann::json& j, const Scene& scene);
void from_json(const nlohmann::json& j, Scene& scene);

void to_json(nlohmann::json& j, const ParsedScript& script);
void from_json(const nlohmann::json& j, ParsedScript& script);

void to_json(nlohmann::json& j, const ParseWarning& warning);
void to_json(nlohmann::json& j, const ParseDiagnostics& diagnostics);
void to_json(nlohmann::json& j, const ParseResult& result);

void to_json(nlohmann::json& j, const CorpusEntry& entry);
void from_json(const nlohmann::json& j, CorpusEntry& entry);

void to_json(nlohmann::json& j, const ScoreReport& report);
void from_json(const nlohmann::json& j, ScoreReport& report);

void to_json(nlohmann::json& j, const Histogram& histogram);
void to_json(nlohmann::json& j, const StatsReport& stats);

void to_json(nlohmann::json& j, const PromptBundle& bundle);

void to_json(nlohmann::json& j, const GenerationRecord& record);
void from_json(const nlohmann::json& j, GenerationRecord& record);

/// Radar-ready table JSON: fixed metric order plus one 9-value array per row.
nlohmann::json benchmark_table_json(const BenchmarkTable& table);

}  // namespace cml
