#include "cml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cml {
namespace {

double clamp01(double v, const MetricConfig& config) {
  return config.clamp_output ? std::clamp(v, 0.0, 1.0) : v;
}

double mean_adjacent_cosine(std::span<const EmbeddingVector> embeddings) {
  double sum = 0;
  for (std::size_t i = 0; i + 1 < embeddings.size(); ++i)
    sum += cosine(embeddings[i], embeddings[i + 1]);
  return sum / static_cast<double>(embeddings.size() - 1);
}

double mean_pairwise_cosine(std::span<const EmbeddingVector> embeddings) {
  const std::size_t n = embeddings.size();
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += cosine(embeddings[i], embeddings[j]);
  return sum * 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

EmbeddingVector normalized(const EmbeddingVector& v) {
  EmbeddingVector out = v;
  double n = out.norm();
  if (n > 0)
    for (double& x : out.values) x /= n;
  return out;
}

}  // namespace

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(a.dimension()) +
                                " vs " + std::to_string(b.dimension()) + ")");
  double dot = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

double dc1(std::span<const EmbeddingVector> turn_embeddings, const MetricConfig& config) {
  if (turn_embeddings.size() < config.min_turns_dc1) return 0.0;
  return clamp01(mean_adjacent_cosine(turn_embeddings), config);
}

double dc2(const std::vector<std::vector<std::string>>& keyword_sets) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& set : keyword_sets) {
    for (const auto& word : set) {
      ++counts[word];
      ++total;
    }
  }
  if (total == 0) return 0.0;
  if (counts.size() == 1) return 1.0;  // H = 0 limit
  double entropy = 0;
  for (const auto& [word, count] : counts) {
    double p = static_cast<double>(count) / static_cast<double>(total);
    entropy -= p * std::log(p);
  }
  double value = 1.0 - entropy / std::log(static_cast<double>(counts.size()));
  return std::clamp(value, 0.0, 1.0);
}

double dc3(std::span<const EmbeddingVector> analysis_embeddings, const MetricConfig& config) {
  if (analysis_embeddings.size() < 2) return 0.0;
  return clamp01(1.0 - mean_pairwise_cosine(analysis_embeddings), config);
}

double cc1(const std::map<std::string, std::vector<EmotionLabel>>& emotions_by_character,
           const MetricConfig& config) {
  double sum = 0;
  std::size_t qualifying = 0;
  for (const auto& [character, emotions] : emotions_by_character) {
    if (emotions.size() < config.min_turns_cc1) continue;
    double transitions = 0;
    for (std::size_t i = 0; i + 1 < emotions.size(); ++i)
      transitions +=
          std::abs(emotion_value(emotions[i + 1]) - emotion_value(emotions[i])) / 2.0;
    sum += 1.0 - transitions / static_cast<double>(emotions.size() - 1);
    ++qualifying;
  }
  if (qualifying == 0) return 0.0;
  return clamp01(sum / static_cast<double>(qualifying), config);
}

double cc2(const std::map<std::string, EmbeddingVector>& uniqueness_by_character,
           const std::map<std::string, std::vector<EmbeddingVector>>& dialogue_embeddings,
           const MetricConfig& config) {
  const std::size_t k = uniqueness_by_character.size();
  if (k == 0) return 0.0;

  double inter = 0.0;
  if (k >= 2) {
    std::vector<EmbeddingVector> uniq;
    uniq.reserve(k);
    for (const auto& [character, vec] : uniqueness_by_character) uniq.push_back(vec);
    inter = 1.0 - mean_pairwise_cosine(uniq);
  }

  double intra_sum = 0;
  for (const auto& [character, vec] : uniqueness_by_character) {
    auto it = dialogue_embeddings.find(character);
    if (it == dialogue_embeddings.end() || it->second.size() < 2) continue;
    intra_sum += mean_pairwise_cosine(it->second);
  }
  double value = config.weights.lambda1 * inter +
                 config.weights.lambda2 * (intra_sum / static_cast<double>(k));
  return clamp01(value, config);
}

double cc3(std::span<const EmbeddingVector> intention_embeddings,
           std::span<const EmbeddingVector> action_embeddings, const MetricConfig& config) {
  if (intention_embeddings.empty() || action_embeddings.empty()) return 0.0;
  double sum = 0;
  for (const EmbeddingVector& intention : intention_embeddings) {
    double best = -1.0;
    for (const EmbeddingVector& action : action_embeddings)
      best = std::max(best, cosine(intention, action));
    sum += best;
  }
  return clamp01(sum / static_cast<double>(intention_embeddings.size()), config);
}

double pr1(std::span<const EmbeddingVector> scene_embeddings, const MetricConfig& config) {
  if (scene_embeddings.size() < config.min_scenes_pr1) return 0.0;
  return clamp01(mean_adjacent_cosine(scene_embeddings), config);
}

double pr2(std::span<const EmbeddingVector> event_embeddings, const MetricConfig& config) {
  if (event_embeddings.size() < 2) return 0.0;
  return clamp01(mean_adjacent_cosine(event_embeddings), config);
}

double pr3(std::span<const EmbeddingVector> pattern_embeddings, const MetricConfig& config) {
  const std::size_t p = pattern_embeddings.size();
  if (p < 2) return 0.0;

  double pairwise = mean_pairwise_cosine(pattern_embeddings);

  std::vector<EmbeddingVector> directions;
  directions.reserve(p);
  for (const EmbeddingVector& vec : pattern_embeddings) directions.push_back(normalized(vec));
  EmbeddingVector centroid;
  centroid.values.assign(directions.front().dimension(), 0.0);
  for (const EmbeddingVector& dir : directions)
    for (std::size_t i = 0; i < dir.values.size(); ++i) centroid.values[i] += dir.values[i];
  for (double& v : centroid.values) v /= static_cast<double>(p);

  double centroid_sum = 0;
  for (const EmbeddingVector& dir : directions) centroid_sum += cosine(dir, centroid);
  double centroid_term = centroid_sum / static_cast<double>(p);

  double value = 1.0 - (config.weights.lambda3 * pairwise + config.weights.lambda4 * centroid_term);
  return clamp01(value, config);
}

ScoreReport evaluate_script(const ParsedScript& script, AnalysisProvider& provider,
                            const MetricConfig& config, const std::string& script_id) {
  ScoreReport report;
  report.provider_id = provider.id();
  report.script_id = script_id;

  const auto& turns = script.dialogues_ordered;
  std::vector<std::string> lines;
  lines.reserve(turns.size());
  for (const DialogueTurn& turn : turns) lines.push_back(turn.line);

  report.counts["turns"] = turns.size();
  report.counts["characters"] = script.dialogues_by_character.size();
  report.counts["scenes"] = script.scenes.size();
  report.counts["actions"] = script.actions.size();

  auto run = [](const char* metric, auto&& fn) {
    try {
      return fn();
    } catch (const ProviderError& e) {
      throw ProviderError(std::string(metric) + ": " + e.what(), e.http_status());
    }
  };

  // DC1: adjacent turn topic similarity
  report.dc1 = run("dc1", [&] {
    if (turns.size() < config.min_turns_dc1) return 0.0;
    return dc1(provider.embed(lines), config);
  });

  // DC2: dialogue topic concentration
  report.dc2 = run("dc2", [&] {
    std::vector<std::vector<std::string>> keyword_sets;
    keyword_sets.reserve(lines.size());
    std::size_t total = 0;
    for (const std::string& line : lines) {
      keyword_sets.push_back(provider.extract_keywords(line));
      total += keyword_sets.back().size();
    }
    report.counts["keywords"] = total;
    return dc2(keyword_sets);
  });

  // DC3: linguistic creativity over analysis embeddings
  report.dc3 = run("dc3", [&] {
    std::vector<std::string> features;
    if (!lines.empty()) features = provider.extract_creative_features(lines);
    std::erase_if(features, [](const std::string& f) { return f.empty(); });
    report.counts["creative_features"] = features.size();
    if (features.size() < 2) return 0.0;
    std::vector<std::string> analyses;
    analyses.reserve(features.size());
    for (const std::string& feature : features)
      analyses.push_back(provider.analyze_creativity(feature));
    return dc3(provider.embed(analyses), config);
  });

  // CC1: emotional stability per character
  report.cc1 = run("cc1", [&] {
    std::map<std::string, std::vector<EmotionLabel>> emotions;
    std::size_t qualifying = 0;
    for (const auto& [character, character_turns] : script.dialogues_by_character) {
      if (character_turns.size() < config.min_turns_cc1) continue;
      ++qualifying;
      auto& seq = emotions[character];
      seq.reserve(character_turns.size());
      for (const DialogueTurn& turn : character_turns)
        seq.push_back(provider.classify_emotion(turn.line));
    }
    report.counts["cc1_characters"] = qualifying;
    return cc1(emotions, config);
  });

  // CC2: character originality (uniqueness + intra-character consistency)
  report.cc2 = run("cc2", [&] {
    std::map<std::string, EmbeddingVector> uniqueness;
    std::map<std::string, std::vector<EmbeddingVector>> dialogue_embeddings;
    for (const auto& [character, character_turns] : script.dialogues_by_character) {
      if (character_turns.size() < config.min_turns_cc2) continue;
      std::vector<std::string> character_lines;
      character_lines.reserve(character_turns.size());
      for (const DialogueTurn& turn : character_turns) character_lines.push_back(turn.line);
      std::string description = provider.extract_uniqueness(character, character_lines);
      uniqueness[character] = provider.embed({description}).front();
      dialogue_embeddings[character] = provider.embed(character_lines);
    }
    report.counts["cc2_characters"] = uniqueness.size();
    return cc2(uniqueness, dialogue_embeddings, config);
  });

  // CC3: action-intention alignment
  report.cc3 = run("cc3", [&] {
    std::vector<IntentionHit> hits = provider.detect_intentions(turns);
    report.counts["intentions"] = hits.size();
    if (hits.empty() || script.actions.empty()) return 0.0;
    std::vector<std::string> intention_texts;
    intention_texts.reserve(hits.size());
    for (const IntentionHit& hit : hits) intention_texts.push_back(hit.text);
    auto intention_embeddings = provider.embed(intention_texts);
    auto action_embeddings = provider.embed(script.actions);
    return cc3(intention_embeddings, action_embeddings, config);
  });

  // PR1: scene-description coherence
  report.pr1 = run("pr1", [&] {
    if (script.scenes.size() < config.min_scenes_pr1) return 0.0;
    std::vector<std::string> scene_texts;
    scene_texts.reserve(script.scenes.size());
    for (const Scene& scene : script.scenes) {
      std::string text;
      for (const std::string& description : scene.descriptions) {
        if (!text.empty()) text.push_back(' ');
        text += description;
      }
      scene_texts.push_back(std::move(text));
    }
    return pr1(provider.embed(scene_texts), config);
  });

  // PR2: event-sequence coherence
  report.pr2 = run("pr2", [&] {
    std::vector<std::string> events = provider.extract_events(script);
    report.counts["events"] = events.size();
    if (events.size() < 2) return 0.0;
    return pr2(provider.embed(events), config);
  });

  // PR3: narrative innovation over pattern embeddings
  report.pr3 = run("pr3", [&] {
    std::vector<std::string> patterns = provider.extract_patterns(script);
    report.counts["patterns"] = patterns.size();
    if (patterns.size() < 2) return 0.0;
    return pr3(provider.embed(patterns), config);
  });

  return report;
}

DimensionScores dimension_scores(const ScoreReport& report) {
  return {(report.dc1 + report.dc2 + report.dc3) / 3.0,
          (report.cc1 + report.cc2 + report.cc3) / 3.0,
          (report.pr1 + report.pr2 + report.pr3) / 3.0};
}

}  // namespace cml
