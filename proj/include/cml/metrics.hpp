#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cml/providers.hpp"
#include "cml/script_model.hpp"

namespace cml {

/// Mixing weights for the two-term metrics. Each pair must sum to 1.
struct MetricWeights {
  double lambda1 = 0.5;  // CC2 inter-character dissimilarity
  double lambda2 = 0.5;  // CC2 intra-character consistency
  double lambda3 = 0.5;  // PR3 pairwise pattern similarity
  double lambda4 = 0.5;  // PR3 centroid pattern similarity
};

struct MetricConfig {
  MetricWeights weights;
  std::size_t min_turns_dc1 = 2;
  std::size_t min_turns_cc1 = 2;   // per character
  std::size_t min_turns_cc2 = 3;   // per character
  std::size_t min_scenes_pr1 = 2;
  bool clamp_output = true;
};

/// dot(a,b) / (|a||b|); 0 when either norm is 0. Throws std::invalid_argument
/// on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Mean cosine similarity of adjacent dialogue-turn embeddings.
double dc1(std::span<const EmbeddingVector> turn_embeddings, const MetricConfig& config = {});

/// Topic concentration: 1 - H(P)/log|V| over the pooled keyword distribution.
/// 0 with no keywords, 1 with a single-word vocabulary.
double dc2(const std::vector<std::vector<std::string>>& keyword_sets);

/// Linguistic creativity: inverted mean pairwise similarity of the
/// creativity-analysis embeddings.
double dc3(std::span<const EmbeddingVector> analysis_embeddings, const MetricConfig& config = {});

/// Emotional stability, averaged over characters with enough classified turns.
double cc1(const std::map<std::string, std::vector<EmotionLabel>>& emotions_by_character,
           const MetricConfig& config = {});

/// Character originality: lambda1 * inter-character uniqueness dissimilarity
/// + lambda2 * mean intra-character dialogue similarity. Callers pass only
/// characters that meet the min_turns_cc2 threshold.
double cc2(const std::map<std::string, EmbeddingVector>& uniqueness_by_character,
           const std::map<std::string, std::vector<EmbeddingVector>>& dialogue_embeddings,
           const MetricConfig& config = {});

/// Action-intention alignment: mean over intentions of the best action match.
double cc3(std::span<const EmbeddingVector> intention_embeddings,
           std::span<const EmbeddingVector> action_embeddings, const MetricConfig& config = {});

/// Mean cosine similarity of adjacent per-scene description embeddings.
double pr1(std::span<const EmbeddingVector> scene_embeddings, const MetricConfig& config = {});

/// Mean cosine similarity of adjacent extracted-event embeddings.
double pr2(std::span<const EmbeddingVector> event_embeddings, const MetricConfig& config = {});

/// Narrative innovation: inverted weighted blend of pairwise and centroid
/// pattern similarity. The centroid is taken over direction vectors so the
/// score is invariant to rescaling any input.
double pr3(std::span<const EmbeddingVector> pattern_embeddings, const MetricConfig& config = {});

/// Runs the full extraction + scoring pipeline over one parsed script.
/// Deterministic with the local provider; provider errors propagate with the
/// metric name attached.
ScoreReport evaluate_script(const ParsedScript& script, AnalysisProvider& provider,
                            const MetricConfig& config = {}, const std::string& script_id = {});

struct DimensionScores {
  double dc = 0, cc = 0, pr = 0;
};

/// Arithmetic mean of the three sub-metrics per dimension.
DimensionScores dimension_scores(const ScoreReport& report);

}  // namespace cml
