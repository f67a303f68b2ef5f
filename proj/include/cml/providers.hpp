#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cml/script_model.hpp"

namespace cml {

/// Fixed-dimension real vector produced by an embedding backend.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  double norm() const;
  bool is_zero() const;

  bool operator==(const EmbeddingVector&) const = default;
};

enum class EmotionLabel : int { negative = -1, neutral = 0, positive = 1 };

inline int emotion_value(EmotionLabel label) { return static_cast<int>(label); }

/// Intention-expressing dialogue flagged by a provider.
struct IntentionHit {
  std::size_t turn_index = 0;
  std::string text;

  bool operator==(const IntentionHit&) const = default;
};

struct ProviderConfig {
  std::string endpoint;  // required for remote mode, e.g. http://host:port
  std::string model_name;
  std::string api_key_env = "CML_API_KEY";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::optional<std::filesystem::path> cache_path;
  int max_in_flight = 8;
};

class ProviderError : public std::runtime_error {
 public:
  explicit ProviderError(const std::string& message, int http_status = 0)
      : std::runtime_error(message), http_status_(http_status) {}
  int http_status() const { return http_status_; }

 private:
  int http_status_;
};

/// Every LLM-backed capability the metrics need. Implementations must accept
/// concurrent calls on distinct inputs.
class AnalysisProvider {
 public:
  virtual ~AnalysisProvider() = default;

  virtual std::string id() const = 0;
  virtual std::size_t embedding_dimension() const = 0;

  /// One vector per input text, same order, one shared dimension.
  /// Empty or token-free texts embed to the zero vector.
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

  virtual std::vector<std::string> extract_keywords(const std::string& dialogue) = 0;
  virtual EmotionLabel classify_emotion(const std::string& dialogue) = 0;
  virtual std::vector<std::string> extract_creative_features(
      const std::vector<std::string>& dialogues) = 0;
  virtual std::string analyze_creativity(const std::string& feature) = 0;
  virtual std::string extract_uniqueness(const std::string& character,
                                         const std::vector<std::string>& dialogues) = 0;
  virtual std::vector<IntentionHit> detect_intentions(
      const std::vector<DialogueTurn>& dialogues) = 0;
  virtual std::vector<std::string> extract_events(const ParsedScript& script) = 0;
  virtual std::vector<std::string> extract_patterns(const ParsedScript& script) = 0;
};

/// Chat-completion backend used for script generation.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string model_name() const = 0;
  virtual std::string complete(const std::string& system_message,
                               const std::string& user_prompt) = 0;
};

/// Deterministic offline provider: feature-hashed bag-of-words embeddings and
/// fixed lexicon/heuristic extraction rules. Pure function of its inputs —
/// byte-identical outputs across runs and platforms.
class LocalProvider final : public AnalysisProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit LocalProvider(std::size_t dimension = kDefaultDimension);

  std::string id() const override;
  std::size_t embedding_dimension() const override { return dimension_; }
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  std::vector<std::string> extract_keywords(const std::string& dialogue) override;
  EmotionLabel classify_emotion(const std::string& dialogue) override;
  std::vector<std::string> extract_creative_features(
      const std::vector<std::string>& dialogues) override;
  std::string analyze_creativity(const std::string& feature) override;
  std::string extract_uniqueness(const std::string& character,
                                 const std::vector<std::string>& dialogues) override;
  std::vector<IntentionHit> detect_intentions(const std::vector<DialogueTurn>& dialogues) override;
  std::vector<std::string> extract_events(const ParsedScript& script) override;
  std::vector<std::string> extract_patterns(const ParsedScript& script) override;

  EmbeddingVector embed_one(std::string_view text) const;

 private:
  std::size_t dimension_;
};

/// Offline chat stub: echoes one canned, well-formed CML script. Useful for
/// exercising the generation pipeline without an endpoint.
class LocalChatProvider final : public ChatProvider {
 public:
  std::string model_name() const override { return "local-canned"; }
  std::string complete(const std::string& system_message,
                       const std::string& user_prompt) override;
};

/// Client for a hosted chat/embedding endpoint speaking the common JSON shapes
/// ({model, input} -> {data:[{embedding}]}, {model, messages} -> {choices}).
/// Retries 429/5xx with exponential backoff; optional disk cache.
class RemoteProvider final : public AnalysisProvider {
 public:
  explicit RemoteProvider(ProviderConfig config);
  ~RemoteProvider() override;

  std::string id() const override;
  std::size_t embedding_dimension() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  std::vector<std::string> extract_keywords(const std::string& dialogue) override;
  EmotionLabel classify_emotion(const std::string& dialogue) override;
  std::vector<std::string> extract_creative_features(
      const std::vector<std::string>& dialogues) override;
  std::string analyze_creativity(const std::string& feature) override;
  std::string extract_uniqueness(const std::string& character,
                                 const std::vector<std::string>& dialogues) override;
  std::vector<IntentionHit> detect_intentions(const std::vector<DialogueTurn>& dialogues) override;
  std::vector<std::string> extract_events(const ParsedScript& script) override;
  std::vector<std::string> extract_patterns(const ParsedScript& script) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Chat completions against the same endpoint/config as RemoteProvider.
class RemoteChatProvider final : public ChatProvider {
 public:
  explicit RemoteChatProvider(ProviderConfig config);
  ~RemoteChatProvider() override;

  std::string model_name() const override;
  std::string complete(const std::string& system_message,
                       const std::string& user_prompt) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cml
