#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <iostream>
#include <semaphore>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "cml/provider_cache.hpp"
#include "cml/providers.hpp"

namespace cml {
namespace {

constexpr const char* kEmbeddingsPath = "/v1/embeddings";
constexpr const char* kChatPath = "/v1/chat/completions";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_items(std::string_view reply) {
  std::vector<std::string> items;
  std::string current;
  auto flush = [&] {
    std::string_view t = trim(current);
    // strip list bullets and numbering the model may add
    while (!t.empty() && (t.front() == '-' || t.front() == '*')) t = trim(t.substr(1));
    std::size_t digits = 0;
    while (digits < t.size() && std::isdigit(static_cast<unsigned char>(t[digits]))) ++digits;
    if (digits > 0 && digits < t.size() && (t[digits] == '.' || t[digits] == ')'))
      t = trim(t.substr(digits + 1));
    if (!t.empty()) items.emplace_back(t);
    current.clear();
  };
  for (char c : reply) {
    if (c == ',' || c == '\n')
      flush();
    else
      current.push_back(c);
  }
  flush();
  return items;
}

// In-flight request limiter shared by embeddings and chat calls.
class RequestGate {
 public:
  explicit RequestGate(int limit) : semaphore_(std::max(1, limit)) {}
  struct Ticket {
    explicit Ticket(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~Ticket() { sem.release(); }
    std::counting_semaphore<>& sem;
  };
  Ticket acquire() { return Ticket(semaphore_); }

 private:
  std::counting_semaphore<> semaphore_;
};

struct HttpClient {
  explicit HttpClient(const ProviderConfig& config)
      : config_(config), gate_(config.max_in_flight) {
    if (config_.endpoint.empty())
      throw std::invalid_argument("remote provider requires an endpoint");
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body) {
    const std::string payload = body.dump();
    for (int attempt = 0;; ++attempt) {
      auto ticket = gate_.acquire();
      httplib::Client client(config_.endpoint);
      auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      client.set_connection_timeout(std::max<long>(1, seconds.count()), 0);
      client.set_read_timeout(std::max<long>(1, seconds.count()), 0);
      client.set_write_timeout(std::max<long>(1, seconds.count()), 0);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

      auto res = client.Post(path, headers, payload, "application/json");
      if (!res)
        throw ProviderError("transport failure: " + httplib::to_string(res.error()));
      if (res->status == 200) {
        nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded())
          throw ProviderError("malformed JSON in response body", res->status);
        return doc;
      }
      bool retryable = res->status == 429 || res->status >= 500;
      if (!retryable || attempt >= config_.max_retries)
        throw ProviderError("HTTP " + std::to_string(res->status) + " from " + path, res->status);
      std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << attempt));
    }
  }

  std::string chat(const std::string& system_message, const std::string& user_prompt) {
    nlohmann::json body{{"model", config_.model_name},
                        {"messages", nlohmann::json::array(
                                         {{{"role", "system"}, {"content", system_message}},
                                          {{"role", "user"}, {"content", user_prompt}}})}};
    nlohmann::json doc = post(kChatPath, body);
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
      throw ProviderError("chat response has no choices");
    const auto& message = doc["choices"][0]["message"];
    if (!message.contains("content") || !message["content"].is_string())
      throw ProviderError("chat response has no message content");
    return message["content"].get<std::string>();
  }

  const ProviderConfig config_;
  RequestGate gate_;
  std::string api_key_;
};

}  // namespace

struct RemoteProvider::Impl {
  explicit Impl(ProviderConfig config) : http(config) {
    if (config.cache_path) cache.emplace(*config.cache_path);
  }

  // Chat-backed extraction with the disk cache keyed on the full user prompt.
  std::string cached_chat(const char* capability, const std::string& system_message,
                          const std::string& user_prompt) {
    if (cache) {
      if (auto hit = cache->get(capability, http.config_.model_name, user_prompt)) return *hit;
    }
    std::string reply = http.chat(system_message, user_prompt);
    if (cache) cache->put(capability, http.config_.model_name, user_prompt, reply);
    return reply;
  }

  void warn(const char* capability, const std::string& message) {
    std::cerr << "[remote-provider] " << capability << ": " << message << "\n";
  }

  HttpClient http;
  std::optional<ProviderCache> cache;
  std::atomic<std::size_t> dimension{0};
};

RemoteProvider::RemoteProvider(ProviderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteProvider::~RemoteProvider() = default;

std::string RemoteProvider::id() const { return "remote:" + impl_->http.config_.model_name; }

std::size_t RemoteProvider::embedding_dimension() const { return impl_->dimension.load(); }

std::vector<EmbeddingVector> RemoteProvider::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw std::invalid_argument("embed: empty input sequence");
  const std::string& model = impl_->http.config_.model_name;

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> missing;
  std::vector<bool> blank(texts.size(), false);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (trim(texts[i]).empty()) {
      blank[i] = true;  // zero vector, resolved once the dimension is known
      continue;
    }
    if (impl_->cache) {
      if (auto hit = impl_->cache->get("embed", model, texts[i])) {
        nlohmann::json values = nlohmann::json::parse(*hit, nullptr, false);
        if (!values.is_discarded() && values.is_array()) {
          out[i].values = values.get<std::vector<double>>();
          continue;
        }
      }
    }
    missing.push_back(i);
  }

  if (!missing.empty()) {
    nlohmann::json inputs = nlohmann::json::array();
    for (std::size_t i : missing) inputs.push_back(texts[i]);
    nlohmann::json doc =
        impl_->http.post(kEmbeddingsPath, {{"model", model}, {"input", inputs}});
    if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].size() != missing.size())
      throw ProviderError("embeddings response size mismatch");
    for (std::size_t k = 0; k < missing.size(); ++k) {
      const auto& item = doc["data"][k];
      if (!item.contains("embedding") || !item["embedding"].is_array())
        throw ProviderError("embeddings response entry has no embedding");
      out[missing[k]].values = item["embedding"].get<std::vector<double>>();
      if (impl_->cache)
        impl_->cache->put("embed", model, texts[missing[k]],
                          nlohmann::json(out[missing[k]].values).dump());
    }
  }

  std::size_t dim = impl_->dimension.load();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (blank[i]) continue;
    if (dim == 0) dim = out[i].dimension();
    if (out[i].dimension() != dim)
      throw ProviderError("provider returned vectors of mixed dimension");
  }
  if (dim == 0) dim = 1;  // every input was blank and nothing is known yet
  impl_->dimension.store(dim);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (blank[i]) out[i].values.assign(dim, 0.0);
  return out;
}

std::vector<std::string> RemoteProvider::extract_keywords(const std::string& dialogue) {
  if (trim(dialogue).empty()) return {};
  std::string reply;
  try {
    reply = impl_->cached_chat(
        "keywords", "You extract keywords from screenplay dialogue.",
        "Extract up to 10 content keywords from this dialogue line. Reply with a "
        "comma-separated list of lowercase keywords and nothing else.\n\nDialogue: " +
            dialogue);
  } catch (const ProviderError& e) {
    impl_->warn("keywords", e.what());
    return {};
  }
  std::vector<std::string> keywords;
  std::set<std::string> seen;
  for (std::string& item : split_items(reply)) {
    std::string word = to_lower(item);
    if (word.size() > 40) continue;
    if (seen.insert(word).second) keywords.push_back(std::move(word));
  }
  if (keywords.empty()) impl_->warn("keywords", "empty or unparseable keyword list");
  return keywords;
}

EmotionLabel RemoteProvider::classify_emotion(const std::string& dialogue) {
  if (trim(dialogue).empty()) return EmotionLabel::neutral;
  std::string reply;
  try {
    reply = impl_->cached_chat(
        "emotion", "You classify the emotional tone of screenplay dialogue.",
        "Classify the emotional tone of this dialogue line. Reply with exactly one word: "
        "positive, negative, or neutral.\n\nDialogue: " +
            dialogue);
  } catch (const ProviderError& e) {
    impl_->warn("emotion", e.what());
    return EmotionLabel::neutral;
  }
  std::string lowered = to_lower(trim(reply));
  if (lowered == "positive") return EmotionLabel::positive;
  if (lowered == "negative") return EmotionLabel::negative;
  if (lowered == "neutral") return EmotionLabel::neutral;
  if (lowered.find("positive") != std::string::npos) return EmotionLabel::positive;
  if (lowered.find("negative") != std::string::npos) return EmotionLabel::negative;
  if (lowered.find("neutral") == std::string::npos)
    impl_->warn("emotion", "unmappable reply: " + lowered.substr(0, 60));
  return EmotionLabel::neutral;
}

std::vector<std::string> RemoteProvider::extract_creative_features(
    const std::vector<std::string>& dialogues) {
  if (dialogues.empty()) return {};
  std::ostringstream prompt;
  prompt << "List the creative language features (metaphors, unique expressions, innovative "
            "word usage) found in these dialogue lines. Reply with one short feature per line, "
            "or NONE.\n";
  for (const std::string& dialogue : dialogues) prompt << "\n- " << dialogue;
  std::string reply;
  try {
    reply = impl_->cached_chat("creative_features",
                               "You identify creative language in screenplay dialogue.",
                               prompt.str());
  } catch (const ProviderError& e) {
    impl_->warn("creative_features", e.what());
    return {};
  }
  if (to_lower(trim(reply)) == "none") return {};
  return split_items(reply);
}

std::string RemoteProvider::analyze_creativity(const std::string& feature) {
  if (feature.empty()) throw std::invalid_argument("analyze_creativity: empty feature");
  try {
    std::string reply = impl_->cached_chat(
        "creativity_analysis", "You analyze creative language.",
        "In one sentence, analyze what makes this language feature creative.\n\nFeature: " +
            feature);
    return std::string(trim(reply));
  } catch (const ProviderError& e) {
    impl_->warn("creativity_analysis", e.what());
    return {};
  }
}

std::string RemoteProvider::extract_uniqueness(const std::string& character,
                                               const std::vector<std::string>& dialogues) {
  std::ostringstream prompt;
  prompt << "Describe, in one short paragraph, the distinctive speech features of the "
            "character "
         << character << " based on these lines:\n";
  for (const std::string& dialogue : dialogues) prompt << "\n- " << dialogue;
  try {
    std::string reply = impl_->cached_chat(
        "uniqueness", "You analyze the speech style of screenplay characters.", prompt.str());
    return std::string(trim(reply));
  } catch (const ProviderError& e) {
    impl_->warn("uniqueness", e.what());
    return {};
  }
}

std::vector<IntentionHit> RemoteProvider::detect_intentions(
    const std::vector<DialogueTurn>& dialogues) {
  if (dialogues.empty()) return {};
  std::ostringstream prompt;
  prompt << "These are numbered dialogue lines from a screenplay. Reply with the numbers of "
            "the lines in which the speaker states an intention or plan, one number per line, "
            "or NONE.\n";
  for (std::size_t i = 0; i < dialogues.size(); ++i)
    prompt << "\n" << (i + 1) << ". " << dialogues[i].character << ": " << dialogues[i].line;
  std::string reply;
  try {
    reply = impl_->cached_chat("intentions", "You identify stated intentions in dialogue.",
                               prompt.str());
  } catch (const ProviderError& e) {
    impl_->warn("intentions", e.what());
    return {};
  }
  std::vector<IntentionHit> hits;
  std::set<std::size_t> seen;
  if (to_lower(trim(reply)) == "none") return hits;
  // parse leading integers from the raw lines: replies like "3" and
  // "3. We need a plan" both reference dialogue 3
  std::istringstream lines{reply};
  std::string raw;
  while (std::getline(lines, raw)) {
    std::string item(trim(raw));
    if (item.empty()) continue;
    while (!item.empty() && (item.front() == '-' || item.front() == '*'))
      item.erase(item.begin());
    char* end = nullptr;
    long index = std::strtol(item.c_str(), &end, 10);
    if (end == item.c_str() || index < 1 || static_cast<std::size_t>(index) > dialogues.size()) {
      impl_->warn("intentions", "unparseable line reference: " + item.substr(0, 40));
      continue;
    }
    std::size_t turn = static_cast<std::size_t>(index - 1);
    if (seen.insert(turn).second) hits.push_back({turn, dialogues[turn].line});
  }
  std::sort(hits.begin(), hits.end(),
            [](const IntentionHit& a, const IntentionHit& b) { return a.turn_index < b.turn_index; });
  return hits;
}

std::vector<std::string> RemoteProvider::extract_events(const ParsedScript& script) {
  if (script.actions.empty()) return {};
  std::ostringstream prompt;
  prompt << "Extract the key plot events from these scene/action descriptions, in "
            "chronological order. Reply with one short event per line.\n";
  for (const std::string& block : script.actions) prompt << "\n- " << block;
  try {
    std::string reply =
        impl_->cached_chat("events", "You extract plot events from screenplays.", prompt.str());
    return split_items(reply);
  } catch (const ProviderError& e) {
    impl_->warn("events", e.what());
    return {};
  }
}

std::vector<std::string> RemoteProvider::extract_patterns(const ParsedScript& script) {
  if (script.scenes.empty()) return {};
  std::ostringstream prompt;
  prompt << "Identify the narrative structure patterns (plot devices, storytelling "
            "techniques, structural innovations) used across these scenes. Reply with one "
            "short pattern per line.\n";
  for (const Scene& scene : script.scenes) {
    prompt << "\nScene " << (scene.index + 1) << ": " << scene.heading.value_or("(no heading)");
    if (!scene.descriptions.empty()) prompt << " - " << scene.descriptions.front();
  }
  try {
    std::string reply = impl_->cached_chat(
        "patterns", "You analyze narrative structure in screenplays.", prompt.str());
    return split_items(reply);
  } catch (const ProviderError& e) {
    impl_->warn("patterns", e.what());
    return {};
  }
}

struct RemoteChatProvider::Impl {
  explicit Impl(ProviderConfig config) : http(std::move(config)) {}
  HttpClient http;
};

RemoteChatProvider::RemoteChatProvider(ProviderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteChatProvider::~RemoteChatProvider() = default;

std::string RemoteChatProvider::model_name() const { return impl_->http.config_.model_name; }

std::string RemoteChatProvider::complete(const std::string& system_message,
                                         const std::string& user_prompt) {
  return impl_->http.chat(system_message, user_prompt);
}

}  // namespace cml
