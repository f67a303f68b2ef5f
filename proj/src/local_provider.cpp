#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>

#include "cml/providers.hpp"

namespace cml {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Maximal runs of ASCII alphanumerics, lowercased.
std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Maximal runs of ASCII letters only, lowercased (keyword tokenization).
std::vector<std::string> alpha_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

const std::set<std::string>& stop_words() {
  static const std::set<std::string> kStopWords = {
      "a",     "about", "after", "again",  "all",   "am",    "an",    "and",   "any",
      "are",   "as",    "at",    "be",     "been",  "but",   "by",    "can",   "could",
      "d",     "did",   "didn",  "do",     "does",  "doesn", "don",   "down",  "for",
      "from",  "had",   "has",   "have",   "he",    "her",   "here",  "him",   "his",
      "how",   "i",     "if",    "in",     "into",  "is",    "it",    "its",   "just",
      "ll",    "m",     "may",   "me",     "might", "must",  "my",    "no",    "not",
      "now",   "of",    "off",   "on",     "or",    "our",   "out",   "over",  "re",
      "s",     "shall", "she",   "should", "so",    "some",  "t",     "than",  "that",
      "the",   "their", "them",  "then",   "there", "these", "they",  "this",  "those",
      "to",    "too",   "under", "up",     "us",    "ve",    "very",  "was",   "we",
      "were",  "what",  "when",  "where",  "which", "who",   "whom",  "why",   "will",
      "with",  "would", "you",   "your"};
  return kStopWords;
}

const std::set<std::string>& positive_words() {
  static const std::set<std::string> kPositive = {
      "amazing", "beautiful", "best",      "brilliant", "calm",    "celebrate", "delight",
      "delighted", "excellent", "excited", "exciting",  "fantastic", "fun",     "funny",
      "glad",    "good",      "grateful",  "great",     "happy",   "hope",      "hopeful",
      "joy",     "joyful",    "kind",      "laugh",     "laughing", "love",     "loved",
      "loves",   "loving",    "peace",     "perfect",   "proud",   "relief",    "relieved",
      "safe",    "smile",     "sweet",     "thank",     "thanks",  "warm",      "win",
      "wins",    "won",       "wonderful", "yes"};
  return kPositive;
}

const std::set<std::string>& negative_words() {
  static const std::set<std::string> kNegative = {
      "afraid", "alone",  "anger",   "angry",    "awful",  "bad",    "blood",  "break",
      "broken", "cruel",  "cry",     "crying",   "damn",   "danger", "dangerous", "dark",
      "dead",   "death",  "die",     "disgusting", "dying", "evil",  "fail",   "failed",
      "failure", "fear",  "hate",    "hated",    "hates",  "hating", "hell",   "horrible",
      "hurt",   "hurts",  "insane",  "kill",     "killed", "lose",   "losing", "lost",
      "mess",   "never",  "nothing", "pain",     "painful", "sad",   "sadly",  "scared",
      "stupid", "terrible", "ugly",  "war",      "worried", "worry", "worst",  "wrong"};
  return kNegative;
}

// Markers that flag an intention-expressing dialogue line.
constexpr std::string_view kIntentMarkers[] = {
    "i will", "i'm going to", "i am going to", "we will", "let's", "i plan to", "we need"};

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// First sentence of a block. A terminator only counts once the prefix holds
// at least two word tokens, so abbreviation dots ("INT. LAB - DAY") do not
// produce one-token stubs.
std::string first_sentence(std::string_view block) {
  std::string_view sentence = block;
  std::size_t cut = block.find_first_of(".!?");
  while (cut != std::string_view::npos) {
    std::string_view prefix = block.substr(0, cut + 1);
    if (word_tokens(prefix).size() >= 2) {
      sentence = prefix;
      break;
    }
    cut = block.find_first_of(".!?", cut + 1);
  }
  while (!sentence.empty() && std::isspace(static_cast<unsigned char>(sentence.front())))
    sentence.remove_prefix(1);
  while (!sentence.empty() && std::isspace(static_cast<unsigned char>(sentence.back())))
    sentence.remove_suffix(1);
  return std::string(sentence);
}

}  // namespace

double EmbeddingVector::norm() const {
  double sum = 0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

bool EmbeddingVector::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

LocalProvider::LocalProvider(std::size_t dimension) : dimension_(dimension) {}

std::string LocalProvider::id() const {
  return "local-hash-" + std::to_string(dimension_);
}

EmbeddingVector LocalProvider::embed_one(std::string_view text) const {
  EmbeddingVector vec;
  vec.values.assign(dimension_, 0.0);
  for (const std::string& token : word_tokens(text)) {
    std::uint64_t h = fnv1a(token);
    std::size_t bucket = h % dimension_;
    double sign = (h >> 63) ? 1.0 : -1.0;  // signed hashing keeps cosines two-sided
    vec.values[bucket] += sign;
  }
  double n = vec.norm();
  if (n > 0)
    for (double& v : vec.values) v /= n;
  return vec;
}

std::vector<EmbeddingVector> LocalProvider::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw std::invalid_argument("embed: empty input sequence");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) out.push_back(embed_one(text));
  return out;
}

std::vector<std::string> LocalProvider::extract_keywords(const std::string& dialogue) {
  std::vector<std::string> keywords;
  std::set<std::string> seen;
  for (std::string& token : alpha_tokens(dialogue)) {
    if (stop_words().count(token)) continue;
    if (seen.insert(token).second) keywords.push_back(std::move(token));
  }
  return keywords;
}

EmotionLabel LocalProvider::classify_emotion(const std::string& dialogue) {
  int score = 0;
  for (const std::string& token : alpha_tokens(dialogue)) {
    if (positive_words().count(token)) ++score;
    if (negative_words().count(token)) --score;
  }
  if (score > 0) return EmotionLabel::positive;
  if (score < 0) return EmotionLabel::negative;
  return EmotionLabel::neutral;
}

std::vector<std::string> LocalProvider::extract_creative_features(
    const std::vector<std::string>& dialogues) {
  // Pooled token frequencies; each dialogue contributes the trigram window
  // anchored at its rarest token.
  std::map<std::string, std::size_t> pooled;
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(dialogues.size());
  for (const std::string& dialogue : dialogues) {
    tokenized.push_back(word_tokens(dialogue));
    for (const std::string& token : tokenized.back()) ++pooled[token];
  }
  std::vector<std::string> features;
  for (const auto& tokens : tokenized) {
    if (tokens.empty()) continue;
    std::size_t rarest = 0;
    for (std::size_t i = 1; i < tokens.size(); ++i)
      if (pooled[tokens[i]] < pooled[tokens[rarest]]) rarest = i;
    std::size_t begin = tokens.size() >= 3 ? std::min(rarest, tokens.size() - 3) : 0;
    std::size_t end = std::min(begin + 3, tokens.size());
    std::string feature;
    for (std::size_t i = begin; i < end; ++i) {
      if (!feature.empty()) feature.push_back(' ');
      feature += tokens[i];
    }
    features.push_back(std::move(feature));
  }
  return features;
}

std::string LocalProvider::analyze_creativity(const std::string& feature) {
  if (feature.empty()) throw std::invalid_argument("analyze_creativity: empty feature");
  return "creativity-analysis: " + feature;
}

std::string LocalProvider::extract_uniqueness(const std::string& character,
                                              const std::vector<std::string>& dialogues) {
  (void)character;  // the description is built from the speech alone
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> order;  // first-occurrence order for tie-breaking
  for (const std::string& dialogue : dialogues) {
    for (std::string& token : alpha_tokens(dialogue)) {
      if (stop_words().count(token)) continue;
      auto [it, inserted] = counts.try_emplace(std::move(token), 0);
      ++it->second;
      if (inserted) order.push_back(it->first);
    }
  }
  if (order.empty()) return "no-distinctive-features";
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return counts[a] > counts[b];
  });
  std::string out;
  for (std::size_t i = 0; i < order.size() && i < 5; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += order[i];
  }
  return out;
}

std::vector<IntentionHit> LocalProvider::detect_intentions(
    const std::vector<DialogueTurn>& dialogues) {
  std::vector<IntentionHit> hits;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    std::string lowered = to_lower(dialogues[i].line);
    for (std::string_view marker : kIntentMarkers) {
      if (lowered.find(marker) != std::string::npos) {
        hits.push_back({i, dialogues[i].line});
        break;
      }
    }
  }
  return hits;
}

std::vector<std::string> LocalProvider::extract_events(const ParsedScript& script) {
  std::vector<std::string> events;
  for (const std::string& block : script.actions) {
    if (block.empty()) continue;
    events.push_back(first_sentence(block));
  }
  return events;
}

std::vector<std::string> LocalProvider::extract_patterns(const ParsedScript& script) {
  std::vector<std::string> patterns;
  for (const Scene& scene : script.scenes) {
    std::string pattern = scene.heading.value_or("");
    if (!scene.descriptions.empty()) {
      std::string lead = first_sentence(scene.descriptions.front());
      if (!pattern.empty() && !lead.empty()) pattern.push_back(' ');
      pattern += lead;
    }
    patterns.push_back(std::move(pattern));
  }
  return patterns;
}

std::string LocalChatProvider::complete(const std::string& system_message,
                                        const std::string& user_prompt) {
  (void)system_message;
  (void)user_prompt;
  return "<script>\n"
         "  <scene>\n"
         "    <stage_direction>INT. STUDY - NIGHT</stage_direction>\n"
         "    <scene_description>A desk lamp throws long shadows across stacked papers. "
         "LENA (40s) reads, then sets the page down.</scene_description>\n"
         "    <character>LENA</character>\n"
         "    <dialogue>We need to start over, from the first page.</dialogue>\n"
         "    <character>OWEN</character>\n"
         "    <parenthetical>(quietly)</parenthetical>\n"
         "    <dialogue>Then we start over.</dialogue>\n"
         "  </scene>\n"
         "  <scene>\n"
         "    <stage_direction>EXT. COURTYARD - DAWN</stage_direction>\n"
         "    <scene_description>Pale light. Lena crosses the wet stones, coat drawn "
         "tight.</scene_description>\n"
         "    <character>LENA</character>\n"
         "    <dialogue>I will finish it today.</dialogue>\n"
         "  </scene>\n"
         "</script>";
}

}  // namespace cml
