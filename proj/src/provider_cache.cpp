#include "cml/provider_cache.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cml {
namespace {

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::string make_key(std::string_view capability, std::string_view model,
                     std::string_view content) {
  std::string key;
  key.reserve(capability.size() + model.size() + content.size() + 2);
  key.append(capability);
  key.push_back('\x1f');
  key.append(model);
  key.push_back('\x1f');
  key.append(content);
  return key;
}

}  // namespace

ProviderCache::ProviderCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ProviderCache::path_for(std::string_view key) const {
  return dir_ / (fnv1a_hex(key) + ".json");
}

std::optional<std::string> ProviderCache::get(std::string_view capability, std::string_view model,
                                              std::string_view content) {
  const std::string key = make_key(capability, model, content);
  std::lock_guard lock(mutex_);
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  // the full key is stored alongside the value, so a hash collision reads as a miss
  if (doc.value("key", "") != key) return std::nullopt;
  if (!doc.contains("value") || !doc["value"].is_string()) return std::nullopt;
  return doc["value"].get<std::string>();
}

void ProviderCache::put(std::string_view capability, std::string_view model,
                        std::string_view content, std::string_view value) {
  const std::string key = make_key(capability, model, content);
  nlohmann::json doc{{"key", key}, {"value", std::string(value)}};
  std::lock_guard lock(mutex_);
  auto final_path = path_for(key);
  auto tmp_path = final_path;
  tmp_path += ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    out << doc.dump();
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
}

}  // namespace cml
