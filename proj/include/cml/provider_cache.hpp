#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace cml {

/// Content-addressed directory of JSON files keyed by
/// (capability, model_name, content). Writes are serialized internally.
class ProviderCache {
 public:
  explicit ProviderCache(std::filesystem::path dir);

  std::optional<std::string> get(std::string_view capability, std::string_view model,
                                 std::string_view content);
  void put(std::string_view capability, std::string_view model, std::string_view content,
           std::string_view value);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(std::string_view key) const;

  std::filesystem::path dir_;
  std::mutex mutex_;
};

}  // namespace cml
