#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cml/script_model.hpp"

namespace cml {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusLoadResult {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> warnings;  // e.g. duplicate imdb_id notes
};

/// Loads a UTF-8 JSON Lines corpus: one object per line with fields
/// movie_name, imdb_id, content, summary. Throws CorpusError naming the
/// offending line on malformed input.
CorpusLoadResult load_corpus(const std::filesystem::path& path);

/// Sparse histogram of per-script counts.
struct Histogram {
  std::map<std::size_t, std::size_t> buckets;  // count -> number of scripts
  void add(std::size_t value) { ++buckets[value]; }
};

struct StatsReport {
  std::size_t entry_count = 0;
  std::size_t total_tokens_content = 0;
  std::size_t total_tokens_summary = 0;
  double mean_tokens_content = 0;
  double mean_tokens_summary = 0;
  std::map<std::string, Histogram> tag_histograms;
};

/// Occurrences of each recognized open tag in one script text.
std::map<std::string, std::size_t> count_tag_occurrences(std::string_view content);

StatsReport corpus_stats(const std::vector<CorpusEntry>& entries);

/// Spearman rank correlation with average-rank tie handling (Pearson of the
/// rank vectors; reduces to 1 - 6*sum(d^2)/(n(n^2-1)) without ties).
/// Throws std::invalid_argument on length mismatch or n < 2, and
/// std::runtime_error("degenerate-ranks") when either series has zero rank
/// variance.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct HumanRatingRow {
  std::string source_id;
  double dc = 0, cc = 0, pr = 0;
};

/// Per-source human ratings on the [0, 5] scale.
struct HumanRatings {
  static constexpr double kScaleMax = 5.0;
  std::vector<HumanRatingRow> rows;
};

/// CSV with header source_id,dc,cc,pr.
HumanRatings load_human_ratings(const std::filesystem::path& path);

struct BenchmarkRow {
  std::string source_id;
  std::array<double, 9> metrics{};  // kMetricNames order
  double dc = 0, cc = 0, pr = 0;    // means of the sub-metrics
  std::size_t report_count = 0;
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
  BenchmarkRow means;  // per-column means over the rows

  std::string to_csv() const;

  /// Accepts either the full header (source_id + nine metrics) or a
  /// dimensions-only header (source_id,dc,cc,pr); in the latter case each
  /// dimension value is back-filled into its three sub-metric columns.
  static BenchmarkTable from_csv(const std::filesystem::path& path);
};

/// Per-group arithmetic means of each sub-metric, groups in first-appearance
/// order; dimension columns recomputed from the means.
BenchmarkTable aggregate(std::span<const ScoreReport> reports,
                         const std::function<std::string(const ScoreReport&)>& group_key);

/// Spearman correlation between per-source mean(dc,cc,pr) on both sides.
/// Every ratings row must match a table row by source_id.
double correlate_with_human(const BenchmarkTable& table, const HumanRatings& ratings);

}  // namespace cml
