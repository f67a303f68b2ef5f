#include "cml/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cml/parser.hpp"

namespace cml {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    // trim surrounding whitespace; our table values never contain commas
    auto begin = field.find_first_not_of(" \t\r");
    auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw CorpusError(where + ": not a number: \"" + text + "\"");
  }
}

// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

BenchmarkRow mean_row(std::span<const BenchmarkRow> rows) {
  BenchmarkRow mean;
  mean.source_id = "mean";
  if (rows.empty()) return mean;
  for (const BenchmarkRow& row : rows) {
    for (std::size_t m = 0; m < 9; ++m) mean.metrics[m] += row.metrics[m];
    mean.report_count += row.report_count;
  }
  for (std::size_t m = 0; m < 9; ++m) mean.metrics[m] /= static_cast<double>(rows.size());
  mean.dc = (mean.metrics[0] + mean.metrics[1] + mean.metrics[2]) / 3.0;
  mean.cc = (mean.metrics[3] + mean.metrics[4] + mean.metrics[5]) / 3.0;
  mean.pr = (mean.metrics[6] + mean.metrics[7] + mean.metrics[8]) / 3.0;
  return mean;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

CorpusLoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file: " + path.string());

  CorpusLoadResult result;
  std::set<std::string> seen_ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object())
      throw CorpusError("line " + std::to_string(line_number) + ": malformed JSON");
    CorpusEntry entry;
    for (const char* field : {"movie_name", "imdb_id", "content", "summary"}) {
      if (!doc.contains(field) || !doc[field].is_string())
        throw CorpusError("line " + std::to_string(line_number) + ": missing field \"" + field +
                          "\"");
    }
    entry.movie_name = doc["movie_name"].get<std::string>();
    entry.imdb_id = doc["imdb_id"].get<std::string>();
    entry.content = doc["content"].get<std::string>();
    entry.summary = doc["summary"].get<std::string>();
    if (std::string error = validate_entry(entry); !error.empty())
      throw CorpusError("line " + std::to_string(line_number) + ": " + error);
    if (!seen_ids.insert(entry.imdb_id).second)
      result.warnings.push_back("duplicate imdb_id " + entry.imdb_id + " at line " +
                                std::to_string(line_number));
    result.entries.push_back(std::move(entry));
  }
  return result;
}

std::map<std::string, std::size_t> count_tag_occurrences(std::string_view content) {
  std::map<std::string, std::size_t> counts;
  for (const char* tag : kRecognizedTags) counts[tag] = 0;
  std::size_t pos = 0;
  while (true) {
    std::size_t lt = content.find('<', pos);
    if (lt == std::string_view::npos) break;
    pos = lt + 1;
    if (pos >= content.size() || content[pos] == '/') continue;
    std::size_t name_end = pos;
    while (name_end < content.size() &&
           (std::isalnum(static_cast<unsigned char>(content[name_end])) ||
            content[name_end] == '_' || content[name_end] == '-'))
      ++name_end;
    if (name_end == pos) continue;
    std::size_t gt = content.find('>', name_end);
    if (gt == std::string_view::npos) continue;
    std::string name;
    for (std::size_t i = pos; i < name_end; ++i)
      name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(content[i]))));
    if (auto it = counts.find(name); it != counts.end()) ++it->second;
    pos = gt + 1;
  }
  return counts;
}

StatsReport corpus_stats(const std::vector<CorpusEntry>& entries) {
  StatsReport stats;
  stats.entry_count = entries.size();
  for (const char* tag : kRecognizedTags) stats.tag_histograms[tag];
  for (const CorpusEntry& entry : entries) {
    stats.total_tokens_content += count_tokens(entry.content);
    stats.total_tokens_summary += count_tokens(entry.summary);
    for (const auto& [tag, count] : count_tag_occurrences(entry.content))
      stats.tag_histograms[tag].add(count);
  }
  if (stats.entry_count > 0) {
    stats.mean_tokens_content =
        static_cast<double>(stats.total_tokens_content) / static_cast<double>(stats.entry_count);
    stats.mean_tokens_summary =
        static_cast<double>(stats.total_tokens_summary) / static_cast<double>(stats.entry_count);
  }
  return stats;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("spearman: length mismatch (" + std::to_string(xs.size()) +
                                " vs " + std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 observations");

  std::vector<double> rx = average_ranks(xs);
  std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mean = (n + 1.0) / 2.0;  // ranks always average to (n+1)/2
  double cov = 0, var_x = 0, var_y = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = rx[i] - mean;
    double dy = ry[i] - mean;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) throw std::runtime_error("degenerate-ranks");
  return cov / std::sqrt(var_x * var_y);
}

HumanRatings load_human_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open ratings file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CorpusError("ratings file is empty: " + path.string());
  auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"source_id", "dc", "cc", "pr"})
    throw CorpusError("ratings header must be source_id,dc,cc,pr");

  HumanRatings ratings;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw CorpusError("ratings line " + std::to_string(line_number) + ": expected 4 fields");
    HumanRatingRow row;
    row.source_id = fields[0];
    std::string where = "ratings line " + std::to_string(line_number);
    row.dc = parse_number(fields[1], where);
    row.cc = parse_number(fields[2], where);
    row.pr = parse_number(fields[3], where);
    for (double v : {row.dc, row.cc, row.pr})
      if (v < 0.0 || v > HumanRatings::kScaleMax)
        throw CorpusError(where + ": rating outside [0, 5]");
    ratings.rows.push_back(std::move(row));
  }
  return ratings;
}

std::string BenchmarkTable::to_csv() const {
  std::ostringstream out;
  out << "source_id";
  for (const char* name : kMetricNames) out << ',' << name;
  out << ",dc,cc,pr\n";
  for (const BenchmarkRow& row : rows) {
    out << row.source_id;
    for (double v : row.metrics) out << ',' << format_number(v);
    out << ',' << format_number(row.dc) << ',' << format_number(row.cc) << ','
        << format_number(row.pr) << '\n';
  }
  return out.str();
}

BenchmarkTable BenchmarkTable::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open table file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CorpusError("table file is empty: " + path.string());
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "source_id")
    throw CorpusError("table header must start with source_id");

  // column index per metric; -1 when that column must be back-filled
  std::array<int, 9> metric_col;
  std::array<int, 3> dim_col{-1, -1, -1};
  metric_col.fill(-1);
  for (std::size_t c = 1; c < header.size(); ++c) {
    for (std::size_t m = 0; m < 9; ++m)
      if (header[c] == kMetricNames[m]) metric_col[m] = static_cast<int>(c);
    if (header[c] == "dc") dim_col[0] = static_cast<int>(c);
    if (header[c] == "cc") dim_col[1] = static_cast<int>(c);
    if (header[c] == "pr") dim_col[2] = static_cast<int>(c);
  }
  bool full = std::all_of(metric_col.begin(), metric_col.end(), [](int c) { return c >= 0; });
  bool dims_only = std::all_of(dim_col.begin(), dim_col.end(), [](int c) { return c >= 0; });
  if (!full && !dims_only)
    throw CorpusError("table header needs either the nine metric columns or dc,cc,pr");

  BenchmarkTable table;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw CorpusError("table line " + std::to_string(line_number) + ": expected " +
                        std::to_string(header.size()) + " fields");
    BenchmarkRow row;
    row.source_id = fields[0];
    row.report_count = 1;
    std::string where = "table line " + std::to_string(line_number);
    if (full) {
      for (std::size_t m = 0; m < 9; ++m)
        row.metrics[m] = parse_number(fields[static_cast<std::size_t>(metric_col[m])], where);
      row.dc = (row.metrics[0] + row.metrics[1] + row.metrics[2]) / 3.0;
      row.cc = (row.metrics[3] + row.metrics[4] + row.metrics[5]) / 3.0;
      row.pr = (row.metrics[6] + row.metrics[7] + row.metrics[8]) / 3.0;
    } else {
      // dims-only input: keep the parsed values bit-exact so ties in the
      // source table stay ties downstream
      double dims[3];
      for (std::size_t d = 0; d < 3; ++d) {
        dims[d] = parse_number(fields[static_cast<std::size_t>(dim_col[d])], where);
        row.metrics[d * 3 + 0] = dims[d];
        row.metrics[d * 3 + 1] = dims[d];
        row.metrics[d * 3 + 2] = dims[d];
      }
      row.dc = dims[0];
      row.cc = dims[1];
      row.pr = dims[2];
    }
    table.rows.push_back(std::move(row));
  }
  table.means = mean_row(table.rows);
  return table;
}

BenchmarkTable aggregate(std::span<const ScoreReport> reports,
                         const std::function<std::string(const ScoreReport&)>& group_key) {
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const ScoreReport*>> groups;
  for (const ScoreReport& report : reports) {
    std::string key = group_key(report);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) group_order.push_back(key);
    it->second.push_back(&report);
  }

  BenchmarkTable table;
  for (const std::string& key : group_order) {
    const auto& members = groups[key];
    BenchmarkRow row;
    row.source_id = key;
    row.report_count = members.size();
    for (const ScoreReport* report : members) {
      auto values = report->values();
      for (std::size_t m = 0; m < 9; ++m) row.metrics[m] += values[m];
    }
    for (std::size_t m = 0; m < 9; ++m) row.metrics[m] /= static_cast<double>(members.size());
    row.dc = (row.metrics[0] + row.metrics[1] + row.metrics[2]) / 3.0;
    row.cc = (row.metrics[3] + row.metrics[4] + row.metrics[5]) / 3.0;
    row.pr = (row.metrics[6] + row.metrics[7] + row.metrics[8]) / 3.0;
    table.rows.push_back(std::move(row));
  }
  table.means = mean_row(table.rows);
  return table;
}

double correlate_with_human(const BenchmarkTable& table, const HumanRatings& ratings) {
  std::map<std::string, const BenchmarkRow*> by_id;
  for (const BenchmarkRow& row : table.rows) by_id[row.source_id] = &row;

  std::vector<double> bench_avg;
  std::vector<double> human_avg;
  std::vector<std::string> missing;
  for (const HumanRatingRow& rating : ratings.rows) {
    auto it = by_id.find(rating.source_id);
    if (it == by_id.end()) {
      missing.push_back(rating.source_id);
      continue;
    }
    const BenchmarkRow& row = *it->second;
    bench_avg.push_back((row.dc + row.cc + row.pr) / 3.0);
    human_avg.push_back((rating.dc + rating.cc + rating.pr) / 3.0);
  }
  if (!missing.empty()) {
    std::string joined;
    for (const std::string& id : missing) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw std::invalid_argument("correlate_with_human: unmatched source_id(s): " + joined);
  }
  return spearman(bench_avg, human_avg);
}

}  // namespace cml
