#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cml/corpus.hpp"
#include "cml/instruction.hpp"
#include "cml/metrics.hpp"
#include "cml/parser.hpp"
#include "cml/providers.hpp"
#include "cml/serialization.hpp"

namespace {

struct RunConfig {
  std::string provider_mode = "local";
  std::string endpoint;
  std::string model;
  std::string api_key_env = "CML_API_KEY";
  std::string cache_dir;
  std::string out_dir;
  std::string prompt_config;
  std::string group_by = "script";
  std::string kind = "instr";
  int workers = 4;
  int timeout_ms = 30000;
  int max_retries = 3;
  double lambda1 = 0.5;
  double lambda3 = 0.5;
  unsigned long seed = 0;  // reserved for future stochastic providers
};

cml::ProviderConfig provider_config(const RunConfig& run) {
  cml::ProviderConfig cfg;
  cfg.endpoint = run.endpoint;
  cfg.model_name = run.model;
  cfg.api_key_env = run.api_key_env;
  cfg.timeout = std::chrono::milliseconds(run.timeout_ms);
  cfg.max_retries = run.max_retries;
  if (!run.cache_dir.empty()) cfg.cache_path = run.cache_dir;
  return cfg;
}

std::unique_ptr<cml::AnalysisProvider> make_provider(const RunConfig& run) {
  if (run.provider_mode == "local") return std::make_unique<cml::LocalProvider>();
  if (run.endpoint.empty() || run.model.empty())
    throw std::invalid_argument("remote provider requires --endpoint and --model");
  return std::make_unique<cml::RemoteProvider>(provider_config(run));
}

std::unique_ptr<cml::ChatProvider> make_chat(const RunConfig& run) {
  if (run.provider_mode == "local") return std::make_unique<cml::LocalChatProvider>();
  if (run.endpoint.empty() || run.model.empty())
    throw std::invalid_argument("remote generation requires --endpoint and --model");
  return std::make_unique<cml::RemoteChatProvider>(provider_config(run));
}

cml::MetricConfig metric_config(const RunConfig& run) {
  cml::MetricConfig cfg;
  cfg.weights.lambda1 = run.lambda1;
  cfg.weights.lambda2 = 1.0 - run.lambda1;
  cfg.weights.lambda3 = run.lambda3;
  cfg.weights.lambda4 = 1.0 - run.lambda3;
  return cfg;
}

cml::PromptTemplates templates_for(const RunConfig& run) {
  if (run.prompt_config.empty()) return cml::PromptTemplates::defaults();
  return cml::PromptTemplates::load(run.prompt_config);
}

cml::PromptKind kind_for(const RunConfig& run) {
  if (run.kind == "base") return cml::PromptKind::base;
  if (run.kind == "instr" || run.kind == "cml_instruction") return cml::PromptKind::cml_instruction;
  throw std::invalid_argument("--kind must be base or instr");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Primary output goes to stdout, or to <out_dir>/<name> with --out.
class OutputSink {
 public:
  OutputSink(const RunConfig& run, const std::string& name) {
    if (!run.out_dir.empty()) {
      std::filesystem::create_directories(run.out_dir);
      path_ = std::filesystem::path(run.out_dir) / name;
      file_.open(path_, std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot write " + path_.string());
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void note() const {
    if (!path_.empty()) std::cerr << "wrote " << path_.string() << "\n";
  }

 private:
  std::filesystem::path path_;
  std::ofstream file_;
};

// Fixed-size worker pool over indexed items; failures are recorded and the
// run continues.
template <typename Fn>
std::vector<std::optional<std::string>> run_pool(std::size_t count, int workers, Fn&& fn) {
  std::vector<std::optional<std::string>> rows(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        rows[i] = fn(i);
      } catch (const cml::ProviderError&) {
        throw;  // provider failures abort the run with exit code 2
      } catch (const std::exception& e) {
        std::cerr << "entry " << i << " failed: " << e.what() << "\n";
      }
    }
  };
  int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < n; ++t)
      threads.emplace_back([&] {
        try {
          worker();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    for (auto& thread : threads) thread.join();
    if (failure) std::rethrow_exception(failure);
  }
  return rows;
}

int cmd_parse(const RunConfig& run, const std::string& file) {
  cml::ParseResult result = cml::parse(read_file(file));
  OutputSink sink(run, "parse.json");
  sink.stream() << nlohmann::json(result).dump(2) << "\n";
  sink.note();
  std::cerr << "mode=" << cml::to_string(result.diagnostics.mode_used)
            << " scenes=" << result.script.scenes.size()
            << " turns=" << result.script.dialogues_ordered.size()
            << " warnings=" << result.diagnostics.warnings.size() << "\n";
  return 0;
}

int cmd_stats(const RunConfig& run, const std::string& corpus_file) {
  cml::CorpusLoadResult corpus = cml::load_corpus(corpus_file);
  for (const auto& warning : corpus.warnings) std::cerr << "warning: " << warning << "\n";
  cml::StatsReport stats = cml::corpus_stats(corpus.entries);
  OutputSink sink(run, "stats.json");
  sink.stream() << nlohmann::json(stats).dump(2) << "\n";
  sink.note();
  return 0;
}

int cmd_evaluate(const RunConfig& run, const std::string& corpus_file,
                 const std::string& scripts_file) {
  auto provider = make_provider(run);
  cml::MetricConfig cfg = metric_config(run);

  std::vector<std::string> ids;
  std::vector<std::string> texts;
  if (scripts_file.empty()) {
    cml::CorpusLoadResult corpus = cml::load_corpus(corpus_file);
    for (const auto& warning : corpus.warnings) std::cerr << "warning: " << warning << "\n";
    for (const auto& entry : corpus.entries) {
      ids.push_back(entry.imdb_id);
      texts.push_back(entry.content);
    }
  } else {
    std::ifstream in(scripts_file);
    if (!in) throw std::runtime_error("cannot open scripts file: " + scripts_file);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_discarded())
        throw cml::CorpusError("scripts line " + std::to_string(line_number) +
                               ": malformed JSON");
      cml::GenerationRecord record = doc.get<cml::GenerationRecord>();
      ids.push_back(record.imdb_id + "/" + record.model_name + "-" +
                    cml::to_string(record.prompt.kind));
      texts.push_back(record.raw_output);
    }
  }

  auto rows = run_pool(texts.size(), run.workers, [&](std::size_t i) {
    cml::ParseResult parsed = cml::parse(texts[i]);
    cml::ScoreReport report = cml::evaluate_script(parsed.script, *provider, cfg, ids[i]);
    return nlohmann::json(report).dump();
  });

  OutputSink sink(run, "reports.jsonl");
  std::size_t written = 0;
  for (const auto& row : rows)
    if (row) {
      sink.stream() << *row << "\n";
      ++written;
    }
  sink.note();
  std::cerr << "evaluated " << written << "/" << texts.size() << " scripts\n";
  return 0;
}

int cmd_gen_prompt(const RunConfig& run, const std::string& corpus_file) {
  cml::CorpusLoadResult corpus = cml::load_corpus(corpus_file);
  cml::PromptTemplates templates = templates_for(run);
  cml::PromptKind kind = kind_for(run);
  OutputSink sink(run, "prompts.jsonl");
  for (const auto& entry : corpus.entries) {
    cml::PromptBundle bundle =
        kind == cml::PromptKind::base
            ? cml::build_base_prompt(entry.movie_name, entry.summary, templates)
            : cml::build_cml_instruction(entry.movie_name, entry.summary, templates);
    nlohmann::json j = bundle;
    j["movie_name"] = entry.movie_name;
    j["imdb_id"] = entry.imdb_id;
    sink.stream() << j.dump() << "\n";
  }
  sink.note();
  return 0;
}

int cmd_generate(const RunConfig& run, const std::string& corpus_file) {
  cml::CorpusLoadResult corpus = cml::load_corpus(corpus_file);
  cml::PromptTemplates templates = templates_for(run);
  cml::PromptKind kind = kind_for(run);
  auto chat = make_chat(run);

  auto rows = run_pool(corpus.entries.size(), run.workers, [&](std::size_t i) {
    cml::GenerationRecord record = cml::generate(corpus.entries[i], kind, *chat, templates);
    return nlohmann::json(record).dump();
  });

  OutputSink sink(run, "generations.jsonl");
  for (const auto& row : rows)
    if (row) sink.stream() << *row << "\n";
  sink.note();
  return 0;
}

int cmd_correlate(const RunConfig& run, const std::string& table_file,
                  const std::string& ratings_file) {
  cml::BenchmarkTable table = cml::BenchmarkTable::from_csv(table_file);
  cml::HumanRatings ratings = cml::load_human_ratings(ratings_file);
  double rho = cml::correlate_with_human(table, ratings);
  OutputSink sink(run, "correlation.json");
  sink.stream() << nlohmann::json{{"spearman", rho}, {"n", ratings.rows.size()}}.dump() << "\n";
  sink.note();
  std::cerr << "spearman rho = " << rho << " over " << ratings.rows.size() << " sources\n";
  return 0;
}

int cmd_report(const RunConfig& run, const std::string& reports_file) {
  std::ifstream in(reports_file);
  if (!in) throw std::runtime_error("cannot open reports file: " + reports_file);
  std::vector<cml::ScoreReport> reports;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded())
      throw cml::CorpusError("reports line " + std::to_string(line_number) + ": malformed JSON");
    reports.push_back(doc.get<cml::ScoreReport>());
  }

  std::function<std::string(const cml::ScoreReport&)> key;
  if (run.group_by == "script")
    key = [](const cml::ScoreReport& r) { return r.script_id; };
  else if (run.group_by == "provider")
    key = [](const cml::ScoreReport& r) { return r.provider_id; };
  else
    throw std::invalid_argument("--group-by must be script or provider");

  cml::BenchmarkTable table = cml::aggregate(reports, key);
  OutputSink json_sink(run, "table.json");
  json_sink.stream() << cml::benchmark_table_json(table).dump(2) << "\n";
  json_sink.note();
  if (!run.out_dir.empty()) {
    std::ofstream csv(std::filesystem::path(run.out_dir) / "table.csv", std::ios::trunc);
    csv << table.to_csv();
    std::cerr << "wrote " << (std::filesystem::path(run.out_dir) / "table.csv").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig run;
  CLI::App app{"CML screenplay toolkit: parse tagged scripts, score them on the nine-metric "
               "benchmark, assemble generation prompts, and run correlation analysis"};
  app.set_config("--config", "", "key=value config file; flags take precedence");
  app.fallthrough();  // global flags may follow the subcommand

  app.add_option("--provider", run.provider_mode, "analysis backend")
      ->check(CLI::IsMember({"local", "remote"}))
      ->capture_default_str();
  app.add_option("--endpoint", run.endpoint, "remote endpoint, e.g. http://host:port");
  app.add_option("--model", run.model, "remote model name");
  app.add_option("--api-key-env", run.api_key_env, "env var holding the bearer token")
      ->capture_default_str();
  app.add_option("--cache", run.cache_dir, "provider cache directory");
  app.add_option("--workers", run.workers, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", run.out_dir, "output directory (default: stdout)");
  app.add_option("--prompt-config", run.prompt_config, "JSON file overriding prompt templates");
  app.add_option("--lambda1", run.lambda1, "CC2 inter-character weight (lambda2 = 1 - lambda1)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--lambda3", run.lambda3, "PR3 pairwise weight (lambda4 = 1 - lambda3)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--timeout-ms", run.timeout_ms, "remote request timeout")
      ->capture_default_str();
  app.add_option("--max-retries", run.max_retries, "retries on 429/5xx")
      ->capture_default_str();
  app.add_option("--seed", run.seed, "reserved");

  std::string file_arg, corpus_arg, scripts_arg, table_arg, ratings_arg, reports_arg;

  CLI::App* parse_cmd = app.add_subcommand("parse", "parse one script file to JSON");
  parse_cmd->add_option("file", file_arg, "script text file")->required();

  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "score corpus contents (or generated scripts) to JSONL");
  evaluate_cmd->add_option("corpus", corpus_arg, "corpus JSONL")->required();
  evaluate_cmd->add_option("--scripts", scripts_arg, "generation records JSONL to score instead");

  CLI::App* stats_cmd = app.add_subcommand("stats", "corpus token and tag statistics");
  stats_cmd->add_option("corpus", corpus_arg, "corpus JSONL")->required();

  CLI::App* gen_prompt_cmd = app.add_subcommand("gen-prompt", "emit prompt bundles as JSONL");
  gen_prompt_cmd->add_option("corpus", corpus_arg, "corpus JSONL")->required();
  gen_prompt_cmd->add_option("--kind", run.kind, "base|instr")->capture_default_str();

  CLI::App* generate_cmd = app.add_subcommand("generate", "generate scripts via a chat provider");
  generate_cmd->add_option("corpus", corpus_arg, "corpus JSONL")->required();
  generate_cmd->add_option("--kind", run.kind, "base|instr")->capture_default_str();

  CLI::App* correlate_cmd =
      app.add_subcommand("correlate", "spearman correlation of scores vs human ratings");
  correlate_cmd->add_option("table", table_arg, "benchmark table CSV")->required();
  correlate_cmd->add_option("ratings", ratings_arg, "human ratings CSV")->required();

  CLI::App* report_cmd = app.add_subcommand("report", "aggregate score reports into a table");
  report_cmd->add_option("reports", reports_arg, "score reports JSONL")->required();
  report_cmd->add_option("--group-by", run.group_by, "script|provider")->capture_default_str();

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(run, file_arg);
    if (evaluate_cmd->parsed()) return cmd_evaluate(run, corpus_arg, scripts_arg);
    if (stats_cmd->parsed()) return cmd_stats(run, corpus_arg);
    if (gen_prompt_cmd->parsed()) return cmd_gen_prompt(run, corpus_arg);
    if (generate_cmd->parsed()) return cmd_generate(run, corpus_arg);
    if (correlate_cmd->parsed()) return cmd_correlate(run, table_arg, ratings_arg);
    if (report_cmd->parsed()) return cmd_report(run, reports_arg);
  } catch (const cml::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
