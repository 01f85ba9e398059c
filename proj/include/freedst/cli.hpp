#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include <json.hpp>

#include "freedst/llm_backend.hpp"
#include "freedst/prompt_engine.hpp"

namespace freedst::cli {

/// Everything a run depends on. Paths are kept exactly as given so that reports
/// written from the same invocation are byte-identical across machines.
struct RunConfig {
  // backend
  std::string backend = "mock";
  std::string endpoint;
  std::string token_env = "FREEDST_API_KEY";
  std::string model = "llama3-8b-dst";
  double temperature = 0.0;
  int max_tokens = 512;
  int timeout_ms = 30000;
  int retries = 2;
  int backoff_ms = 500;
  std::string replay;
  std::string keywords;
  std::string record;  // extract: also store every completion into this replay file
  int jobs = 1;

  // prompting
  std::string strategy = "cot-persona2";
  bool anti_hallucination = true;
  std::string exemplars;
  std::string templates;

  // data
  std::string corpus;
  std::string format = "plain-jsonl";
  std::string predictions;
  std::string report;
  std::string turn_mode = "cumulative";
  std::string graph_dir;
  std::string graph_source = "gold";

  // model
  std::uint64_t seed = 42;
  std::size_t hidden = 32;
  std::size_t latent = 16;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  double kl_weight = 1.0;
  std::size_t cv_folds = 0;
  std::string checkpoint;
  std::string history;
  std::string metrics;
  std::string candidates;
  std::size_t top_k = 3;
};

nlohmann::ordered_json to_json(const RunConfig& c);

/// {"tool", "version", "command", "config"} block embedded in every output file.
nlohmann::ordered_json provenance(const RunConfig& c, const std::string& command);

std::unique_ptr<Backend> make_backend(const RunConfig& c);
GenerationParams generation_params(const RunConfig& c);
PromptSpec prompt_spec(const RunConfig& c);

void cmd_extract(const RunConfig& c, std::ostream& log);
void cmd_evaluate(const RunConfig& c, std::ostream& log);
void cmd_graph(const RunConfig& c, std::ostream& log);
void cmd_train(const RunConfig& c, std::ostream& log);
void cmd_predict(const RunConfig& c, std::ostream& log);
/// One user utterance per input line until end of input. ":reset" starts a new dialogue.
void cmd_repl(const RunConfig& c, std::istream& in, std::ostream& out);

enum ExitCode : int { kOk = 0, kUserError = 1, kBackendError = 2, kInternalError = 3 };

/// Parses arguments, dispatches, and maps failures to exit codes. Never throws.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace freedst::cli
