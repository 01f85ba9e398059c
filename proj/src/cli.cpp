#include "freedst/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "freedst/dataset_io.hpp"
#include "freedst/error.hpp"
#include "freedst/link_eval.hpp"
#include "freedst/metrics.hpp"
#include "freedst/state_graph.hpp"
#include "freedst/state_parser.hpp"
#include "freedst/vgae.hpp"

#ifndef FREEDST_VERSION
#define FREEDST_VERSION "0.0.0"
#endif

namespace freedst::cli {

using ojson = nlohmann::ordered_json;

namespace {

void need(const std::string& value, const std::string& flag, const std::string& command) {
  if (value.empty()) throw Error(Errc::Config, command + " needs " + flag);
}

std::filesystem::path nodes_path(const RunConfig& c) { return std::filesystem::path(c.graph_dir) / "nodes.jsonl"; }
std::filesystem::path edges_path(const RunConfig& c) { return std::filesystem::path(c.graph_dir) / "edges.txt"; }

std::string meta_line(const ojson& prov) { return ojson{{"_meta", prov}}.dump(); }

CorpusManifest manifest(const RunConfig& c) {
  need(c.corpus, "--corpus", "this command");
  CorpusManifest m;
  m.format = parse_corpus_format(c.format);
  m.path = c.corpus;
  return m;
}

LoadResult load_corpus(const RunConfig& c, std::ostream& log) {
  CorpusManifest m = manifest(c);
  LoadResult r = load_dialogues(m);
  for (const auto& w : r.warnings) log << "warning: skipped " << w << '\n';
  std::sort(r.dialogues.begin(), r.dialogues.end(),
            [](const AnnotatedDialogue& a, const AnnotatedDialogue& b) { return a.dialogue_id < b.dialogue_id; });
  for (std::size_t i = 1; i < r.dialogues.size(); ++i) {
    if (r.dialogues[i].dialogue_id == r.dialogues[i - 1].dialogue_id) {
      throw Error(Errc::IdMismatch, "duplicate dialogue id '" + r.dialogues[i].dialogue_id + "' in " + c.corpus);
    }
  }
  return r;
}

// Text of every turn up to and including the given user turn (1-based).
std::vector<std::string> context_text(const AnnotatedDialogue& d, std::size_t user_turn) {
  std::vector<std::string> out;
  std::size_t seen = 0;
  for (const auto& t : d.turns) {
    if (t.speaker == Speaker::User && ++seen > user_turn) break;
    out.push_back(t.text);
  }
  return out;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.hidden_dim = c.hidden;
  t.latent_dim = c.latent;
  t.learning_rate = c.learning_rate;
  t.epochs = c.epochs;
  t.kl_weight = c.kl_weight;
  t.seed = c.seed;
  return t;
}

}  // namespace

ojson to_json(const RunConfig& c) {
  return {{"backend", c.backend},
          {"endpoint", c.endpoint},
          {"token_env", c.token_env},
          {"model", c.model},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens},
          {"timeout_ms", c.timeout_ms},
          {"retries", c.retries},
          {"backoff_ms", c.backoff_ms},
          {"replay", c.replay},
          {"keywords", c.keywords},
          {"record", c.record},
          {"jobs", c.jobs},
          {"strategy", c.strategy},
          {"anti_hallucination", c.anti_hallucination},
          {"instruction_version", kInstructionVersion},
          {"exemplars", c.exemplars},
          {"templates", c.templates},
          {"corpus", c.corpus},
          {"format", c.format},
          {"predictions", c.predictions},
          {"report", c.report},
          {"turn_mode", c.turn_mode},
          {"graph_dir", c.graph_dir},
          {"graph_source", c.graph_source},
          {"seed", c.seed},
          {"hidden", c.hidden},
          {"latent", c.latent},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"kl_weight", c.kl_weight},
          {"cv_folds", c.cv_folds},
          {"checkpoint", c.checkpoint},
          {"history", c.history},
          {"metrics", c.metrics},
          {"candidates", c.candidates},
          {"top_k", c.top_k}};
}

ojson provenance(const RunConfig& c, const std::string& command) {
  return {{"tool", "freedst"}, {"version", FREEDST_VERSION}, {"command", command}, {"config", to_json(c)}};
}

GenerationParams generation_params(const RunConfig& c) {
  GenerationParams p;
  p.temperature = c.temperature;
  p.max_tokens = c.max_tokens;
  p.model_name = c.model;
  p.timeout = std::chrono::milliseconds(c.timeout_ms);
  p.retries = c.retries;
  p.backoff_base = std::chrono::milliseconds(c.backoff_ms);
  return p;
}

std::unique_ptr<Backend> make_backend(const RunConfig& c) {
  switch (parse_backend_kind(c.backend)) {
    case BackendKind::RuleMock:
      need(c.keywords, "--keywords", "the mock backend");
      return std::make_unique<RuleMockBackend>(load_keyword_table(c.keywords));
    case BackendKind::Replay:
      need(c.replay, "--replay", "the replay backend");
      if (!std::filesystem::exists(c.replay)) throw Error(Errc::UnreadableFile, "cannot open " + c.replay);
      return std::make_unique<ReplayBackend>(c.replay);
    case BackendKind::Http: {
      need(c.endpoint, "--endpoint", "the http backend");
      HttpConfig h;
      h.base_url = c.endpoint;
      h.token_env = c.token_env;
      h.max_in_flight = std::max(1, c.jobs);
      return std::make_unique<HttpBackend>(h);
    }
  }
  throw Error(Errc::Config, "unknown backend");
}

PromptSpec prompt_spec(const RunConfig& c) {
  PromptSpec s;
  s.strategy = parse_strategy(c.strategy);
  s.anti_hallucination = c.anti_hallucination;
  if (!c.templates.empty()) s.templates = load_template_overrides(c.templates);
  if (!c.exemplars.empty()) s.exemplars = load_exemplars(c.exemplars);
  s.instruction = s.templates.instruction;
  return s;
}

namespace {

// Passes completions through and writes each one to a replay store.
class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, const std::string& path) : inner_(std::move(inner)), store_(path) {}
  BackendKind kind() const override { return inner_->kind(); }

 protected:
  std::string do_complete(std::string_view prompt, const GenerationParams& params) override {
    std::string out = complete(*inner_, prompt, params);
    replay_store(store_, prompt, out);
    return out;
  }

 private:
  std::unique_ptr<Backend> inner_;
  ReplayBackend store_;
};

struct DialogueRun {
  std::vector<PredictionRecord> records;
  std::optional<Error> failure;
};

DialogueRun extract_dialogue(const AnnotatedDialogue& d, Backend& backend, const PromptSpec& base,
                             const GenerationParams& params) {
  DialogueRun run;
  DialogueContext ctx{d.dialogue_id, {}};
  DialogueState state;
  for (const auto& turn : d.turns) {
    ctx = append_turn(ctx, turn);
    if (turn.speaker != Speaker::User) continue;
    PromptSpec spec = base;
    spec.input_text = serialize_context(ctx);
    try {
      const std::string completion = complete(backend, build_prompt(spec), params);
      ParseOutcome parsed = parse_state(completion);
      const auto triples = parsed.state.triples();
      state = accumulate_state(state, triples);
      run.records.push_back({d.dialogue_id, ctx.turn_index(), state, std::move(parsed.diagnostics)});
    } catch (const Error& e) {
      run.failure = e;
      return run;
    }
  }
  return run;
}

}  // namespace

void cmd_extract(const RunConfig& c, std::ostream& log) {
  need(c.predictions, "--predictions", "extract");
  const LoadResult corpus = load_corpus(c, log);
  const PromptSpec spec = prompt_spec(c);
  for (const auto& w : prompt_warnings(spec)) log << "warning: " << w << '\n';
  const GenerationParams params = generation_params(c);
  auto backend = make_backend(c);
  if (!c.record.empty()) backend = std::make_unique<RecordingBackend>(std::move(backend), c.record);

  const std::size_t n = corpus.dialogues.size();
  std::vector<DialogueRun> runs(n);
  std::vector<bool> done(n, false);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_failure{n};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      // Dialogues after a failure are not needed: output stops at the first failing one.
      if (i > first_failure.load()) continue;
      runs[i] = extract_dialogue(corpus.dialogues[i], *backend, spec, params);
      if (runs[i].failure) {
        std::size_t cur = first_failure.load();
        while (i < cur && !first_failure.compare_exchange_weak(cur, i)) {
        }
      }
    }
  };
  const int jobs = std::clamp(c.jobs, 1, 64);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  const std::size_t stop = first_failure.load();
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < n && i <= stop; ++i) {
    records.insert(records.end(), runs[i].records.begin(), runs[i].records.end());
  }
  ojson prov = provenance(c, "extract");
  if (stop < n) {
    const Error& e = *runs[stop].failure;
    prov["failure"] = {{"dialogue_id", corpus.dialogues[stop].dialogue_id},
                       {"completed_turns", records.size()},
                       {"error", errc_name(e.code())},
                       {"message", e.what()}};
  }
  write_predictions(c.predictions, records, prov);

  std::size_t parse_failures = 0;
  for (const auto& r : records) {
    parse_failures += std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                                  [](const Diagnostic& d) { return d.kind == DiagnosticKind::ParseFailure; });
  }
  log << "extract: " << records.size() << " turns from " << std::min(stop + 1, n) << " dialogues, "
      << parse_failures << " parse failures -> " << c.predictions << '\n';
  if (stop < n) {
    log << "extract: aborted at dialogue " << corpus.dialogues[stop].dialogue_id << " after flushing "
        << records.size() << " completed turns\n";
    throw *runs[stop].failure;
  }
}

namespace {

DialogueState delta(const DialogueState& now, const DialogueState* before) {
  if (before == nullptr) return now;
  DialogueState out;
  for (const auto& t : now.triples()) {
    if (before->value_of({t.domain(), t.slot()}) != t.value()) out.set(t);
  }
  return out;
}

}  // namespace

void cmd_evaluate(const RunConfig& c, std::ostream& log) {
  need(c.predictions, "--predictions", "evaluate");
  need(c.report, "--report", "evaluate");
  if (c.turn_mode != "cumulative" && c.turn_mode != "delta") {
    throw Error(Errc::Config, "--turn-mode must be cumulative or delta");
  }
  const bool use_delta = c.turn_mode == "delta";
  const LoadResult corpus = load_corpus(c, log);
  auto preds = read_predictions(c.predictions);

  std::map<std::pair<std::string, std::size_t>, const PredictionRecord*> by_key;
  for (const auto& r : preds) {
    if (!by_key.emplace(std::make_pair(r.dialogue_id, r.turn), &r).second) {
      throw Error(Errc::IdMismatch, "duplicate prediction for " + r.dialogue_id + " turn " + std::to_string(r.turn));
    }
  }

  std::vector<TurnPair> pairs;
  ErrorReport errors;
  std::size_t parse_failures = 0;
  std::size_t gold_turns = 0;
  for (const auto& d : corpus.dialogues) {
    if (!d.gold_states) throw Error(Errc::IdMismatch, "dialogue " + d.dialogue_id + " has no gold states");
    const auto& gold = *d.gold_states;
    for (std::size_t t = 0; t < gold.size(); ++t) {
      ++gold_turns;
      const auto it = by_key.find({d.dialogue_id, t + 1});
      if (it == by_key.end()) {
        throw Error(Errc::IdMismatch, "no prediction for " + d.dialogue_id + " turn " + std::to_string(t + 1));
      }
      const PredictionRecord& r = *it->second;
      const PredictionRecord* prev_rec = nullptr;
      if (t > 0) {
        if (auto p = by_key.find({d.dialogue_id, t}); p != by_key.end()) prev_rec = p->second;
      }
      const DialogueState pred = use_delta ? delta(r.predicted_state, prev_rec ? &prev_rec->predicted_state : nullptr)
                                           : r.predicted_state;
      const DialogueState g = use_delta ? delta(gold[t], t > 0 ? &gold[t - 1] : nullptr) : gold[t];
      pairs.push_back({pred.without_none(), g.without_none()});
      errors += classify_errors(pairs.back().predicted, pairs.back().gold, context_text(d, t + 1));
      parse_failures += std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                                    [](const Diagnostic& x) { return x.kind == DiagnosticKind::ParseFailure; });
    }
  }
  if (gold_turns != preds.size()) {
    throw Error(Errc::IdMismatch, std::to_string(preds.size()) + " predictions for " + std::to_string(gold_turns) +
                                      " gold turns");
  }

  ojson report = report_json(pairs, parse_failures, errors);
  report["averaging"] = "micro";
  report["turn_mode"] = c.turn_mode;
  report["provenance"] = provenance(c, "evaluate");
  write_json_file(c.report, report);
  log << "evaluate: jga " << report["jga"].get<double>() << ", slot f1 " << report["slot_f1"].get<double>()
      << " over " << pairs.size() << " turns -> " << c.report << '\n';
}

namespace {

std::map<std::string, std::vector<DialogueState>> states_by_dialogue(const RunConfig& c, std::ostream& log) {
  std::map<std::string, std::vector<DialogueState>> out;
  if (c.graph_source == "predictions") {
    need(c.predictions, "--predictions", "graph-source predictions");
    auto preds = read_predictions(c.predictions);
    std::stable_sort(preds.begin(), preds.end(), [](const PredictionRecord& a, const PredictionRecord& b) {
      return std::tie(a.dialogue_id, a.turn) < std::tie(b.dialogue_id, b.turn);
    });
    for (const auto& r : preds) out[r.dialogue_id].push_back(r.predicted_state.without_none());
  } else if (c.graph_source == "gold") {
    for (const auto& d : load_corpus(c, log).dialogues) {
      if (!d.gold_states) continue;
      out[d.dialogue_id] = *d.gold_states;
    }
  } else {
    throw Error(Errc::Config, "--graph-source must be gold or predictions");
  }
  return out;
}

StateGraph load_graph(const RunConfig& c) {
  need(c.graph_dir, "--graph-dir", "this command");
  return read_graph(nodes_path(c), edges_path(c));
}

}  // namespace

void cmd_graph(const RunConfig& c, std::ostream& log) {
  need(c.graph_dir, "--graph-dir", "graph");
  const auto by_dialogue = states_by_dialogue(c, log);
  std::vector<DialogueState> states;
  for (const auto& [_, s] : by_dialogue) states.insert(states.end(), s.begin(), s.end());
  const StateGraph g = build_graph(states);
  if (g.edge_count() == 0) throw Error(Errc::TooFewEdges, "no triples to build a graph from");

  std::filesystem::create_directories(c.graph_dir);
  const ojson prov = provenance(c, "graph");
  write_node_table(nodes_path(c), g, meta_line(prov));
  write_edge_list(edges_path(c), g, prov.dump());
  log << "graph: " << g.domain_nodes().size() << " domains, " << g.slot_value_nodes().size() << " slot-values, "
      << g.edge_count() << " edges -> " << c.graph_dir << '\n';
}

void cmd_train(const RunConfig& c, std::ostream& log) {
  need(c.checkpoint, "--checkpoint", "train");
  const StateGraph g = load_graph(c);
  const TrainConfig tc = train_config(c);
  tc.validate();
  const EdgeSplit split = split_edges(g, SplitFractions{}, c.seed);
  const TrainResult trained = train(g, split, tc);
  const LinkScores test = evaluate_split(trained.params, g, split);
  const ojson prov = provenance(c, "train");

  save_checkpoint(c.checkpoint, {trained.params, tc, g.node_count()}, prov);

  if (!c.history.empty()) {
    std::ofstream out(c.history, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + c.history);
    out << meta_line(prov) << '\n';
    for (const auto& e : trained.history) {
      ojson j = {{"epoch", e.epoch}, {"bce", e.bce}, {"kl", e.kl}, {"total", e.total}};
      j["val_auc"] = e.val_auc ? ojson(*e.val_auc) : ojson(nullptr);
      out << j.dump() << '\n';
    }
    if (!out) throw Error(Errc::IoError, "write failed for " + c.history);
  }

  ojson metrics;
  metrics["eval_set"] = "test";
  metrics["test_auc"] = test.auc;
  metrics["test_ap"] = test.ap;
  metrics["split"] = {{"seed", split.seed},
                      {"train", split.train.size()},
                      {"val", split.val.size()},
                      {"test", split.test.size()},
                      {"neg_val", split.neg_val.size()},
                      {"neg_test", split.neg_test.size()}};
  if (!trained.history.empty()) {
    const auto& last = trained.history.back();
    metrics["final_loss"] = {{"bce", last.bce}, {"kl", last.kl}, {"total", last.total}};
  }
  if (c.cv_folds > 0) {
    const CvReport cv = cross_validate(g, c.cv_folds, tc);
    metrics["cv"] = to_json(cv);
    metrics["cv"]["eval_set"] = "cv-folds";
    log << "train: " << c.cv_folds << "-fold cv mean auc " << cv.mean_auc << ", mean ap " << cv.mean_ap << '\n';
  }
  metrics["provenance"] = prov;
  if (!c.metrics.empty()) write_json_file(c.metrics, metrics);
  log << "train: test auc " << test.auc << ", ap " << test.ap << " -> " << c.checkpoint << '\n';
}

namespace {

Checkpoint checkpoint_for(const RunConfig& c, const StateGraph& g) {
  Checkpoint ckpt = load_checkpoint(c.checkpoint);
  if (ckpt.node_count != g.node_count() || ckpt.params.n_features() != g.node_count()) {
    throw Error(Errc::Checkpoint, "checkpoint was trained on " + std::to_string(ckpt.node_count) +
                                      " nodes but the graph has " + std::to_string(g.node_count()));
  }
  return ckpt;
}

}  // namespace

void cmd_predict(const RunConfig& c, std::ostream& log) {
  need(c.checkpoint, "--checkpoint", "predict");
  need(c.candidates, "--candidates", "predict");
  if (c.top_k == 0) throw Error(Errc::Config, "--top-k must be positive");
  const StateGraph g = load_graph(c);
  const Checkpoint ckpt = checkpoint_for(c, g);
  const auto by_dialogue = states_by_dialogue(c, log);

  std::ofstream out(c.candidates, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + c.candidates);
  out << meta_line(provenance(c, "predict")) << '\n';
  std::size_t written = 0;
  for (const auto& [id, states] : by_dialogue) {
    const NodeSet ns = dialogue_node_set(g, states);
    if (ns.nodes.empty()) {
      log << "warning: " << id << " has no nodes in the graph; skipped\n";
      continue;
    }
    const auto ranked = rank_candidates(ckpt.params, g, ns.nodes, c.top_k);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      out << candidate_json(g, ranked[r], id, r + 1).dump() << '\n';
      ++written;
    }
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + c.candidates);
  log << "predict: " << written << " candidates for " << by_dialogue.size() << " dialogues -> " << c.candidates
      << '\n';
}

void cmd_repl(const RunConfig& c, std::istream& in, std::ostream& out) {
  auto backend = make_backend(c);
  const PromptSpec base = prompt_spec(c);
  const GenerationParams params = generation_params(c);
  std::optional<StateGraph> graph;
  std::optional<Checkpoint> ckpt;
  if (!c.checkpoint.empty()) {
    graph = load_graph(c);
    ckpt = checkpoint_for(c, *graph);
  }

  DialogueContext ctx{"repl", {}};
  DialogueState state;
  std::string line;
  while (std::getline(in, line)) {
    if (line == ":reset") {
      ctx = {"repl", {}};
      state = {};
      out << "(new dialogue)\n";
      continue;
    }
    try {
      ctx = append_turn(ctx, {Speaker::User, line});
    } catch (const Error&) {
      continue;  // blank line
    }
    PromptSpec spec = base;
    spec.input_text = serialize_context(ctx);
    ParseOutcome parsed;
    try {
      parsed = parse_state(complete(*backend, build_prompt(spec), params));
    } catch (const Error& e) {
      out << "! " << errc_name(e.code()) << ": " << e.what() << '\n';
      continue;
    }
    for (const auto& d : parsed.diagnostics) out << "! " << diagnostic_kind_name(d.kind) << ": " << d.detail << '\n';
    state = accumulate_state(state, parsed.state.triples());
    out << format_state(state) << '\n';

    if (graph) {
      const std::vector<DialogueState> states{state};
      const NodeSet ns = dialogue_node_set(*graph, states);
      if (ns.nodes.empty()) continue;
      for (const auto& cand : rank_candidates(ckpt->params, *graph, ns.nodes, c.top_k)) {
        out << format_candidate(*graph, cand) << '\n';
      }
    }
  }
}

namespace {

void add_options(CLI::App& app, RunConfig& c) {
  app.option_defaults()->always_capture_default();
  auto* g = "Backend";
  app.add_option("--backend", c.backend, "http, replay or mock")->group(g);
  app.add_option("--endpoint", c.endpoint, "chat-completions base URL, e.g. https://host/v1")->group(g);
  app.add_option("--token-env", c.token_env, "environment variable holding the API token")->group(g);
  app.add_option("--model", c.model)->group(g);
  app.add_option("--temperature", c.temperature)->group(g);
  app.add_option("--max-tokens", c.max_tokens)->group(g);
  app.add_option("--timeout-ms", c.timeout_ms, "per-attempt timeout")->group(g);
  app.add_option("--retries", c.retries)->group(g);
  app.add_option("--backoff-ms", c.backoff_ms)->group(g);
  app.add_option("--replay", c.replay, "replay store (JSONL)")->group(g);
  app.add_option("--keywords", c.keywords, "keyword table for the mock backend (JSONL)")->group(g);
  app.add_option("--record", c.record, "extract: record completions into a replay store")->group(g);
  app.add_option("--jobs", c.jobs, "dialogues extracted concurrently")->group(g);

  g = "Prompt";
  app.add_option("--strategy", c.strategy, "cot, cot-persona1..3, self-discover, tot")->group(g);
  app.add_option("--anti-hallucination", c.anti_hallucination)->group(g);
  app.add_option("--exemplars", c.exemplars, "few-shot exemplars (JSONL)")->group(g);
  app.add_option("--templates", c.templates, "prompt template overrides")->group(g);

  g = "Data";
  app.add_option("--corpus", c.corpus)->group(g);
  app.add_option("--format", c.format, "plain-jsonl, multiwoz-json or sgd-json")->group(g);
  app.add_option("--predictions", c.predictions)->group(g);
  app.add_option("--report", c.report)->group(g);
  app.add_option("--turn-mode", c.turn_mode, "cumulative or delta")->group(g);
  app.add_option("--graph-dir", c.graph_dir)->group(g);
  app.add_option("--graph-source", c.graph_source, "gold or predictions")->group(g);

  g = "Model";
  app.add_option("--seed", c.seed)->group(g);
  app.add_option("--hidden", c.hidden)->group(g);
  app.add_option("--latent", c.latent)->group(g);
  app.add_option("--learning-rate", c.learning_rate)->group(g);
  app.add_option("--epochs", c.epochs)->group(g);
  app.add_option("--kl-weight", c.kl_weight)->group(g);
  app.add_option("--cv-folds", c.cv_folds, "also run k-fold cross-validation (0: off)")->group(g);
  app.add_option("--checkpoint", c.checkpoint)->group(g);
  app.add_option("--history", c.history)->group(g);
  app.add_option("--metrics", c.metrics)->group(g);
  app.add_option("--candidates", c.candidates)->group(g);
  app.add_option("--top-k", c.top_k)->group(g);
}

int exit_code(const Error& e) { return is_backend_error(e.code()) ? kBackendError : kUserError; }

// Config keys may be spelled with underscores; option names use dashes.
class DashedConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items) std::replace(item.name.begin(), item.name.end(), '_', '-');
    return items;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ontology-free dialogue state tracking and next-state prediction", "freedst"};
  app.set_version_flag("--version", FREEDST_VERSION);
  app.set_config("--config", "", "key = value configuration file; flags override it");
  app.config_formatter(std::make_shared<DashedConfig>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig c;
  add_options(app, c);
  auto* extract = app.add_subcommand("extract", "prompt the backend for every user turn of a corpus");
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against corpus gold states");
  auto* graph = app.add_subcommand("graph", "build the domain / slot-value graph");
  auto* train_cmd = app.add_subcommand("train", "train the graph auto-encoder");
  auto* predict = app.add_subcommand("predict", "rank next-state candidates per dialogue");
  auto* repl = app.add_subcommand("repl", "track a dialogue typed line by line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*extract) cmd_extract(c, err);
    else if (*evaluate) cmd_evaluate(c, err);
    else if (*graph) cmd_graph(c, err);
    else if (*train_cmd) cmd_train(c, err);
    else if (*predict) cmd_predict(c, err);
    else if (*repl) cmd_repl(c, in, out);
    return kOk;
  } catch (const Error& e) {
    err << "error [" << errc_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [io-error]: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace freedst::cli
