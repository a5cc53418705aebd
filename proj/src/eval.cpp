// SPDX-License-Identifier: Apache-2.0
#include "fcagent/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <random>
#include <sstream>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "fcagent/kernels.hpp"
#include "fcagent/litreview_model.hpp"
#include "fcagent/util.hpp"

namespace fcagent {

namespace fs = std::filesystem;

// ---- synthetic corpus -------------------------------------------------------

namespace {

// Filler words: lowercase, no digits, nothing the simulated reader treats as
// a finding, nothing that appears in the review layout.
constexpr std::array kFiller = {
    "analysis",   "approach",  "baseline",   "behaviour", "careful",    "changes",   "coarse",     "common",
    "compared",   "condition", "consistent", "context",   "current",    "data",      "design",     "detailed",
    "different",  "direct",    "early",      "effect",    "estimate",   "evidence",  "examined",   "expected",
    "framework",  "further",   "general",    "given",     "group",      "however",   "important",  "improved",
    "initial",    "large",     "later",      "limited",   "measured",   "method",    "model",      "moreover",
    "observed",   "overall",   "pattern",    "period",    "possible",   "practical", "previous",   "process",
    "proposed",   "quality",   "range",      "rather",    "recent",     "reported",  "response",   "result",
    "sample",     "second",    "setting",    "several",   "signal",     "similar",   "simple",     "small",
    "specific",   "standard",  "structure",  "studied",   "suggests",   "system",    "therefore",  "thus",
    "typical",    "under",     "useful",     "various",   "while",      "within",    "without",    "work",
    "across",     "along",     "between",    "during",    "each",       "often",     "their",      "these",
    "this",       "which",     "with",       "from",      "into",       "over",      "that",       "the",
    "a",          "an",        "and",        "or",        "of",         "in",        "on",         "to",
    "is",         "are",       "was",        "were",      "be",         "has",       "have",       "by"};

constexpr std::array kFactAdj = {"calibrated", "hybrid", "sparse", "layered", "modular",  "thermal",
                                 "adaptive",   "robust", "linear", "nested",  "granular", "coupled"};
constexpr std::array kFactNoun = {"estimator", "catalyst", "lattice", "pipeline", "sensor", "compiler",
                                  "scheduler", "membrane", "solver",  "cohort",   "antenna", "reactor"};
constexpr std::array kFactVerb = {"retained", "reached", "exceeded", "required", "sustained",
                                  "logged",   "yielded", "tolerated", "averaged"};
constexpr std::array kFactUnit = {"kelvin", "samples", "cycles", "hertz", "percent", "trials", "nodes", "volts"};

constexpr std::array kTitleHead = {"Towards",     "Revisiting", "Understanding", "Scaling",
                                   "Benchmarking", "Rethinking", "Learning",      "Measuring"};
constexpr std::array kTitleTopic = {"Wavelet",   "Quantum",  "Federated", "Protein", "Spectral", "Causal",
                                    "Graphical", "Symbolic", "Stochastic", "Neural", "Optical",  "Acoustic"};
constexpr std::array kTitleObject = {"Priors",    "Kernels",  "Embeddings", "Surrogates", "Schedules",
                                     "Manifolds", "Ensembles", "Operators", "Retrievers", "Controllers"};
constexpr std::array kSurnames = {"Okafor", "Lindqvist", "Haddad",   "Moreau", "Tanaka",  "Novak",
                                  "Sarkar", "Whitfield", "Castillo", "Ivanova", "Mensah", "Zhou"};
constexpr std::array kVenues = {"Journal of Applied Inquiry", "Proceedings of Systems Design", "Review Letters",
                                "Transactions on Methods", "Annals of Computation"};

template <typename Rng, typename Array>
std::string pick(Rng& rng, const Array& words) {
  return words[rng() % words.size()];
}

std::string filler_sentence(std::mt19937_64& rng) {
  const std::size_t len = 8 + rng() % 9;
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    std::string w = pick(rng, kFiller);
    if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (!s.empty()) s += ' ';
    s += w;
    if (i + 1 < len && i > 2 && rng() % 11 == 0) s += ',';
  }
  return s + ".";
}

}  // namespace

std::string item_id(std::size_t index) { return fmt::format("item-{:03}", index + 1); }

std::vector<PlantedItem> synthesize_corpus(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("corpus needs at least one item");
  std::vector<PlantedItem> out;
  out.reserve(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::mt19937_64 rng(stable_hash(item_id(idx), seed));
    PlantedItem p;
    p.item.id = item_id(idx);
    p.item.title = fmt::format("{} {} {} for {} Data", pick(rng, kTitleHead), pick(rng, kTitleTopic),
                               pick(rng, kTitleObject), pick(rng, kTitleTopic));
    nlohmann::json authors = nlohmann::json::array();
    for (int a = 0; a < 2; ++a) authors.push_back(fmt::format("{}. {}", static_cast<char>('A' + rng() % 26), pick(rng, kSurnames)));
    p.item.metadata = {{"authors", authors},
                       {"year", 1995 + static_cast<int>(rng() % 30)},
                       {"venue", pick(rng, kVenues)},
                       {"keywords", {pick(rng, kTitleTopic), pick(rng, kTitleObject)}}};

    const std::size_t n_facts = kMinFacts + rng() % 2;
    for (std::size_t j = 0; j < n_facts; ++j) {
      // the number is unique across the corpus, which makes every fact unique
      std::string fact = fmt::format("Notably, the {} {} {} {} {}.", pick(rng, kFactAdj), pick(rng, kFactNoun),
                                     pick(rng, kFactVerb), 1000 + idx * 8 + j, pick(rng, kFactUnit));
      if (fact.size() > kMaxFactChars) {
        throw std::logic_error("planted fact exceeds its length bound: " + fact);
      }
      p.facts.push_back(std::move(fact));
    }

    std::vector<std::string> sentences;
    std::size_t chars = 0;
    while (chars < kMinBodyChars) {
      sentences.push_back(filler_sentence(rng));
      chars += sentences.back().size() + 1;
    }
    // spread the facts over the body; the pseudo-text alone already meets the
    // length floor
    for (std::size_t j = 0; j < p.facts.size(); ++j) {
      const std::size_t slot = (sentences.size() * (2 * j + 1)) / (2 * p.facts.size()) + rng() % 5;
      sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(std::min(slot, sentences.size())), p.facts[j]);
    }
    std::string body;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      body += sentences[s];
      body += (s % 7 == 6) ? "\n\n" : " ";
    }
    p.item.body = trim(body) + "\n";
    out.push_back(std::move(p));
  }
  return out;
}

void write_corpus(const std::vector<PlantedItem>& items, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& p : items) write_corpus_item(dir, p.item);
}

Corpus generate_corpus(std::size_t n, std::uint64_t seed, const fs::path& dir) {
  write_corpus(synthesize_corpus(n, seed), dir);
  return Corpus::load(dir);
}

// ---- groundedness judge ---------------------------------------------------------

std::vector<std::string> judge_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(c));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::string spaced(const std::vector<std::string>& tokens, std::size_t first, std::size_t count) {
  std::string s = " ";
  for (std::size_t i = first; i < first + count; ++i) {
    s += tokens[i];
    s += ' ';
  }
  return s;
}

void collect_strings(const nlohmann::json& j, std::vector<std::string>& out) {
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_number() || j.is_boolean()) {
    out.push_back(j.dump());
  } else if (j.is_structured()) {
    for (const auto& [key, value] : j.items()) {
      if (j.is_object()) out.push_back(key);
      collect_strings(value, out);
    }
  }
}

}  // namespace

JudgeIndex::JudgeIndex(const CorpusItem& item) : id_(item.id) {
  const auto body = judge_tokens(item.body);
  body_ = spaced(body, 0, body.size());
  std::vector<std::string> segments{item.title};
  collect_strings(item.metadata, segments);
  for (const auto& seg : segments) {
    const auto t = judge_tokens(seg);
    if (!t.empty()) excluded_.push_back(spaced(t, 0, t.size()));
  }
}

bool JudgeIndex::in_body(const std::vector<std::string>& tokens, std::size_t first, std::size_t count) const {
  return body_.find(spaced(tokens, first, count)) != std::string::npos;
}

bool JudgeIndex::in_title_or_metadata(const std::vector<std::string>& tokens, std::size_t first,
                                      std::size_t count) const {
  const auto needle = spaced(tokens, first, count);
  return std::any_of(excluded_.begin(), excluded_.end(),
                     [&](const std::string& seg) { return seg.find(needle) != std::string::npos; });
}

GroundednessJudgment judge_grounded(std::string_view summary, const JudgeIndex& index, std::size_t min_chars) {
  GroundednessJudgment j;
  j.item_id = index.item_id();
  const auto body = trim(summary);
  j.summary_present = !body.empty() && body.size() >= std::max<std::size_t>(min_chars, 1);
  if (!j.summary_present) return j;
  const auto tokens = judge_tokens(body);
  constexpr std::size_t kRun = 4;
  for (std::size_t i = 0; i + kRun <= tokens.size(); ++i) {
    if (!index.in_body(tokens, i, kRun) || index.in_title_or_metadata(tokens, i, kRun)) continue;
    std::size_t len = kRun;
    while (i + len < tokens.size() && index.in_body(tokens, i, len + 1)) ++len;
    j.grounded = true;
    const auto s = spaced(tokens, i, len);
    j.evidence_span = s.substr(1, s.size() - 2);
    break;
  }
  return j;
}

GroundednessJudgment judge_grounded(std::string_view summary, const CorpusItem& item, std::size_t min_chars) {
  return judge_grounded(summary, JudgeIndex(item), min_chars);
}

// ---- review files ----------------------------------------------------------------

std::string review_path(std::string_view item_id) { return fmt::format("artifacts/reviews/{}.md", item_id); }

std::string render_review(std::string_view summary, int relevance) {
  std::string flat(summary);
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  return fmt::format("Summary: {}\nRelevance: {}\n", trim(flat), relevance);
}

Review parse_review(std::string_view text) {
  Review r;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("Summary:", 0) == 0 && r.summary.empty()) {
      r.summary = trim(std::string_view(line).substr(8));
    } else if (line.rfind("Relevance:", 0) == 0 && !r.relevance) {
      try {
        r.relevance = std::stoi(trim(std::string_view(line).substr(10)));
      } catch (const std::exception&) {
      }
    }
  }
  return r;
}

// ---- protocol ------------------------------------------------------------------

void LitReviewConfig::validate() const {
  if (n_items < 1) throw std::invalid_argument("n_items must be >= 1");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (context_budget < kMinContextBudget) {
    throw std::invalid_argument(fmt::format("context_budget must be >= {}", kMinContextBudget));
  }
  if (window_capacity < 1) throw std::invalid_argument("window size must be >= 1");
  if (step_limit < 1) throw std::invalid_argument("step_limit must be >= 1");
  if (context_limit == 0) throw std::invalid_argument("context_limit must be positive");
}

nlohmann::json LitReviewConfig::to_json() const {
  return {{"n_items", n_items},
          {"runs", runs},
          {"mode", std::string(fcagent::to_string(mode))},
          {"seed", seed},
          {"per_item_summary_min", per_item_summary_min},
          {"context_budget", context_budget},
          {"context_limit", context_limit},
          {"on_overflow", on_overflow == OverflowPolicy::truncate_head ? "truncate_head" : "error"},
          {"window", window_capacity},
          {"consolidation_interval", consolidation_interval},
          {"step_limit", step_limit},
          {"model", model}};
}

std::string litreview_objective(const std::vector<std::string>& item_ids) {
  std::string ids;
  for (const auto& id : item_ids) {
    if (!ids.empty()) ids += ' ';
    ids += id;
  }
  return fmt::format(
      "Literature review. For every item below: (i) read it with answer_from_document "
      "(doc = item id, source = corpus), (ii) write a short summary and (iii) assign a relevance score "
      "from 1 to 5. Save each review to artifacts/reviews/<item id>.md as exactly two lines, "
      "\"Summary: <text>\" and \"Relevance: <score>\". Keep the cursor line of plan.md pointing at the "
      "next item to review (NEXT: <item id>, or NEXT: DONE at the end). Finish when every item is reviewed.\n"
      "ITEMS: {}",
      ids);
}

Hierarchy litreview_hierarchy(const LitReviewConfig& cfg) {
  AgentSpec alpha;
  alpha.agent_id = "orchestrator";
  alpha.level = AgentLevel::alpha;
  alpha.role_preamble = "You coordinate a literature review over a fixed corpus. The workspace is your memory.";
  alpha.allowed_tools = {"answer_from_document", "write_file", "read_file", "list_dir", "search"};
  alpha.step_limit = cfg.step_limit;
  alpha.context_budget = cfg.context_budget;
  return Hierarchy({alpha});
}

BackendFactory default_backend_factory(const LitReviewConfig& cfg) {
  return [limit = cfg.context_limit, policy = cfg.on_overflow, seed = cfg.seed](std::size_t run) {
    return std::unique_ptr<Backend>(make_litreview_backend(limit, policy, stable_hash(fmt::format("run-{}", run), seed)));
  };
}

CoverageReport CoverageReport::aggregate(ExecutionMode mode, std::string model, std::size_t n_items,
                                         std::vector<RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("coverage report needs at least one run");
  CoverageReport r;
  r.mode = mode;
  r.model = std::move(model);
  r.n_items = n_items;
  r.runs = std::move(runs);
  double sum = 0;
  for (const auto& run : r.runs) {
    r.per_run_coverage.push_back(run.coverage);
    sum += static_cast<double>(run.coverage);
    if (run.crashed) ++r.crashes;
  }
  r.max = *std::max_element(r.per_run_coverage.begin(), r.per_run_coverage.end());
  r.min = *std::min_element(r.per_run_coverage.begin(), r.per_run_coverage.end());
  const auto n = static_cast<double>(r.per_run_coverage.size());
  r.avg = sum / n;
  double sq = 0;
  for (auto c : r.per_run_coverage) sq += (static_cast<double>(c) - r.avg) * (static_cast<double>(c) - r.avg);
  r.variance = sq / n;
  return r;
}

nlohmann::json CoverageReport::to_json() const {
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& run : runs) {
    nlohmann::json grounded = nlohmann::json::array();
    for (const auto& j : run.judgments) {
      if (j.grounded) grounded.push_back(j.item_id);
    }
    runs_json.push_back({{"run", run.run_index},
                         {"task_id", run.task_id},
                         {"coverage", run.coverage},
                         {"outcome", std::string(fcagent::to_string(run.outcome))},
                         {"steps", run.steps},
                         {"crashed", run.crashed},
                         {"crash_reason", run.crash_reason},
                         {"resumed", run.resumed},
                         {"grounded_items", grounded}});
  }
  return {{"config", config},
          {"per_run", runs_json},
          {"aggregate",
           {{"mode", std::string(fcagent::to_string(mode))},
            {"model", model},
            {"n_items", n_items},
            {"per_run_coverage", per_run_coverage},
            {"max", max},
            {"min", min},
            {"avg", avg},
            {"variance", variance},
            {"crashes", crashes}}}};
}

nlohmann::json AblationReport::to_json() const {
  return {{"file_centric", file_centric.to_json()},
          {"compressed_context", compressed.to_json()},
          {"gap", gap},
          {"variance", {{"file_centric", file_centric.variance}, {"compressed_context", compressed.variance}}}};
}

std::vector<GroundednessJudgment> score_workspace(const Workspace& ws, const std::vector<JudgeIndex>& index,
                                                  std::size_t min_chars) {
  std::vector<GroundednessJudgment> out;
  out.reserve(index.size());
  for (const auto& item : index) {
    const auto path = review_path(item.item_id());
    const std::string summary = ws.contains(path) ? parse_review(ws.read(path)).summary : std::string{};
    out.push_back(judge_grounded(summary, item, min_chars));
  }
  return out;
}

namespace {

std::vector<JudgeIndex> build_index(const Corpus& corpus, std::size_t n_items) {
  std::vector<JudgeIndex> index;
  for (std::size_t i = 0; i < corpus.size() && i < n_items; ++i) index.emplace_back(corpus.items()[i]);
  return index;
}

std::vector<std::string> summaries_of(const Workspace& ws, const std::vector<JudgeIndex>& index) {
  std::vector<std::string> out;
  for (const auto& item : index) {
    const auto path = review_path(item.item_id());
    out.push_back(ws.contains(path) ? parse_review(ws.read(path)).summary : std::string{});
  }
  return out;
}

std::size_t count_grounded(const std::vector<GroundednessJudgment>& js) {
  return static_cast<std::size_t>(std::count_if(js.begin(), js.end(), [](const auto& j) { return j.grounded; }));
}

// A run minus its scoring, which the callers do in bulk or inline.
RunResult execute_run(const LitReviewConfig& cfg, std::size_t run_index, const Corpus& corpus,
                      const Hierarchy& hierarchy, Backend& backend, std::optional<std::uint64_t> interrupt_at,
                      const std::vector<JudgeIndex>& index, std::vector<std::string>& summaries) {
  RunResult result;
  result.run_index = run_index;
  result.task_id = fmt::format("{}-run-{:03}", fcagent::to_string(cfg.mode), run_index);
  const WorkspaceOptions wopts{cfg.sync};
  fs::create_directories(cfg.workspace_root);
  fs::remove_all(cfg.workspace_root / result.task_id);

  std::vector<std::string> ids;
  for (const auto& item : index) ids.push_back(item.item_id());
  const auto objective = litreview_objective(ids);
  const auto tools = make_builtin_registry();

  EngineOptions opts;
  opts.window_capacity = cfg.window_capacity;
  opts.consolidation.interval_steps = cfg.consolidation_interval;
  opts.mode = cfg.mode;
  opts.verbose_contexts = cfg.verbose_contexts;
  opts.interrupt_at_step = interrupt_at;

  std::optional<Workspace> ws;
  try {
    ws.emplace(Workspace::init(cfg.workspace_root, result.task_id, false, wopts));
    nlohmann::json meta = cfg.to_json();
    meta["objective"] = objective;
    meta["run_index"] = run_index;
    write_file_atomic(ws->run_metadata(), meta.dump(2) + "\n", cfg.sync);
    try {
      Engine engine(hierarchy, tools, *ws, backend, opts, &corpus);
      const auto outcome = engine.run(objective);
      result.outcome = outcome.status;
      result.steps = outcome.steps_used;
    } catch (const Interrupted& e) {
      // simulated crash: nothing in memory survives, only the directory
      spdlog::info("{}: {}", result.task_id, e.what());
      ws.reset();
      ws.emplace(Workspace::resume(cfg.workspace_root, result.task_id, wopts));
      opts.interrupt_at_step.reset();
      Engine engine(hierarchy, tools, *ws, backend, opts, &corpus);
      const auto outcome = engine.resume(objective);
      result.outcome = outcome.status;
      result.steps = outcome.steps_used;
      result.resumed = true;
    }
  } catch (const std::exception& e) {
    result.crashed = true;
    result.crash_reason = e.what();
    spdlog::warn("{}: run crashed: {}", result.task_id, e.what());
  }
  if (ws) {
    summaries = summaries_of(*ws, index);
  } else {
    summaries.assign(index.size(), std::string{});
  }
  return result;
}

}  // namespace

RunResult run_litreview_once(const LitReviewConfig& cfg, std::size_t run_index, const Corpus& corpus,
                             const Hierarchy& hierarchy, Backend& backend, std::optional<std::uint64_t> interrupt_at) {
  cfg.validate();
  const auto index = build_index(corpus, cfg.n_items);
  std::vector<std::string> summaries;
  auto result = execute_run(cfg, run_index, corpus, hierarchy, backend, interrupt_at, index, summaries);
  result.judgments = kernels::judge_serial(index, {summaries}, cfg.per_item_summary_min).front();
  result.coverage = count_grounded(result.judgments);
  return result;
}

CoverageReport run_litreview(const LitReviewConfig& cfg, const Hierarchy& hierarchy, const BackendFactory& factory) {
  cfg.validate();
  const auto corpus_dir = cfg.corpus_dir.empty() ? cfg.workspace_root / "corpus" : cfg.corpus_dir;
  const Corpus corpus = generate_corpus(cfg.n_items, cfg.seed, corpus_dir);
  const auto index = build_index(corpus, cfg.n_items);

  std::vector<RunResult> results(cfg.runs);
  kernels::SummaryGrid summaries(cfg.runs);
  auto one = [&](std::size_t r) {
    try {
      auto backend = factory(r);
      results[r] = execute_run(cfg, r, corpus, hierarchy, *backend, std::nullopt, index, summaries[r]);
    } catch (const std::exception& e) {
      results[r].run_index = r;
      results[r].crashed = true;
      results[r].crash_reason = e.what();
      summaries[r].assign(index.size(), std::string{});
    }
  };
  if (cfg.parallel) {
    kernels::for_each_parallel(cfg.runs, one);
  } else {
    kernels::for_each_serial(cfg.runs, one);
  }

  const auto judgments = cfg.parallel ? kernels::judge_parallel(index, summaries, cfg.per_item_summary_min)
                                      : kernels::judge_serial(index, summaries, cfg.per_item_summary_min);
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    results[r].judgments = judgments[r];
    results[r].coverage = count_grounded(judgments[r]);
  }
  auto report = CoverageReport::aggregate(cfg.mode, cfg.model, cfg.n_items, std::move(results));
  report.config = cfg.to_json();
  return report;
}

CoverageReport run_litreview(const LitReviewConfig& cfg) {
  return run_litreview(cfg, litreview_hierarchy(cfg), default_backend_factory(cfg));
}

AblationReport run_ablation_pair(const LitReviewConfig& cfg, const Hierarchy& hierarchy,
                                 const BackendFactory& factory) {
  if (cfg.runs < 3) throw std::invalid_argument("an ablation pair needs at least 3 runs");
  AblationReport out;
  auto file_cfg = cfg;
  file_cfg.mode = ExecutionMode::file_centric;
  auto comp_cfg = cfg;
  comp_cfg.mode = ExecutionMode::compressed_context;
  out.file_centric = run_litreview(file_cfg, hierarchy, factory);
  out.compressed = run_litreview(comp_cfg, hierarchy, factory);
  out.gap = out.file_centric.avg - out.compressed.avg;
  return out;
}

AblationReport run_ablation_pair(const LitReviewConfig& cfg) {
  return run_ablation_pair(cfg, litreview_hierarchy(cfg), default_backend_factory(cfg));
}

std::string render_table(const std::vector<CoverageReport>& reports) {
  std::string out = "| Setting | Model | Max | Min | Avg |\n|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    const char* setting =
        r.mode == ExecutionMode::file_centric ? "File-centric state" : "No file state (compressed context)";
    out += fmt::format("| {} | {} | {} | {} | {:.1f} |\n", setting, r.model, r.max, r.min, r.avg);
  }
  return out;
}

ContainmentResult scan_context_logs(const Corpus& corpus, const std::vector<fs::path>& logs, bool parallel) {
  std::vector<std::string> bodies;
  for (const auto& item : corpus.items()) bodies.push_back(item.body);
  const kernels::ContainmentIndex index(std::move(bodies));

  ContainmentResult out;
  std::vector<std::string> texts;
  std::vector<std::string> labels;
  for (const auto& path : logs) {
    for (auto& e : ContextLog::read(path)) {
      if (e.session == session::kReader) continue;
      if (!e.text) {
        ++out.unscanned;
        continue;
      }
      labels.push_back(fmt::format("{} step {} {} attempt {}", path.string(), e.step, e.session, e.attempt));
      texts.push_back(std::move(*e.text));
    }
  }
  out.scanned = texts.size();
  const auto hits = parallel ? kernels::scan_parallel(index, texts) : kernels::scan_serial(index, texts);
  for (const auto& h : hits) {
    out.violations.push_back(fmt::format("{}: offset {} matches {} at {}", labels[h.text], h.offset,
                                         corpus.items()[h.document].id, h.doc_offset));
  }
  return out;
}

}  // namespace fcagent
