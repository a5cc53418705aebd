// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcagent/backend.hpp"
#include "fcagent/corpus.hpp"
#include "fcagent/engine.hpp"
#include "fcagent/hierarchy.hpp"
#include "fcagent/mock_backend.hpp"

namespace fcagent {

// ---- synthetic corpus -------------------------------------------------------

struct PlantedItem {
  CorpusItem item;
  std::vector<std::string> facts;  // "Notably, ..." sentences hidden in the body
};

inline constexpr std::size_t kMinBodyChars = 20000;
inline constexpr std::size_t kMinFacts = 3;
inline constexpr std::size_t kMaxFactChars = 63;

std::string item_id(std::size_t index);  // 0 -> "item-001"

// Deterministic per seed. Bodies never contain '|' or the word "Notably"
// outside the planted facts.
std::vector<PlantedItem> synthesize_corpus(std::size_t n, std::uint64_t seed);
void write_corpus(const std::vector<PlantedItem>& items, const std::filesystem::path& dir);
// synthesize + write + load.
Corpus generate_corpus(std::size_t n, std::uint64_t seed, const std::filesystem::path& dir);

// ---- groundedness judge ---------------------------------------------------------

struct GroundednessJudgment {
  std::string item_id;
  bool summary_present = false;
  bool grounded = false;
  std::string evidence_span;
};

// Case-folded whitespace tokens.
std::vector<std::string> judge_tokens(std::string_view text);

// Precomputed lookups for one item, so repeated judgments are cheap.
class JudgeIndex {
 public:
  explicit JudgeIndex(const CorpusItem& item);

  const std::string& item_id() const { return id_; }
  bool in_body(const std::vector<std::string>& tokens, std::size_t first, std::size_t count) const;
  bool in_title_or_metadata(const std::vector<std::string>& tokens, std::size_t first, std::size_t count) const;

 private:
  std::string id_;
  std::string body_;                  // " tok tok ... "
  std::vector<std::string> excluded_;  // title and each metadata string, same form
};

// Grounded iff the summary has at least `min_chars` characters and a run of
// >= 4 tokens that occurs in the body and in neither title nor metadata.
// The evidence span is the first such run, extended as far as it stays in
// the body.
GroundednessJudgment judge_grounded(std::string_view summary, const JudgeIndex& index, std::size_t min_chars = 1);
GroundednessJudgment judge_grounded(std::string_view summary, const CorpusItem& item, std::size_t min_chars = 1);

// ---- review files ----------------------------------------------------------------

struct Review {
  std::string summary;
  std::optional<int> relevance;
};

std::string review_path(std::string_view item_id);  // artifacts/reviews/<id>.md
std::string render_review(std::string_view summary, int relevance);
Review parse_review(std::string_view text);

// ---- protocol ------------------------------------------------------------------

struct LitReviewConfig {
  std::size_t n_items = 80;
  std::size_t runs = 10;
  ExecutionMode mode = ExecutionMode::file_centric;
  std::uint64_t seed = 42;
  std::size_t per_item_summary_min = 1;

  std::filesystem::path workspace_root = "eval-workspaces";
  std::filesystem::path corpus_dir;  // default: <workspace_root>/corpus
  std::size_t context_budget = 8192;
  std::size_t context_limit = 16384;  // simulated model window
  OverflowPolicy on_overflow = OverflowPolicy::truncate_head;
  std::size_t window_capacity = ActionWindow::kDefaultCapacity;
  std::uint64_t consolidation_interval = 25;
  int step_limit = 400;
  bool verbose_contexts = false;
  bool sync = false;
  bool parallel = true;
  std::string model = "mock-litreview";

  void validate() const;
  nlohmann::json to_json() const;
};

std::string litreview_objective(const std::vector<std::string>& item_ids);
Hierarchy litreview_hierarchy(const LitReviewConfig& cfg);

// Creates the backend for one run. Must be safe to call from several threads.
using BackendFactory = std::function<std::unique_ptr<Backend>(std::size_t run_index)>;

// The simulated model used by default (see litreview_model.hpp).
BackendFactory default_backend_factory(const LitReviewConfig& cfg);

struct RunResult {
  std::size_t run_index = 0;
  std::string task_id;
  std::size_t coverage = 0;
  bool crashed = false;
  std::string crash_reason;
  bool resumed = false;
  OutcomeStatus outcome = OutcomeStatus::failed;
  std::uint64_t steps = 0;
  std::vector<GroundednessJudgment> judgments;
};

struct CoverageReport {
  ExecutionMode mode = ExecutionMode::file_centric;
  std::string model;
  std::size_t n_items = 0;
  std::vector<std::size_t> per_run_coverage;
  std::size_t max = 0;
  std::size_t min = 0;
  double avg = 0.0;
  double variance = 0.0;  // population variance of per_run_coverage
  std::size_t crashes = 0;
  std::vector<RunResult> runs;
  nlohmann::json config = nlohmann::json::object();

  static CoverageReport aggregate(ExecutionMode mode, std::string model, std::size_t n_items,
                                  std::vector<RunResult> runs);
  nlohmann::json to_json() const;
};

struct AblationReport {
  CoverageReport file_centric;
  CoverageReport compressed;
  double gap = 0.0;  // file_centric.avg - compressed.avg

  nlohmann::json to_json() const;
};

// Scores every item from the review files in `ws`.
std::vector<GroundednessJudgment> score_workspace(const Workspace& ws, const std::vector<JudgeIndex>& index,
                                                  std::size_t min_chars);

// One run in a fresh workspace. With `interrupt_at`, the run is killed right
// before that step and then resumed from disk, as after a crash.
RunResult run_litreview_once(const LitReviewConfig& cfg, std::size_t run_index, const Corpus& corpus,
                             const Hierarchy& hierarchy, Backend& backend,
                             std::optional<std::uint64_t> interrupt_at = std::nullopt);

CoverageReport run_litreview(const LitReviewConfig& cfg, const Hierarchy& hierarchy, const BackendFactory& factory);
CoverageReport run_litreview(const LitReviewConfig& cfg);

// Both modes on identical seeds. Needs cfg.runs >= 3.
AblationReport run_ablation_pair(const LitReviewConfig& cfg, const Hierarchy& hierarchy,
                                 const BackendFactory& factory);
AblationReport run_ablation_pair(const LitReviewConfig& cfg);

struct ContainmentResult {
  std::size_t scanned = 0;    // logged contexts with text
  std::size_t unscanned = 0;  // logged without text (verbose logging was off)
  std::vector<std::string> violations;
};

// Looks for any 64-character piece of any corpus body inside the main-agent
// contexts recorded in `logs` (contexts.jsonl files).
ContainmentResult scan_context_logs(const Corpus& corpus, const std::vector<std::filesystem::path>& logs,
                                    bool parallel = true);

// Markdown table with Setting | Model | Max | Min | Avg.
std::string render_table(const std::vector<CoverageReport>& reports);

}  // namespace fcagent
