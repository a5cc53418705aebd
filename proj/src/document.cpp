// SPDX-License-Identifier: Apache-2.0
#include "fcagent/document.hpp"

#include <fmt/core.h>

#include "fcagent/context.hpp"
#include "fcagent/corpus.hpp"
#include "fcagent/util.hpp"
#include "fcagent/workspace.hpp"

namespace fcagent {

namespace {

constexpr std::string_view kReaderSystem =
    "You are an isolated document reader. Use only the text you are given. You have no other "
    "context and no tools.";

LLMRequest reader_request(std::string user) {
  LLMRequest req;
  req.session_tag = std::string(session::kReader);
  req.max_response = 1024;
  req.messages.push_back({Role::system, std::string(kReaderSystem)});
  req.messages.push_back({Role::user, std::move(user)});
  return req;
}

}  // namespace

std::vector<std::string_view> chunk_document(std::string_view text, const ChunkingOptions& options) {
  if (options.chunk_size == 0 || options.overlap >= options.chunk_size) {
    throw std::invalid_argument("chunk overlap must be smaller than the chunk size");
  }
  std::vector<std::string_view> chunks;
  const std::size_t stride = options.chunk_size - options.overlap;
  for (std::size_t start = 0;; start += stride) {
    chunks.push_back(text.substr(start, options.chunk_size));
    if (start + options.chunk_size >= text.size()) break;
  }
  return chunks;
}

std::string resolve_document(const DocumentRef& doc, const Workspace* ws, const Corpus* corpus) {
  if (doc.source == DocumentSource::corpus_item) {
    const CorpusItem* item = corpus ? corpus->find(doc.identifier) : nullptr;
    if (!item) throw DocumentError("unknown corpus item '" + doc.identifier + "'");
    return item->body;
  }
  if (!ws) throw DocumentError("no workspace to read '" + doc.identifier + "' from");
  try {
    return ws->read(doc.identifier);
  } catch (const WorkspaceError& e) {
    throw DocumentError(std::string("cannot read document: ") + e.what());
  }
}

ExternalAnswer answer_from_document(std::string_view query, std::string_view text, Backend& backend,
                                    const ChunkingOptions& options) {
  if (trim(query).empty()) throw std::invalid_argument("answer_from_document: query is empty");

  ExternalAnswer out;
  std::size_t session_chars = 0;
  const auto chunks = chunk_document(text, options);
  std::vector<std::string> findings;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    auto req = reader_request(fmt::format(
        "{}\nQUERY: {}\nEXCERPT {}/{}:\n{}\n\nList the statements from this excerpt that answer the "
        "query, one per line. Reply NONE if there are none.",
        kReaderMapTask, query, i + 1, chunks.size(), chunks[i]));
    const auto resp = backend.complete(req);
    session_chars += request_size(req) + resp.content.size();
    if (!resp.ok()) {
      throw PartialAnswerError(fmt::format("reader failed on chunk {}/{}: {}", i + 1, chunks.size(),
                                           resp.error_reason),
                               out.chunks_consulted);
    }
    ++out.chunks_consulted;
    const auto found = trim(resp.content);
    if (!found.empty() && found != "NONE") findings.push_back(found);
  }

  std::string listed;
  for (const auto& f : findings) listed += f + "\n";
  if (listed.empty()) listed = "NONE\n";
  auto req = reader_request(fmt::format("{}\nQUERY: {}\nFINDINGS:\n{}\nCombine the findings into one short answer.",
                                        kReaderReduceTask, query, listed));
  const auto resp = backend.complete(req);
  session_chars += request_size(req) + resp.content.size();
  if (!resp.ok()) {
    throw PartialAnswerError("reader failed while combining findings: " + resp.error_reason, out.chunks_consulted);
  }
  out.answer = truncate_text(trim(resp.content), ActionRecord::kSummaryCap);
  out.session_tokens_estimate = (session_chars + 3) / 4;
  return out;
}

ExternalAnswer answer_from_document(std::string_view query, const DocumentRef& doc, const Workspace* ws,
                                    const Corpus* corpus, Backend& backend, const ChunkingOptions& options) {
  if (trim(query).empty()) throw std::invalid_argument("answer_from_document: query is empty");
  const std::string text = resolve_document(doc, ws, corpus);
  return answer_from_document(query, text, backend, options);
}

}  // namespace fcagent
