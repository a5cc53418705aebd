// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fcagent/backend.hpp"

namespace fcagent {

class Corpus;
class Workspace;

enum class DocumentSource { workspace_file, corpus_item };
enum class DocumentMedia { plain_text, pdf_text_extracted };

struct DocumentRef {
  DocumentSource source = DocumentSource::corpus_item;
  std::string identifier;
  DocumentMedia media = DocumentMedia::plain_text;
};

struct ExternalAnswer {
  std::string answer;
  std::size_t chunks_consulted = 0;
  std::size_t session_tokens_estimate = 0;
};

struct ChunkingOptions {
  std::size_t chunk_size = 8000;
  std::size_t overlap = 400;
};

class DocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend failed part-way; the chunks read so far are reported.
class PartialAnswerError : public std::runtime_error {
 public:
  PartialAnswerError(const std::string& what, std::size_t chunks)
      : std::runtime_error(what), chunks_consulted_(chunks) {}
  std::size_t chunks_consulted() const { return chunks_consulted_; }

 private:
  std::size_t chunks_consulted_;
};

// First line of every isolated reader request, so scripted backends can tell
// the two stages apart.
inline constexpr std::string_view kReaderMapTask = "READER TASK: map";
inline constexpr std::string_view kReaderReduceTask = "READER TASK: reduce";

// Fixed-size windows with `overlap` characters shared between neighbours.
std::vector<std::string_view> chunk_document(std::string_view text, const ChunkingOptions& options = {});

// Loads the text behind `doc`; throws DocumentError when it cannot.
std::string resolve_document(const DocumentRef& doc, const Workspace* ws, const Corpus* corpus);

// External attention: every chunk is queried in its own isolated session
// (no main-agent context), the per-chunk findings are reduced by one more
// isolated call, and only the final answer comes back.
ExternalAnswer answer_from_document(std::string_view query, std::string_view document_text, Backend& backend,
                                    const ChunkingOptions& options = {});

ExternalAnswer answer_from_document(std::string_view query, const DocumentRef& doc, const Workspace* ws,
                                    const Corpus* corpus, Backend& backend, const ChunkingOptions& options = {});

}  // namespace fcagent
