// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include "fcagent/backend.hpp"
#include "fcagent/mock_backend.hpp"

namespace fcagent {

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

// A scripted stand-in for a model working through the literature-review
// protocol. It is a pure function of the request: everything it knows (the
// item list, the plan cursor, the last tool result) must be visible in the
// messages it receives, which is what makes the two execution modes differ.
//
// Main session, per item: answer_from_document, write the review, move the
// "NEXT:" cursor in plan.md. It finishes when the cursor says DONE, or as
// soon as the item list is no longer in view. Every directive carries a
// free-text "thought" whose length depends on the seed, so accumulated
// histories grow at run-specific rates.
//
// Reader session: map extracts the "Notably, ..." sentences of its excerpt;
// reduce joins one to three distinct findings with " | ".
LLMResponse litreview_respond(const LLMRequest& request, std::uint64_t seed);

std::unique_ptr<MockBackend> make_litreview_backend(std::size_t context_limit, OverflowPolicy on_overflow,
                                                    std::uint64_t seed);

}  // namespace fcagent
