#pragma once

#include <string_view>

#include "k2sql/core/types.hpp"

namespace k2sql {

// Splits knowledge text into sub-knowledge fragments.
//
// 1. Cut at top-level ';' and at top-level '.', '!' or '?' followed by whitespace
//    or the end of the text.
// 2. Inside each piece, a top-level ", " (optionally followed by "and ") separates
//    two fragments when both sides carry a definition marker ("refer to",
//    "refers to", "means" or '='). Comma-separated parts without a marker stay
//    attached to the fragment before them.
// 3. Fragments are trimmed, trailing terminators dropped, empty ones discarded.
//
// Every fragment is a substring of the input and decomposing a fragment again
// yields exactly that fragment.
Knowledge decompose_knowledge(std::string_view text);

// True when the text carries one of the definition markers used by step 2.
bool has_definition_marker(std::string_view text);

}  // namespace k2sql
