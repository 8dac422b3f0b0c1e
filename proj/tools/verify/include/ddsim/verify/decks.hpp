#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ddsim::verify {

/// Decks shipped in decks/, embedded at build time. Keys are file stems.
const std::vector<std::string>& shipped_deck_names();

/// Text of a shipped deck; throws std::out_of_range for unknown names.
std::string_view shipped_deck(std::string_view name);

}  // namespace ddsim::verify
