#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eapo {

using TagPair = std::pair<std::string, std::string>;

// <think>...</think> followed by <advice>...</advice>.
std::vector<TagPair> default_required_tags();

// 1 iff every tag pair occurs exactly once (opening and closing tag each),
// each pair is closed before the next one opens, and pairs appear in the
// given order. Text outside the blocks is allowed.
double format_reward(std::string_view text, const std::vector<TagPair>& tags);
double format_reward(std::string_view text);

// Content of the first open...close block, if both tags are present in order.
std::optional<std::string> extract_block(std::string_view text, std::string_view open,
                                         std::string_view close);

// UTF-8 to Unicode scalar values. Invalid bytes map to U+FFFD.
std::u32string utf8_to_scalars(std::string_view text);

// Character-level Rouge-L F1 over Unicode scalar values; LCS via a two-row DP.
// Returns 0 when either side is empty or the LCS is empty.
double rouge_l_f1(std::string_view candidate, std::string_view reference);

// LCS length over scalar values, O(min(n, m)) memory.
std::size_t lcs_length(const std::u32string& a, const std::u32string& b);

// Cosine similarity of character-trigram count vectors. Strings of one or
// two scalar values contribute themselves as a single gram; the empty string
// has none and scores 0 against everything.
double trigram_cosine(std::string_view a, std::string_view b);

}  // namespace eapo
