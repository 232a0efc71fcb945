#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eapo {

using TokenId = std::uint16_t;

// Fixed token table: four tag tokens, 30 content symbols, end-of-sequence, padding.
namespace tok {
inline constexpr TokenId kThinkOpen = 0;
inline constexpr TokenId kThinkClose = 1;
inline constexpr TokenId kAdviceOpen = 2;
inline constexpr TokenId kAdviceClose = 3;
inline constexpr TokenId kFirstSymbol = 4;
inline constexpr std::size_t kSymbolCount = 30;
inline constexpr TokenId kEos = 34;
inline constexpr TokenId kPad = 35;
}  // namespace tok

inline constexpr std::size_t kVocabSize = 36;

inline constexpr std::string_view kSymbolChars = "abcdefghijklmnopqrstuvwxyz0123";

inline constexpr std::string_view kThinkOpenTag = "<think>";
inline constexpr std::string_view kThinkCloseTag = "</think>";
inline constexpr std::string_view kAdviceOpenTag = "<advice>";
inline constexpr std::string_view kAdviceCloseTag = "</advice>";

class Vocabulary {
 public:
  Vocabulary();

  std::size_t size() const { return pieces_.size(); }
  std::string_view piece(TokenId id) const;

  // Throws InputError on any id >= size().
  std::string decode(std::span<const TokenId> tokens) const;

  // Inverse of decode. Greedy longest match; throws InputError on text
  // that is not a concatenation of token pieces.
  std::vector<TokenId> encode(std::string_view text) const;

  static TokenId symbol(std::size_t index);
  static bool is_symbol(TokenId id) {
    return id >= tok::kFirstSymbol && id < tok::kFirstSymbol + tok::kSymbolCount;
  }

 private:
  std::array<std::string, kVocabSize> pieces_;
};

const Vocabulary& vocab();

}  // namespace eapo
