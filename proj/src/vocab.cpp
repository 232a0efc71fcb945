#include "eapo/vocab.hpp"

#include <fmt/format.h>

#include "eapo/errors.hpp"

namespace eapo {

Vocabulary::Vocabulary() {
  pieces_[tok::kThinkOpen] = kThinkOpenTag;
  pieces_[tok::kThinkClose] = kThinkCloseTag;
  pieces_[tok::kAdviceOpen] = kAdviceOpenTag;
  pieces_[tok::kAdviceClose] = kAdviceCloseTag;
  for (std::size_t i = 0; i < tok::kSymbolCount; ++i) {
    pieces_[tok::kFirstSymbol + i] = std::string(1, kSymbolChars[i]);
  }
  pieces_[tok::kEos] = "<eos>";
  pieces_[tok::kPad] = "<pad>";
}

std::string_view Vocabulary::piece(TokenId id) const {
  if (id >= pieces_.size()) {
    throw InputError(fmt::format("token id {} out of range (vocabulary size {})", id, pieces_.size()));
  }
  return pieces_[id];
}

std::string Vocabulary::decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId id : tokens) out += piece(id);
  return out;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t best_len = 0;
    TokenId best = 0;
    for (std::size_t id = 0; id < pieces_.size(); ++id) {
      const auto& p = pieces_[id];
      if (p.size() > best_len && text.substr(pos, p.size()) == p) {
        best_len = p.size();
        best = static_cast<TokenId>(id);
      }
    }
    if (best_len == 0) {
      throw InputError(fmt::format("no token matches text at offset {}", pos));
    }
    ids.push_back(best);
    pos += best_len;
  }
  return ids;
}

TokenId Vocabulary::symbol(std::size_t index) {
  if (index >= tok::kSymbolCount) {
    throw InputError(fmt::format("symbol index {} out of range", index));
  }
  return static_cast<TokenId>(tok::kFirstSymbol + index);
}

const Vocabulary& vocab() {
  static const Vocabulary v;
  return v;
}

}  // namespace eapo
