#include "eapo/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eapo/vocab.hpp"

namespace eapo {

std::vector<TagPair> default_required_tags() {
  return {{std::string(kThinkOpenTag), std::string(kThinkCloseTag)},
          {std::string(kAdviceOpenTag), std::string(kAdviceCloseTag)}};
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

double format_reward(std::string_view text, const std::vector<TagPair>& tags) {
  std::size_t cursor = 0;
  for (const auto& [open, close] : tags) {
    if (count_occurrences(text, open) != 1 || count_occurrences(text, close) != 1) return 0.0;
    const auto o = text.find(open);
    const auto c = text.find(close);
    if (o < cursor || c < o + open.size()) return 0.0;
    cursor = c + close.size();
  }
  return 1.0;
}

double format_reward(std::string_view text) {
  static const auto tags = default_required_tags();
  return format_reward(text, tags);
}

std::optional<std::string> extract_block(std::string_view text, std::string_view open,
                                         std::string_view close) {
  const auto o = text.find(open);
  if (o == std::string_view::npos) return std::nullopt;
  const auto begin = o + open.size();
  const auto c = text.find(close, begin);
  if (c == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(begin, c - begin));
}

std::u32string utf8_to_scalars(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t lcs_length(const std::u32string& a, const std::u32string& b) {
  const auto& outer = a.size() >= b.size() ? a : b;
  const auto& inner = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> prev(inner.size() + 1, 0), cur(inner.size() + 1, 0);
  for (char32_t x : outer) {
    for (std::size_t j = 1; j <= inner.size(); ++j) {
      cur[j] = x == inner[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[inner.size()];
}

double rouge_l_f1(std::string_view candidate, std::string_view reference) {
  const auto c = utf8_to_scalars(candidate);
  const auto r = utf8_to_scalars(reference);
  if (c.empty() || r.empty()) return 0.0;
  // 2PR / (P + R) with P = L/|c| and R = L/|r| reduces to 2L / (|c| + |r|),
  // which is exact whenever the ratio is representable.
  const auto l = static_cast<double>(lcs_length(c, r));
  return 2.0 * l / static_cast<double>(c.size() + r.size());
}

namespace {

std::map<std::u32string, double> trigram_counts(const std::u32string& s) {
  std::map<std::u32string, double> counts;
  if (s.empty()) return counts;
  if (s.size() < 3) {
    counts[s] = 1.0;
    return counts;
  }
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) counts[s.substr(i, 3)] += 1.0;
  return counts;
}

}  // namespace

double trigram_cosine(std::string_view a, std::string_view b) {
  const auto ca = trigram_counts(utf8_to_scalars(a));
  const auto cb = trigram_counts(utf8_to_scalars(b));
  if (ca.empty() || cb.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, v] : ca) {
    na += v * v;
    if (auto it = cb.find(g); it != cb.end()) dot += v * it->second;
  }
  for (const auto& [g, v] : cb) nb += v * v;
  // Integer counts: na * nb is exact, so identical inputs give exactly 1.
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace eapo
