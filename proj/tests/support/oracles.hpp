#pragma once

// Reference implementations kept deliberately naive: full tables, no
// shortcuts, nothing shared with the library code they check.

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace eapo::testing {

// Plain (n+1)x(m+1) LCS table over bytes. Callers pass ASCII.
inline std::size_t lcs_table(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

inline double rouge_oracle(const std::string& cand, const std::string& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  const double l = static_cast<double>(lcs_table(cand, ref));
  return 2.0 * l / static_cast<double>(cand.size() + ref.size());
}

inline double trigram_cosine_oracle(const std::string& a, const std::string& b) {
  // Strings shorter than three characters count as a single gram.
  auto grams = [](const std::string& s) {
    std::map<std::string, double> c;
    if (!s.empty() && s.size() < 3) c[s] = 1.0;
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) c[s.substr(i, 3)] += 1.0;
    return c;
  };
  const auto ca = grams(a), cb = grams(b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : ca) {
    na += v * v;
    auto it = cb.find(k);
    if (it != cb.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : cb) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace eapo::testing
