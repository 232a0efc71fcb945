#include "eapo/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string_view>

#include <fmt/format.h>

#include "eapo/errors.hpp"
#include "eapo/seeding.hpp"
#include "eapo/vocab.hpp"

namespace eapo {

namespace {

constexpr std::array<std::string_view, 4> kTransforms{"echo", "reverse", "sort", "shift"};

std::string apply_transform(std::string_view name, std::string s) {
  if (name == "reverse") {
    std::reverse(s.begin(), s.end());
  } else if (name == "sort") {
    std::sort(s.begin(), s.end());
  } else if (name == "shift") {
    for (auto& c : s) {
      const auto i = kSymbolChars.find(c);
      c = kSymbolChars[(i + 1) % kSymbolChars.size()];
    }
  } else if (name != "echo") {
    throw InputError(fmt::format("unknown synthetic transform '{}'", name));
  }
  return s;
}

}  // namespace

std::string synthetic_reference(const std::string& question) {
  const auto colon = question.find(": ");
  if (colon == std::string::npos) {
    throw InputError(fmt::format("not a synthetic question: '{}'", question));
  }
  const auto name = std::string_view(question).substr(0, colon);
  const auto input = question.substr(colon + 2);
  if (input.empty() || input.find_first_not_of(kSymbolChars) != std::string::npos) {
    throw InputError(fmt::format("not a synthetic question: '{}'", question));
  }
  return fmt::format("{}{}{}{}{}{}", kThinkOpenTag, input, kThinkCloseTag, kAdviceOpenTag,
                     apply_transform(name, input), kAdviceCloseTag);
}

std::vector<Prompt> SyntheticTask::generate() const {
  if (count == 0) throw ConfigError("synthetic task: count must be >= 1");
  if (min_symbols < 1 || min_symbols > max_symbols) {
    throw ConfigError("synthetic task: need 1 <= min_symbols <= max_symbols");
  }
  std::mt19937_64 rng(mix_seed(seed, {0x73796e746865ull}));
  std::vector<Prompt> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto transform = kTransforms[rng() % kTransforms.size()];
    const auto len = min_symbols + rng() % (max_symbols - min_symbols + 1);
    std::string input;
    for (std::size_t k = 0; k < len; ++k) input += kSymbolChars[rng() % kSymbolChars.size()];
    auto question = fmt::format("{}: {}", transform, input);
    auto reference = synthetic_reference(question);
    out.push_back({fmt::format("syn-{:04d}", i), std::move(question), std::move(reference)});
  }
  return out;
}

}  // namespace eapo
