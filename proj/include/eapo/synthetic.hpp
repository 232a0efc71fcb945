#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eapo/rollout.hpp"

namespace eapo {

// Synthetic open-ended QA corpus. Each question names a transform and a short
// symbol string ("reverse: kqa"); the reference puts the input inside
// <think></think> and the transformed string inside <advice></advice>, so
// every reference is well-formed and derivable from its question.
struct SyntheticTask {
  std::uint64_t seed = 0;
  std::size_t count = 64;
  std::size_t min_symbols = 2;
  std::size_t max_symbols = 4;

  std::vector<Prompt> generate() const;
};

// Reference answer for a question produced by SyntheticTask.
std::string synthetic_reference(const std::string& question);

}  // namespace eapo
