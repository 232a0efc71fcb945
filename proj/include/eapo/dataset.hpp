#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "eapo/rollout.hpp"

namespace eapo {

// JSON-lines QA data: one object per line with string fields "id", "question"
// and "answer". Unknown fields are ignored; blank lines are skipped. Missing or
// non-string required fields, duplicate ids and unparseable lines raise
// InputError naming the 1-based line number.
std::vector<Prompt> read_jsonl(std::istream& in);
std::vector<Prompt> load_jsonl(const std::filesystem::path& path);

void write_jsonl(std::ostream& out, const std::vector<Prompt>& prompts);
void save_jsonl(const std::filesystem::path& path, const std::vector<Prompt>& prompts);

}  // namespace eapo
