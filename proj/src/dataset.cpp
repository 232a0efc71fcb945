#include "eapo/dataset.hpp"

#include <fstream>
#include <istream>
#include <set>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "eapo/errors.hpp"

namespace eapo {

using json = nlohmann::json;

namespace {

std::string required_string(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw InputError(fmt::format("line {}: missing required field \"{}\"", line, field));
  }
  if (!it->is_string()) {
    throw InputError(fmt::format("line {}: field \"{}\" must be a string", line, field));
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<Prompt> read_jsonl(std::istream& in) {
  std::vector<Prompt> prompts;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError(fmt::format("line {}: invalid JSON ({})", line, e.what()));
    }
    if (!obj.is_object()) throw InputError(fmt::format("line {}: expected a JSON object", line));
    Prompt p{required_string(obj, "id", line), required_string(obj, "question", line),
             required_string(obj, "answer", line)};
    if (p.question.empty() || p.reference.empty()) {
      throw InputError(fmt::format("line {}: question and answer must be non-empty", line));
    }
    if (!ids.insert(p.id).second) {
      throw InputError(fmt::format("line {}: duplicate id \"{}\"", line, p.id));
    }
    prompts.push_back(std::move(p));
  }
  return prompts;
}

std::vector<Prompt> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open dataset {}", path.string()));
  try {
    return read_jsonl(in);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_jsonl(std::ostream& out, const std::vector<Prompt>& prompts) {
  for (const auto& p : prompts) {
    out << json{{"id", p.id}, {"question", p.question}, {"answer", p.reference}}.dump() << '\n';
  }
}

void save_jsonl(const std::filesystem::path& path, const std::vector<Prompt>& prompts) {
  std::ofstream out(path);
  if (!out) throw ArtifactError(fmt::format("cannot write {}", path.string()));
  write_jsonl(out, prompts);
}

}  // namespace eapo
