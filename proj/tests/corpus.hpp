#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dlpcf/common.hpp"

namespace corpus {

struct Program {
  std::string name;
  std::string source;
  std::optional<dlpcf::Nat> expected;
};

inline std::string dir() { return DLPCF_CORPUS_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<Program> programs() {
  std::vector<Program> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir())) {
    if (entry.path().extension() != ".pcf") continue;
    Program p;
    p.name = entry.path().stem().string();
    p.source = read_file(entry.path());
    auto pos = p.source.find("# result:");
    if (pos != std::string::npos) p.expected = std::stoull(p.source.substr(pos + 9));
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const Program& a, const Program& b) { return a.name < b.name; });
  return out;
}

inline std::string script(const std::string& rel) { return dir() + "/" + rel; }

// Every .dlpcf file directly under `sub`, sorted by name.
inline std::vector<std::filesystem::path> scripts(const std::string& sub) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir() + "/" + sub)) {
    if (entry.path().extension() == ".dlpcf") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The node a mutant is expected to be blamed at, from its "; refuted at"
// header line.
inline std::string expected_location(const std::filesystem::path& p) {
  std::string text = read_file(p);
  const std::string tag = "; refuted at ";
  auto pos = text.find(tag);
  if (pos == std::string::npos) return "";
  auto end = text.find('\n', pos);
  return text.substr(pos + tag.size(), end - pos - tag.size());
}

}  // namespace corpus
