#pragma once

// Corpus persistence. The normalized on-disk form is JSONL, one function
// per line with a fixed key order; loading also accepts a directory of
// sources, which runs extraction file by file.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgp/common.hpp"
#include "sgp/extract.hpp"

namespace sgp {

struct Corpus {
  std::vector<FunctionRecord> records;
  std::vector<Diagnostic> diagnostics;

  bool operator==(const Corpus& other) const { return records == other.records; }
};

namespace detail {

inline nlohmann::ordered_json record_to_json(const FunctionRecord& r) {
  nlohmann::ordered_json j;
  j["function_id"] = to_hex16(r.function_id);
  j["repo_id"] = r.repo_id;
  j["file_path"] = r.file_path;
  j["name"] = r.name;
  j["start_line"] = r.start_line;
  j["end_line"] = r.end_line;
  nlohmann::ordered_json toks = nlohmann::ordered_json::array();
  for (const Token& t : r.tokens) {
    toks.push_back({std::string(to_string(t.kind)), t.lexeme, t.line});
  }
  j["tokens"] = std::move(toks);
  return j;
}

inline FunctionRecord record_from_json(const nlohmann::json& j, int line_no) {
  for (const char* field :
       {"function_id", "repo_id", "file_path", "name", "start_line", "end_line", "tokens"}) {
    if (!j.contains(field)) {
      throw error("MissingField", "corpus line " + std::to_string(line_no) +
                                      ": missing field '" + std::string(field) + "'");
    }
  }
  FunctionRecord r;
  r.function_id = parse_hex16(j.at("function_id").get<std::string>());
  r.repo_id = j.at("repo_id").get<std::string>();
  r.file_path = j.at("file_path").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.start_line = j.at("start_line").get<int>();
  r.end_line = j.at("end_line").get<int>();
  r.line_count = r.end_line - r.start_line + 1;
  for (const auto& t : j.at("tokens")) {
    if (!t.is_array() || t.size() != 3) {
      throw error("MalformedLine",
                  "corpus line " + std::to_string(line_no) + ": token entries must be [kind, lexeme, line]");
    }
    r.tokens.push_back({token_kind_from(t[0].get<std::string>()), t[1].get<std::string>(),
                        t[2].get<int>()});
  }
  return r;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw error("IoError", "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline void store_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("IoError", "cannot write " + path.string());
  for (const FunctionRecord& r : corpus.records) {
    out << detail::record_to_json(r).dump() << '\n';
  }
}

inline Corpus load_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("IoError", "cannot open " + path.string());
  Corpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw error("MalformedLine", "corpus line " + std::to_string(line_no) + ": not a JSON object");
    }
    corpus.records.push_back(detail::record_from_json(j, line_no));
  }
  return corpus;
}

/// Extracts a corpus from a directory tree. The first path component under
/// the root names the repository; files directly under the root fall back
/// to the root directory's own name. Files are visited in sorted order so
/// the result is reproducible.
inline Corpus extract_corpus_from_dir(const std::filesystem::path& root,
                                      const LanguageProfile& profile) {
  if (profile.function_detection == FunctionDetection::PreExtracted) {
    throw error("InvalidProfile",
                "profile '" + profile.name + "' cannot extract from source directories");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Corpus corpus;
  for (const auto& file : files) {
    const std::filesystem::path rel = std::filesystem::relative(file, root);
    std::string repo_id = rel.begin() != rel.end() && std::next(rel.begin()) != rel.end()
                              ? rel.begin()->string()
                              : root.filename().string();
    ExtractResult res =
        extract_functions(detail::read_file(file), profile, repo_id, rel.generic_string());
    for (auto& rec : res.records) corpus.records.push_back(std::move(rec));
    for (auto& d : res.diagnostics) {
      d.message = rel.generic_string() + ": " + d.message;
      corpus.diagnostics.push_back(std::move(d));
    }
  }
  return corpus;
}

/// Loads a corpus from either a JSONL file or a directory of sources.
inline Corpus load_corpus(const std::filesystem::path& path,
                          const LanguageProfile& profile = c_like_profile()) {
  if (std::filesystem::is_directory(path)) {
    return extract_corpus_from_dir(path, profile);
  }
  return load_corpus_jsonl(path);
}

}  // namespace sgp
