#pragma once

// Token model and language profiles. A profile is the complete description
// of what the lexer and the extractor need to know about a language; two
// ship built in (a C/Java-style brace language and a pass-through for
// corpora that arrive pre-tokenized as JSONL).

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sgp/common.hpp"

namespace sgp {

enum class TokenKind {
  Keyword,
  Identifier,
  Operator,
  NumberLiteral,
  StringLiteral,
  Punctuation,
  Comment,
};

inline std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Identifier: return "Identifier";
    case TokenKind::Operator: return "Operator";
    case TokenKind::NumberLiteral: return "NumberLiteral";
    case TokenKind::StringLiteral: return "StringLiteral";
    case TokenKind::Punctuation: return "Punctuation";
    case TokenKind::Comment: return "Comment";
  }
  return "Unknown";
}

inline TokenKind token_kind_from(std::string_view name) {
  if (name == "Keyword") return TokenKind::Keyword;
  if (name == "Identifier") return TokenKind::Identifier;
  if (name == "Operator") return TokenKind::Operator;
  if (name == "NumberLiteral") return TokenKind::NumberLiteral;
  if (name == "StringLiteral") return TokenKind::StringLiteral;
  if (name == "Punctuation") return TokenKind::Punctuation;
  if (name == "Comment") return TokenKind::Comment;
  throw error("MalformedToken", "unknown token kind '" + std::string(name) + "'");
}

struct Token {
  TokenKind kind;
  std::string lexeme;
  int line = 1;  // 1-based

  bool operator==(const Token&) const = default;
};

enum class FunctionDetection { BraceHeuristic, PreExtracted };

struct LanguageProfile {
  std::string name;
  std::set<std::string> keywords;
  // Decision-point lexemes counted by cyclomatic complexity. Must be a
  // subset of keywords plus the short-circuit operators and "?".
  std::set<std::string> branch_keywords;
  std::set<char> string_delimiters;
  std::string line_comment;                            // "" disables
  std::pair<std::string, std::string> block_comment;   // {"",""} disables
  FunctionDetection function_detection = FunctionDetection::BraceHeuristic;

  void validate() const {
    for (const auto& b : branch_keywords) {
      if (!keywords.count(b) && b != "&&" && b != "||" && b != "?") {
        throw error("InvalidProfile",
                    "branch keyword '" + b + "' of profile '" + name +
                        "' is neither a keyword nor a short-circuit operator");
      }
    }
  }
};

/// Brace-language profile covering the common C/C++/Java keyword set.
inline const LanguageProfile& c_like_profile() {
  static const LanguageProfile profile = [] {
    LanguageProfile p;
    p.name = "c_like";
    p.keywords = {
        "abstract",   "assert",     "auto",     "boolean",  "break",
        "byte",       "case",       "catch",    "char",     "class",
        "const",      "constexpr",  "continue", "default",  "delete",
        "do",         "double",     "else",     "enum",     "extends",
        "extern",     "final",      "finally",  "float",    "for",
        "goto",       "if",         "implements", "import", "inline",
        "instanceof", "int",        "interface", "long",    "namespace",
        "native",     "new",        "noexcept", "nullptr",  "operator",
        "override",   "package",    "private",  "protected", "public",
        "register",   "return",     "short",    "signed",   "sizeof",
        "static",     "struct",     "super",    "switch",   "synchronized",
        "template",   "this",       "throw",    "throws",   "transient",
        "try",        "typedef",    "typename", "union",    "unsigned",
        "using",      "virtual",    "void",     "volatile", "while",
    };
    p.branch_keywords = {"if", "for", "while", "case", "catch", "&&", "||", "?"};
    p.string_delimiters = {'"', '\''};
    p.line_comment = "//";
    p.block_comment = {"/*", "*/"};
    p.function_detection = FunctionDetection::BraceHeuristic;
    p.validate();
    return p;
  }();
  return profile;
}

/// Pass-through profile for corpora loaded from JSONL. Extraction is a
/// no-op; the keyword/branch sets still drive metric computation.
inline const LanguageProfile& pre_extracted_profile() {
  static const LanguageProfile profile = [] {
    LanguageProfile p = c_like_profile();
    p.name = "pre_extracted";
    p.function_detection = FunctionDetection::PreExtracted;
    return p;
  }();
  return profile;
}

inline const LanguageProfile& find_profile(std::string_view name) {
  if (name == "c_like") return c_like_profile();
  if (name == "pre_extracted") return pre_extracted_profile();
  throw error("UnknownProfile", "no language profile named '" + std::string(name) + "'");
}

/// Normalized lexeme used by fingerprints, subtree hashes and token
/// similarity: identifiers and literals collapse to placeholders, keywords,
/// operators and punctuation stay verbatim. Comments have no normal form
/// and must be dropped by callers.
inline std::string_view normalized_lexeme(const Token& t) {
  switch (t.kind) {
    case TokenKind::Identifier: return "ID";
    case TokenKind::NumberLiteral: return "NUM";
    case TokenKind::StringLiteral: return "STR";
    default: return t.lexeme;
  }
}

}  // namespace sgp
