#pragma once

// Best-effort lexer. Whitespace is the only thing dropped: concatenating
// the lexemes of the result reproduces the input modulo whitespace, which
// is what makes line-window hashing and span re-slicing sound.

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/token.hpp"

namespace sgp {

struct TokenizeResult {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Maximal-munch operator table, longest first.
inline const std::vector<std::string>& operator_table() {
  static const std::vector<std::string> ops = {
      "<<=", ">>=", "...", "->*",
      "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
      "/=", "%=", "&=", "|=", "^=", "->", "<<", ">>", "::",
      "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~",
      "?", ":", ".",
  };
  return ops;
}

}  // namespace detail

/// Lexes source into tokens. Unterminated strings and block comments are
/// recovered per line: the partial token ends at the end of its first line,
/// a diagnostic records where, and lexing resumes on the next line.
inline TokenizeResult tokenize(std::string_view source, const LanguageProfile& profile) {
  TokenizeResult result;
  const std::size_t n = source.size();
  std::size_t i = 0;
  int line = 1;

  auto starts_with = [&](std::string_view prefix) {
    return !prefix.empty() && source.substr(i).starts_with(prefix);
  };
  auto line_end_from = [&](std::size_t pos) {
    while (pos < n && source[pos] != '\n') ++pos;
    return pos;
  };

  while (i < n) {
    const char c = source[i];

    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }

    // Line comment.
    if (starts_with(profile.line_comment)) {
      std::size_t end = line_end_from(i);
      result.tokens.push_back({TokenKind::Comment, std::string(source.substr(i, end - i)), line});
      i = end;
      continue;
    }

    // Block comment; may span lines.
    if (starts_with(profile.block_comment.first)) {
      const int start_line = line;
      const std::size_t open = profile.block_comment.first.size();
      std::size_t pos = source.find(profile.block_comment.second, i + open);
      if (pos == std::string_view::npos) {
        result.diagnostics.push_back(
            {"UnterminatedComment", "block comment opened here is never closed", start_line});
        std::size_t end = line_end_from(i);
        result.tokens.push_back({TokenKind::Comment, std::string(source.substr(i, end - i)), start_line});
        i = end;
        continue;
      }
      std::size_t end = pos + profile.block_comment.second.size();
      for (std::size_t j = i; j < end; ++j) {
        if (source[j] == '\n') ++line;
      }
      result.tokens.push_back({TokenKind::Comment, std::string(source.substr(i, end - i)), start_line});
      i = end;
      continue;
    }

    // String literal; must close on its own line.
    if (profile.string_delimiters.count(c)) {
      const char quote = c;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < n && source[j] != '\n') {
        if (source[j] == '\\' && j + 1 < n && source[j + 1] != '\n') {
          j += 2;
          continue;
        }
        if (source[j] == quote) {
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed) {
        result.diagnostics.push_back(
            {"UnterminatedString", "string literal is not closed before end of line", line});
      }
      result.tokens.push_back({TokenKind::StringLiteral, std::string(source.substr(i, j - i)), line});
      i = j;
      continue;
    }

    if (detail::is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && detail::is_ident_char(source[j])) ++j;
      std::string lexeme(source.substr(i, j - i));
      TokenKind kind = profile.keywords.count(lexeme) ? TokenKind::Keyword : TokenKind::Identifier;
      result.tokens.push_back({kind, std::move(lexeme), line});
      i = j;
      continue;
    }

    if (detail::is_digit(c)) {
      std::size_t j = i + 1;
      while (j < n) {
        const char d = source[j];
        if (detail::is_ident_char(d) || d == '.') {
          ++j;
        } else if ((d == '+' || d == '-') && (source[j - 1] == 'e' || source[j - 1] == 'E') &&
                   j + 1 < n && detail::is_digit(source[j + 1])) {
          ++j;  // exponent sign
        } else {
          break;
        }
      }
      result.tokens.push_back({TokenKind::NumberLiteral, std::string(source.substr(i, j - i)), line});
      i = j;
      continue;
    }

    bool matched = false;
    for (const auto& op : detail::operator_table()) {
      if (starts_with(op)) {
        result.tokens.push_back({TokenKind::Operator, op, line});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;

    // Brackets, separators and anything else single-char.
    result.tokens.push_back({TokenKind::Punctuation, std::string(1, c), line});
    ++i;
  }

  return result;
}

}  // namespace sgp
