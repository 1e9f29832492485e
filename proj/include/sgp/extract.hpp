#pragma once

// Function extraction and the bracket-nesting tree. The extractor is a
// brace heuristic, not a grammar: a function is an identifier followed by a
// parenthesized list followed by a brace-balanced body, found at top level
// or directly inside a class-like scope.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/token.hpp"
#include "sgp/tokenize.hpp"

namespace sgp {

struct FunctionRecord {
  std::uint64_t function_id = 0;  // stable hash of (repo_id, file_path, start_line, raw text)
  std::string repo_id;
  std::string file_path;
  std::string name;
  int start_line = 1;
  int end_line = 1;
  std::vector<Token> tokens;
  int line_count = 1;

  bool operator==(const FunctionRecord&) const = default;
};

struct ExtractResult {
  std::vector<FunctionRecord> records;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

// Keywords that open a scope whose members are still extraction candidates.
inline bool opens_member_scope(const Token& t) {
  if (t.kind != TokenKind::Keyword) return false;
  return t.lexeme == "class" || t.lexeme == "struct" || t.lexeme == "namespace" ||
         t.lexeme == "union" || t.lexeme == "interface" || t.lexeme == "enum";
}

inline bool is_punct(const Token& t, char c) {
  return t.kind == TokenKind::Punctuation && t.lexeme.size() == 1 && t.lexeme[0] == c;
}

// Index of the next non-comment token at or after i, or n.
inline std::size_t skip_comments(const std::vector<Token>& toks, std::size_t i) {
  while (i < toks.size() && toks[i].kind == TokenKind::Comment) ++i;
  return i;
}

}  // namespace detail

/// Extracts FunctionRecords from one source file. On unbalanced braces the
/// whole file is skipped and a diagnostic emitted; other files of a corpus
/// are unaffected.
inline ExtractResult extract_functions(std::string_view source, const LanguageProfile& profile,
                                       const std::string& repo_id, const std::string& file_path) {
  ExtractResult out;
  if (profile.function_detection == FunctionDetection::PreExtracted) {
    return out;  // pass-through profiles carry no extractable sources
  }

  TokenizeResult lexed = tokenize(source, profile);
  out.diagnostics = lexed.diagnostics;
  const std::vector<Token>& toks = lexed.tokens;
  const std::size_t n = toks.size();

  // Brace match table over the full token stream.
  std::vector<std::size_t> brace_match(n, static_cast<std::size_t>(-1));
  {
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
      if (detail::is_punct(toks[i], '{')) {
        stack.push_back(i);
      } else if (detail::is_punct(toks[i], '}')) {
        if (stack.empty()) {
          out.diagnostics.push_back({"UnbalancedBraces",
                                     "unmatched '}' in " + file_path, toks[i].line});
          return out;
        }
        brace_match[stack.back()] = i;
        stack.pop_back();
      }
    }
    if (!stack.empty()) {
      out.diagnostics.push_back({"UnbalancedBraces",
                                 "unmatched '{' in " + file_path, toks[stack.back()].line});
      return out;
    }
  }

  // Line offsets for raw-text slicing (function_id input).
  std::vector<std::size_t> line_starts{0};
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] == '\n') line_starts.push_back(i + 1);
  }
  auto raw_lines = [&](int first, int last) {
    std::size_t b = line_starts[static_cast<std::size_t>(first - 1)];
    std::size_t e = static_cast<std::size_t>(last) < line_starts.size()
                        ? line_starts[static_cast<std::size_t>(last)]
                        : source.size();
    return source.substr(b, e - b);
  };

  auto make_record = [&](std::size_t sig_begin, std::size_t body_end, const std::string& name) {
    FunctionRecord rec;
    rec.repo_id = repo_id;
    rec.file_path = file_path;
    rec.name = name;
    rec.start_line = toks[sig_begin].line;
    rec.end_line = toks[body_end].line;
    rec.line_count = rec.end_line - rec.start_line + 1;
    rec.tokens.assign(toks.begin() + static_cast<std::ptrdiff_t>(sig_begin),
                      toks.begin() + static_cast<std::ptrdiff_t>(body_end) + 1);
    Fnv1a64 h;
    h.update(repo_id).update_byte(0x1f);
    h.update(file_path).update_byte(0x1f);
    h.update(std::to_string(rec.start_line)).update_byte(0x1f);
    h.update(raw_lines(rec.start_line, rec.end_line));
    rec.function_id = h.digest();
    out.records.push_back(std::move(rec));
  };

  // Scans [begin, end); extracts member functions, recurses into class-like
  // scopes, and skips function bodies (nested functions belong to the outer
  // record only).
  auto scan = [&](auto&& self, std::size_t begin, std::size_t end) -> void {
    std::size_t i = begin;
    while (i < end) {
      const Token& t = toks[i];
      if (t.kind == TokenKind::Comment) {
        ++i;
        continue;
      }
      if (detail::opens_member_scope(t)) {
        std::size_t j = i + 1;
        while (j < end && !detail::is_punct(toks[j], '{') && !detail::is_punct(toks[j], ';')) ++j;
        if (j < end && detail::is_punct(toks[j], '{')) {
          std::size_t m = brace_match[j];
          self(self, j + 1, m);
          i = m + 1;
        } else {
          i = j + 1;  // forward declaration
        }
        continue;
      }
      if (t.kind == TokenKind::Identifier) {
        std::size_t p = detail::skip_comments(toks, i + 1);
        if (p < end && detail::is_punct(toks[p], '(')) {
          // Find the matching ')'.
          int depth = 0;
          std::size_t q = p;
          for (; q < end; ++q) {
            if (detail::is_punct(toks[q], '(')) ++depth;
            else if (detail::is_punct(toks[q], ')') && --depth == 0) break;
          }
          if (q < end) {
            // Allow trailing qualifiers (const, noexcept, throws X, -> T ...)
            // between the parameter list and the body.
            std::size_t b = q + 1;
            while (b < end && (toks[b].kind == TokenKind::Keyword ||
                               toks[b].kind == TokenKind::Identifier ||
                               toks[b].kind == TokenKind::Operator ||
                               toks[b].kind == TokenKind::Comment)) {
              ++b;
            }
            if (b < end && detail::is_punct(toks[b], '{')) {
              // Signature start: walk back over the return type and
              // qualifiers; stop at punctuation, literals or comments.
              std::size_t s = i;
              while (s > begin) {
                const Token& prev = toks[s - 1];
                if (prev.kind == TokenKind::Keyword || prev.kind == TokenKind::Identifier ||
                    prev.kind == TokenKind::Operator) {
                  --s;
                } else {
                  break;
                }
              }
              std::size_t m = brace_match[b];
              make_record(s, m, t.lexeme);
              i = m + 1;
              continue;
            }
          }
        }
      }
      if (detail::is_punct(t, '{')) {
        i = brace_match[i] + 1;  // stray block: nothing extractable inside
        continue;
      }
      ++i;
    }
  };
  scan(scan, 0, n);

  std::sort(out.records.begin(), out.records.end(),
            [](const FunctionRecord& a, const FunctionRecord& b) {
              return a.start_line < b.start_line;
            });
  return out;
}

// ---------------------------------------------------------------------------
// Nesting tree

struct NestingTree {
  std::size_t begin = 0;  // token index span, inclusive
  std::size_t end = 0;
  std::vector<NestingTree> children;
  std::uint64_t subtree_hash = 0;
  int node_count = 1;
};

namespace detail {

inline std::uint64_t hash_tree_node(const std::vector<Token>& toks, NestingTree& node) {
  Fnv1a64 h;
  h.update("N(");
  std::size_t i = node.begin;
  std::size_t child = 0;
  int count = 1;
  while (i <= node.end) {
    if (child < node.children.size() && node.children[child].begin == i) {
      NestingTree& c = node.children[child];
      h.update_u64(hash_tree_node(toks, c));
      h.update_byte(')');
      count += c.node_count;
      i = c.end + 1;
      ++child;
      continue;
    }
    if (toks[i].kind != TokenKind::Comment) {
      h.update(normalized_lexeme(toks[i]));
      h.update_byte(0x1e);
    }
    ++i;
  }
  node.node_count = count;
  node.subtree_hash = h.digest();
  return node.subtree_hash;
}

}  // namespace detail

/// Builds the bracket-nesting tree of a record: one node per matched brace
/// pair plus a root covering the body. A lone top-level pair (the usual
/// function body) is itself the root. Subtree hashes are invariant under
/// identifier and literal renaming.
inline NestingTree build_nesting_tree(const FunctionRecord& record) {
  const std::vector<Token>& toks = record.tokens;
  if (toks.empty()) {
    NestingTree root;
    root.subtree_hash = Fnv1a64().update("N(").digest();
    return root;
  }
  std::vector<NestingTree> stack;
  stack.push_back({});  // sentinel collecting top-level pairs
  stack.back().begin = 0;
  stack.back().end = toks.empty() ? 0 : toks.size() - 1;

  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (detail::is_punct(toks[i], '{')) {
      NestingTree node;
      node.begin = i;
      stack.push_back(node);
    } else if (detail::is_punct(toks[i], '}') && stack.size() > 1) {
      NestingTree node = std::move(stack.back());
      stack.pop_back();
      node.end = i;
      stack.back().children.push_back(std::move(node));
    }
  }
  // Unmatched opens (possible only on pre-extracted input) collapse into
  // their parent.
  while (stack.size() > 1) {
    NestingTree node = std::move(stack.back());
    stack.pop_back();
    for (auto& c : node.children) stack.back().children.push_back(std::move(c));
  }

  NestingTree root;
  if (stack.back().children.size() == 1) {
    root = std::move(stack.back().children.front());
  } else {
    root = std::move(stack.back());
  }
  detail::hash_tree_node(toks, root);
  return root;
}

/// All nodes of a tree in preorder (root first).
inline void collect_nodes(const NestingTree& t, std::vector<const NestingTree*>& out) {
  out.push_back(&t);
  for (const auto& c : t.children) collect_nodes(c, out);
}

/// Stable fingerprint of a record: FNV-1a over the normalized token stream
/// (identifiers -> ID, number literals -> NUM, string literals -> STR,
/// everything else verbatim, comments dropped). Renaming identifiers or
/// changing literals preserves it; touching any keyword, operator or
/// punctuation changes it.
inline std::uint64_t fingerprint(const FunctionRecord& record) {
  Fnv1a64 h;
  for (const Token& t : record.tokens) {
    if (t.kind == TokenKind::Comment) continue;
    h.update(normalized_lexeme(t));
    h.update_byte('\n');
  }
  return h.digest();
}

/// Canonical whitespace/comment-stripped text of a record; byte equality of
/// this form is the Type-1 clone test.
inline std::string stripped_text(const FunctionRecord& record) {
  std::string out;
  for (const Token& t : record.tokens) {
    if (t.kind == TokenKind::Comment) continue;
    out += t.lexeme;
    out += '\n';
  }
  return out;
}

}  // namespace sgp
