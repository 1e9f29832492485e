#pragma once

// Semantic versions (SemVer 2.0 precedence, including prerelease rules)
// and the version-range grammar used by manifests, registries and
// advisories: "1.2.3", "^1.2.3", "~1.2.3", ">=1.0.0 <2.0.0", "*".

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sgp/common.hpp"

namespace sgp {

struct Version {
  int major = 0;
  int minor = 0;
  int patch = 0;
  std::string prerelease;  // empty means a release version

  static std::optional<Version> try_parse(std::string_view text);
  static Version parse(std::string_view text) {
    auto v = try_parse(text);
    if (!v) throw error("MalformedVersion", "cannot parse version '" + std::string(text) + "'");
    return *v;
  }

  std::string str() const {
    std::string s = std::to_string(major) + "." + std::to_string(minor) + "." +
                    std::to_string(patch);
    if (!prerelease.empty()) s += "-" + prerelease;
    return s;
  }

  bool operator==(const Version&) const = default;
};

inline std::optional<Version> Version::try_parse(std::string_view text) {
  Version v;
  std::size_t i = 0;
  auto number = [&]() -> std::optional<int> {
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start || i - start > 9) return std::nullopt;
    int value = 0;
    for (std::size_t j = start; j < i; ++j) value = value * 10 + (text[j] - '0');
    return value;
  };
  auto part = [&](int& out, bool needs_dot) {
    if (needs_dot) {
      if (i >= text.size() || text[i] != '.') return false;
      ++i;
    }
    auto n = number();
    if (!n) return false;
    out = *n;
    return true;
  };
  if (!part(v.major, false) || !part(v.minor, true) || !part(v.patch, true)) return std::nullopt;
  if (i < text.size() && text[i] == '-') {
    ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != '+') ++i;
    v.prerelease = std::string(text.substr(start, i - start));
    if (v.prerelease.empty()) return std::nullopt;
    for (char c : v.prerelease) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') {
        return std::nullopt;
      }
    }
  }
  if (i < text.size() && text[i] == '+') return v;  // build metadata ignored
  if (i != text.size()) return std::nullopt;
  return v;
}

/// SemVer 2.0 precedence: compare the numeric triple, then prerelease
/// identifiers (a release outranks any of its prereleases; identifiers
/// compare numerically when both numeric, lexically otherwise, numeric
/// lowest; a longer identifier list wins over its prefix). Returns -1/0/1.
inline int compare(const Version& a, const Version& b) {
  if (a.major != b.major) return a.major < b.major ? -1 : 1;
  if (a.minor != b.minor) return a.minor < b.minor ? -1 : 1;
  if (a.patch != b.patch) return a.patch < b.patch ? -1 : 1;
  if (a.prerelease.empty() && b.prerelease.empty()) return 0;
  if (a.prerelease.empty()) return 1;
  if (b.prerelease.empty()) return -1;

  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      std::size_t dot = s.find('.', start);
      if (dot == std::string::npos) {
        parts.push_back(s.substr(start));
        break;
      }
      parts.push_back(s.substr(start, dot - start));
      start = dot + 1;
    }
    return parts;
  };
  auto numeric = [](const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
  };

  const std::vector<std::string> pa = split(a.prerelease);
  const std::vector<std::string> pb = split(b.prerelease);
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
    const bool na = numeric(pa[i]), nb = numeric(pb[i]);
    if (na && nb) {
      const long long va = std::stoll(pa[i]), vb = std::stoll(pb[i]);
      if (va != vb) return va < vb ? -1 : 1;
    } else if (na != nb) {
      return na ? -1 : 1;  // numeric identifiers sort lowest
    } else if (pa[i] != pb[i]) {
      return pa[i] < pb[i] ? -1 : 1;
    }
  }
  if (pa.size() != pb.size()) return pa.size() < pb.size() ? -1 : 1;
  return 0;
}

inline bool operator<(const Version& a, const Version& b) { return compare(a, b) < 0; }

// ---------------------------------------------------------------------------
// Ranges

enum class ComparatorOp { Lt, Le, Gt, Ge };

struct VersionRange {
  struct Exact { Version v; };
  struct Caret { Version v; };
  struct Tilde { Version v; };
  struct Comparator { ComparatorOp op; Version v; };
  struct Wildcard {};
  struct Conjunction { std::vector<VersionRange> parts; };

  std::variant<Exact, Caret, Tilde, Comparator, Wildcard, Conjunction> node = Wildcard{};
  std::string text = "*";  // the source form, kept for serialization

  static VersionRange parse(std::string_view text);
};

inline VersionRange VersionRange::parse(std::string_view text) {
  auto malformed = [&](std::size_t pos) {
    return error("MalformedRange", "cannot parse range '" + std::string(text) + "' at position " +
                                       std::to_string(pos));
  };

  // Tokenize on whitespace.
  std::vector<std::pair<std::string_view, std::size_t>> atoms;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    atoms.emplace_back(text.substr(start, i - start), start);
  }

  auto parse_atom = [&](std::string_view atom, std::size_t pos) -> VersionRange {
    VersionRange r;
    r.text = std::string(atom);
    if (atom == "*") {
      r.node = Wildcard{};
      return r;
    }
    auto version_or_throw = [&](std::string_view s) {
      auto v = Version::try_parse(s);
      if (!v) {
        // Range atoms accept the loose forms "1" and "1.2" (requirements
        // files use them); missing components pad with zero.
        bool loose = !s.empty();
        int dots = 0;
        for (char c : s) {
          if (c == '.') ++dots;
          else if (!std::isdigit(static_cast<unsigned char>(c))) loose = false;
        }
        if (loose && dots < 2) {
          v = Version::try_parse(std::string(s) + (dots == 0 ? ".0.0" : ".0"));
        }
        if (!v) throw malformed(pos);
      }
      return *v;
    };
    if (atom.starts_with("^")) {
      r.node = Caret{version_or_throw(atom.substr(1))};
    } else if (atom.starts_with("~")) {
      r.node = Tilde{version_or_throw(atom.substr(1))};
    } else if (atom.starts_with(">=")) {
      r.node = Comparator{ComparatorOp::Ge, version_or_throw(atom.substr(2))};
    } else if (atom.starts_with("<=")) {
      r.node = Comparator{ComparatorOp::Le, version_or_throw(atom.substr(2))};
    } else if (atom.starts_with(">")) {
      r.node = Comparator{ComparatorOp::Gt, version_or_throw(atom.substr(1))};
    } else if (atom.starts_with("<")) {
      r.node = Comparator{ComparatorOp::Lt, version_or_throw(atom.substr(1))};
    } else if (atom.starts_with("==")) {
      r.node = Exact{version_or_throw(atom.substr(2))};
    } else if (atom.starts_with("=")) {
      r.node = Exact{version_or_throw(atom.substr(1))};
    } else {
      r.node = Exact{version_or_throw(atom)};
    }
    return r;
  };

  if (atoms.empty()) {
    return VersionRange{};  // blank means unconstrained
  }
  if (atoms.size() == 1) {
    return parse_atom(atoms[0].first, atoms[0].second);
  }
  VersionRange out;
  Conjunction all;
  for (const auto& [atom, pos] : atoms) all.parts.push_back(parse_atom(atom, pos));
  out.node = std::move(all);
  out.text = std::string(text);
  return out;
}

/// Range membership. Prerelease versions satisfy only an Exact range naming
/// them precisely; every other range form rejects them, matching the
/// conservative convention of package managers.
inline bool range_contains(const VersionRange& range, const Version& v) {
  if (!v.prerelease.empty()) {
    const auto* exact = std::get_if<VersionRange::Exact>(&range.node);
    return exact != nullptr && compare(exact->v, v) == 0;
  }
  struct Visitor {
    const Version& v;

    bool operator()(const VersionRange::Exact& r) const { return compare(r.v, v) == 0; }
    bool operator()(const VersionRange::Caret& r) const {
      if (compare(v, r.v) < 0) return false;
      Version upper;
      if (r.v.major > 0) {
        upper = {r.v.major + 1, 0, 0, {}};
      } else {
        upper = {0, r.v.minor + 1, 0, {}};
      }
      return compare(v, upper) < 0;
    }
    bool operator()(const VersionRange::Tilde& r) const {
      if (compare(v, r.v) < 0) return false;
      const Version upper{r.v.major, r.v.minor + 1, 0, {}};
      return compare(v, upper) < 0;
    }
    bool operator()(const VersionRange::Comparator& r) const {
      const int c = compare(v, r.v);
      switch (r.op) {
        case ComparatorOp::Lt: return c < 0;
        case ComparatorOp::Le: return c <= 0;
        case ComparatorOp::Gt: return c > 0;
        case ComparatorOp::Ge: return c >= 0;
      }
      return false;
    }
    bool operator()(const VersionRange::Wildcard&) const { return true; }
    bool operator()(const VersionRange::Conjunction& r) const {
      for (const VersionRange& part : r.parts) {
        if (!range_contains(part, v)) return false;
      }
      return true;
    }
  };
  return std::visit(Visitor{v}, range.node);
}

}  // namespace sgp
