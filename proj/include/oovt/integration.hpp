#pragma once

// Augmented translation pairs for a downstream MT system.
//
// Pair file, one pair per line in input order:
//   source<TAB>target<TAB>pos_or_dash<TAB>kind<TAB>feature=value;feature=value
// kind is `translated` or `do_not_translate`; feature values are integers.

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "oovt/errors.hpp"
#include "oovt/prediction.hpp"
#include "oovt/text.hpp"

namespace oovt {

enum class PairKind { Translated, DoNotTranslate };

inline std::string_view pair_kind_name(PairKind k) {
  return k == PairKind::Translated ? "translated" : "do_not_translate";
}

inline constexpr std::string_view kOovIndicator = "oov_indicator";

struct AugmentedPair {
  std::string source;
  std::string target;
  std::optional<std::string> pos_tag;
  PairKind kind = PairKind::Translated;
  std::map<std::string, long long> features;

  friend bool operator==(const AugmentedPair&, const AugmentedPair&) = default;
};

/// One translated and one do-not-translate pair per prediction; copy-through
/// fallbacks only get the do-not-translate pair.
inline std::vector<AugmentedPair> emit_augmented_pairs(
    const std::vector<Prediction>& preds, const std::map<std::string, std::string>* pos_lookup = nullptr) {
  if (preds.empty()) throw UsageError("emit_augmented_pairs: no predictions");
  std::vector<AugmentedPair> out;
  out.reserve(2 * preds.size());
  for (const auto& p : preds) {
    if (!p.fallback) {
      AugmentedPair t{p.oov, p.predicted, std::nullopt, PairKind::Translated, {{std::string(kOovIndicator), 1}}};
      if (pos_lookup)
        if (auto it = pos_lookup->find(p.oov); it != pos_lookup->end()) t.pos_tag = it->second;
      out.push_back(std::move(t));
    }
    out.push_back({p.oov, p.oov, std::nullopt, PairKind::DoNotTranslate, {{std::string(kOovIndicator), 0}}});
  }
  return out;
}

inline void write_pair_file(const std::vector<AugmentedPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) {
    if (p.kind == PairKind::DoNotTranslate && p.source != p.target)
      throw UsageError("do-not-translate pair with source '" + p.source + "' != target '" + p.target + "'");
    out << p.source << '\t' << p.target << '\t' << (p.pos_tag ? *p.pos_tag : "-") << '\t' << pair_kind_name(p.kind)
        << '\t';
    bool first = true;
    for (const auto& [k, v] : p.features) {
      if (!first) out << ';';
      out << k << '=' << v;
      first = false;
    }
    out << '\n';
  }
}

inline void write_pair_file(const std::vector<AugmentedPair>& pairs, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  write_pair_file(pairs, f.stream());
  f.commit();
}

inline AugmentedPair parse_pair_line(std::string_view line, const std::string& path = "<pairs>",
                                     std::size_t lineno = 0) {
  auto f = text::split(line, '\t');
  if (f.size() != 5) throw DataError(path, lineno, "expected 5 tab-separated fields");
  AugmentedPair p;
  p.source = f[0];
  p.target = f[1];
  if (p.source.empty() || p.target.empty()) throw DataError(path, lineno, "empty source or target");
  if (f[2] != "-") p.pos_tag = f[2];
  if (f[3] == "translated")
    p.kind = PairKind::Translated;
  else if (f[3] == "do_not_translate")
    p.kind = PairKind::DoNotTranslate;
  else
    throw DataError(path, lineno, "unknown pair kind '" + std::string(f[3]) + "'");
  if (!f[4].empty())
    for (const auto& kv : text::split(f[4], ';')) {
      auto eq = kv.find('=');
      if (eq == std::string_view::npos || eq == 0) throw DataError(path, lineno, "malformed feature '" + std::string(kv) + "'");
      auto v = text::parse_int(kv.substr(eq + 1));
      if (!v) throw DataError(path, lineno, "non-integer feature value in '" + std::string(kv) + "'");
      p.features[std::string(kv.substr(0, eq))] = *v;
    }
  if (p.kind == PairKind::DoNotTranslate && p.source != p.target)
    throw DataError(path, lineno, "do-not-translate pair must have source == target");
  return p;
}

inline std::vector<AugmentedPair> load_pair_file(const std::filesystem::path& path) {
  const std::string ps = path.string();
  std::vector<AugmentedPair> out;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    out.push_back(parse_pair_line(lines[i], ps, i + 1));
  }
  return out;
}

}  // namespace oovt
