#pragma once

// The four resource types a subword OOV translator is built from: a bilingual
// lexicon, token-level translation tables, monolingual source text and
// word-aligned parallel text. All loaders normalize tokens to NFC.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "oovt/errors.hpp"
#include "oovt/log.hpp"
#include "oovt/text.hpp"
#include "oovt/unicode.hpp"

namespace oovt {

struct LexiconEntry {
  std::string source_word;
  std::string pos_tag;
  std::string target_word;  // may hold a space-joined multiword translation

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

using Lexicon = std::vector<LexiconEntry>;

struct TranslationTableEntry {
  std::string source_word;
  std::string target_word;
  double prob = 0.0;  // p(target | source)
  std::int64_t count = 0;

  friend bool operator==(const TranslationTableEntry&, const TranslationTableEntry&) = default;
};

struct TranslationTable {
  std::vector<TranslationTableEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  friend bool operator==(const TranslationTable&, const TranslationTable&) = default;
};

struct Link {
  std::size_t source = 0;
  std::size_t target = 0;
  auto operator<=>(const Link&) const = default;
};

struct AlignedSentencePair {
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  std::set<Link> links;

  friend bool operator==(const AlignedSentencePair&, const AlignedSentencePair&) = default;
};

struct MonolingualCorpus {
  std::vector<std::vector<std::string>> sentences;
  std::map<std::string, std::int64_t> token_counts;

  static MonolingualCorpus from_sentences(std::vector<std::vector<std::string>> sentences) {
    MonolingualCorpus c;
    c.sentences = std::move(sentences);
    for (const auto& s : c.sentences)
      for (const auto& t : s) ++c.token_counts[t];
    return c;
  }
};

/// Target-language unigram counts used to break ties. Absent tokens count as 0.
class TargetFrequencyTable {
 public:
  TargetFrequencyTable() = default;
  explicit TargetFrequencyTable(std::map<std::string, std::int64_t> counts) : counts_(std::move(counts)) {}

  std::int64_t lookup(const std::string& token) const {
    auto it = counts_.find(token);
    return it == counts_.end() ? 0 : it->second;
  }
  void set(const std::string& token, std::int64_t count) { counts_[token] = count; }
  std::size_t size() const { return counts_.size(); }
  const std::map<std::string, std::int64_t>& counts() const { return counts_; }

 private:
  std::map<std::string, std::int64_t> counts_;
};

// ---------------------------------------------------------------------------
// Loaders

namespace detail {
inline std::string normalized_field(std::string_view f, const std::string& path, std::size_t line,
                                    const char* what) {
  try {
    std::string s = unicode::normalize(f);
    if (s.empty()) throw DataError(path, line, std::string("empty ") + what);
    return s;
  } catch (const DataError& e) {
    if (!std::string_view(e.what()).starts_with(path)) throw DataError(path, line, e.what());
    throw;
  }
}

inline std::string normalize_phrase(std::string_view f, const std::string& path, std::size_t line,
                                    const char* what) {
  auto toks = text::tokenize(f);
  if (toks.empty()) throw DataError(path, line, std::string("empty ") + what);
  for (auto& t : toks) t = normalized_field(t, path, line, what);
  return text::join(toks, " ");
}

inline std::vector<std::string> normalized_tokens(std::string_view line, const std::string& path,
                                                  std::size_t lineno) {
  auto toks = text::tokenize(line);
  for (auto& t : toks) t = normalized_field(t, path, lineno, "token");
  return toks;
}
}  // namespace detail

/// Reads `source<TAB>pos<TAB>target` lines. Duplicate sources stay separate entries.
inline Lexicon load_lexicon(const std::filesystem::path& path) {
  const std::string p = path.string();
  Lexicon lex;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 3) throw DataError(p, i + 1, "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    lex.push_back({detail::normalized_field(f[0], p, i + 1, "source word"),
                   detail::normalized_field(f[1], p, i + 1, "POS tag"),
                   detail::normalize_phrase(f[2], p, i + 1, "target word")});
  }
  if (lex.empty()) log::warn("lexicon is empty: " + p);
  return lex;
}

/// Reads `source<TAB>target<TAB>prob<TAB>count` lines. Probabilities are only range-checked.
inline TranslationTable load_translation_table(const std::filesystem::path& path) {
  const std::string p = path.string();
  TranslationTable table;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 4) throw DataError(p, i + 1, "expected 4 tab-separated fields, got " + std::to_string(f.size()));
    auto prob = text::parse_double(f[2]);
    if (!prob) throw DataError(p, i + 1, "probability is not a number: '" + std::string(f[2]) + "'");
    if (*prob < 0.0 || *prob > 1.0) throw DataError(p, i + 1, "probability out of range [0,1]: " + std::string(f[2]));
    auto count = text::parse_int(f[3]);
    if (!count) throw DataError(p, i + 1, "count is not an integer: '" + std::string(f[3]) + "'");
    if (*count < 0) throw DataError(p, i + 1, "count is negative: " + std::string(f[3]));
    table.entries.push_back({detail::normalized_field(f[0], p, i + 1, "source word"),
                             detail::normalized_field(f[1], p, i + 1, "target word"), *prob, *count});
  }
  if (table.empty()) log::warn("translation table is empty: " + p);
  return table;
}

/// Parses one Pharaoh alignment line ("0-0 1-2 ...") against the given sentence lengths.
inline std::set<Link> parse_alignment_line(std::string_view line, std::size_t n_source, std::size_t n_target,
                                           const std::string& path = "<alignment>", std::size_t lineno = 0) {
  std::set<Link> links;
  for (const auto& tok : text::tokenize(line)) {
    auto dash = tok.find('-');
    if (dash == std::string::npos) throw DataError(path, lineno, "unparsable link '" + tok + "'");
    auto s = text::parse_int(std::string_view(tok).substr(0, dash));
    auto t = text::parse_int(std::string_view(tok).substr(dash + 1));
    if (!s || !t || *s < 0 || *t < 0) throw DataError(path, lineno, "unparsable link '" + tok + "'");
    if (static_cast<std::size_t>(*s) >= n_source || static_cast<std::size_t>(*t) >= n_target)
      throw DataError(path, lineno, "link '" + tok + "' out of range for sentence lengths " +
                                        std::to_string(n_source) + "/" + std::to_string(n_target));
    links.insert({static_cast<std::size_t>(*s), static_cast<std::size_t>(*t)});
  }
  return links;
}

inline std::string format_alignment(const std::set<Link>& links) {
  std::string out;
  for (const auto& l : links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.source) + "-" + std::to_string(l.target);
  }
  return out;
}

/// Reads source text, target text and tokenized sentence pairs without alignments.
inline std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> load_bitext(
    const std::filesystem::path& src_path, const std::filesystem::path& tgt_path) {
  auto src = text::read_lines(src_path);
  auto tgt = text::read_lines(tgt_path);
  if (src.size() != tgt.size())
    throw DataError("line-count mismatch: " + src_path.string() + " has " + std::to_string(src.size()) +
                    " lines, " + tgt_path.string() + " has " + std::to_string(tgt.size()));
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto s = detail::normalized_tokens(src[i], src_path.string(), i + 1);
    auto t = detail::normalized_tokens(tgt[i], tgt_path.string(), i + 1);
    if (s.empty()) throw DataError(src_path.string(), i + 1, "empty sentence");
    if (t.empty()) throw DataError(tgt_path.string(), i + 1, "empty sentence");
    out.emplace_back(std::move(s), std::move(t));
  }
  return out;
}

inline std::vector<AlignedSentencePair> load_parallel(const std::filesystem::path& src_path,
                                                      const std::filesystem::path& tgt_path,
                                                      const std::filesystem::path& align_path) {
  auto bitext = load_bitext(src_path, tgt_path);
  auto align = text::read_lines(align_path);
  if (align.size() != bitext.size())
    throw DataError("line-count mismatch: " + align_path.string() + " has " + std::to_string(align.size()) +
                    " lines, expected " + std::to_string(bitext.size()));
  std::vector<AlignedSentencePair> out;
  out.reserve(bitext.size());
  for (std::size_t i = 0; i < bitext.size(); ++i) {
    auto& [s, t] = bitext[i];
    auto links = parse_alignment_line(align[i], s.size(), t.size(), align_path.string(), i + 1);
    out.push_back({std::move(s), std::move(t), std::move(links)});
  }
  return out;
}

inline TargetFrequencyTable load_target_frequencies(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::map<std::string, std::int64_t> counts;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 2) throw DataError(p, i + 1, "expected 2 tab-separated fields");
    auto c = text::parse_int(f[1]);
    if (!c) throw DataError(p, i + 1, "count is not an integer: '" + std::string(f[1]) + "'");
    if (*c < 0) throw DataError(p, i + 1, "count is negative: " + std::string(f[1]));
    counts[detail::normalized_field(f[0], p, i + 1, "token")] = *c;
  }
  return TargetFrequencyTable(std::move(counts));
}

inline MonolingualCorpus load_monolingual(const std::filesystem::path& path) {
  auto lines = text::read_lines(path);
  std::vector<std::vector<std::string>> sentences;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto toks = detail::normalized_tokens(lines[i], path.string(), i + 1);
    if (!toks.empty()) sentences.push_back(std::move(toks));
  }
  return MonolingualCorpus::from_sentences(std::move(sentences));
}

// ---------------------------------------------------------------------------
// Writers

/// Probabilities are written in shortest round-trip form, so reload is exact.
inline void write_translation_table(const TranslationTable& table, std::ostream& out) {
  for (const auto& e : table.entries)
    out << e.source_word << '\t' << e.target_word << '\t' << text::format_double(e.prob) << '\t' << e.count
        << '\n';
}

inline void write_translation_table(const TranslationTable& table, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  write_translation_table(table, f.stream());
  f.commit();
}

inline void write_lexicon(const Lexicon& lex, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  for (const auto& e : lex) f.stream() << e.source_word << '\t' << e.pos_tag << '\t' << e.target_word << '\n';
  f.commit();
}

/// Writes the three parallel files (source, target, Pharaoh alignment).
inline void write_parallel(const std::vector<AlignedSentencePair>& pairs, const std::filesystem::path& src_path,
                           const std::filesystem::path& tgt_path, const std::filesystem::path& align_path) {
  text::AtomicFile s(src_path), t(tgt_path), a(align_path);
  for (const auto& p : pairs) {
    s.stream() << text::join(p.source_tokens, " ") << '\n';
    t.stream() << text::join(p.target_tokens, " ") << '\n';
    a.stream() << format_alignment(p.links) << '\n';
  }
  s.commit();
  t.commit();
  a.commit();
}

// ---------------------------------------------------------------------------
// Derivation

/// Census of links: count(s,t) is the number of links joining s to t, prob is
/// count normalized per source word. Entries are ordered by (source, target).
inline TranslationTable derive_translation_table(const std::vector<AlignedSentencePair>& pairs) {
  std::map<std::string, std::map<std::string, std::int64_t>> counts;
  for (const auto& p : pairs)
    for (const auto& l : p.links) ++counts[p.source_tokens.at(l.source)][p.target_tokens.at(l.target)];
  TranslationTable table;
  for (const auto& [src, row] : counts) {
    std::int64_t total = 0;
    for (const auto& [tgt, c] : row) total += c;
    for (const auto& [tgt, c] : row)
      table.entries.push_back({src, tgt, static_cast<double>(c) / static_cast<double>(total), c});
  }
  return table;
}

/// Union of lexicon and translation-table source words.
inline std::vector<std::string> source_vocabulary(const Lexicon& lex, const TranslationTable& table) {
  std::set<std::string> v;
  for (const auto& e : lex) v.insert(e.source_word);
  for (const auto& e : table.entries) v.insert(e.source_word);
  return {v.begin(), v.end()};
}

}  // namespace oovt
