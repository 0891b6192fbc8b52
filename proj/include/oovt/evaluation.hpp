#pragma once

// Exact-match evaluation, stratification by OOV category and method comparison.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oovt/dataset.hpp"
#include "oovt/errors.hpp"
#include "oovt/prediction.hpp"
#include "oovt/text.hpp"
#include "oovt/unicode.hpp"

namespace oovt {

enum class OOVCategory { MorphologicalVariation, Misspelling, Transliteration, Compounding, ProperNoun };

inline constexpr std::array<OOVCategory, 5> kAllCategories = {
    OOVCategory::MorphologicalVariation, OOVCategory::Misspelling, OOVCategory::Transliteration,
    OOVCategory::Compounding, OOVCategory::ProperNoun};

inline std::string_view category_name(OOVCategory c) {
  switch (c) {
    case OOVCategory::MorphologicalVariation: return "MorphologicalVariation";
    case OOVCategory::Misspelling: return "Misspelling";
    case OOVCategory::Transliteration: return "Transliteration";
    case OOVCategory::Compounding: return "Compounding";
    case OOVCategory::ProperNoun: return "ProperNoun";
  }
  return "?";
}

inline OOVCategory parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (category_name(c) == s) return c;
  throw DataError("unknown OOV category '" + std::string(s) + "'");
}

struct EvalOptions {
  bool case_fold = false;
};

inline bool matches(const Prediction& p, const EvalOptions& opt = {}) {
  if (opt.case_fold) return unicode::fold_case(p.predicted) == unicode::fold_case(p.gold);
  return p.predicted == p.gold;
}

inline double exact_match_accuracy(const std::vector<Prediction>& preds, const EvalOptions& opt = {}) {
  if (preds.empty()) throw DataError("exact_match_accuracy: no predictions");
  std::size_t hits = 0;
  for (const auto& p : preds) hits += matches(p, opt);
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

struct CategoryRow {
  std::size_t count = 0;
  std::size_t matches = 0;
  double accuracy() const { return count ? static_cast<double>(matches) / static_cast<double>(count) : 0.0; }
};

struct EvalReport {
  std::size_t n = 0;
  std::size_t matches = 0;
  std::map<OOVCategory, CategoryRow> per_category;  // empty without annotations

  double overall_accuracy() const { return n ? static_cast<double>(matches) / static_cast<double>(n) : 0.0; }
};

inline EvalReport evaluate(const std::vector<Prediction>& preds, const EvalOptions& opt = {}) {
  if (preds.empty()) throw DataError("evaluate: no predictions");
  EvalReport r;
  r.n = preds.size();
  for (const auto& p : preds) r.matches += matches(p, opt);
  return r;
}

/// Per-category counts and accuracies over the annotated OOVs, plus the overall row.
inline EvalReport stratified_report(const std::vector<Prediction>& preds,
                                    const std::map<std::string, OOVCategory>& annotations,
                                    const EvalOptions& opt = {}) {
  EvalReport r = evaluate(preds, opt);
  std::map<std::string, const Prediction*> by_oov;
  for (const auto& p : preds) by_oov.emplace(p.oov, &p);
  for (const auto& [oov, cat] : annotations)
    if (!by_oov.count(oov)) throw DataError("annotation refers to OOV '" + oov + "' which has no prediction");
  for (const auto& p : preds) {
    auto it = annotations.find(p.oov);
    if (it == annotations.end()) continue;
    auto& row = r.per_category[it->second];
    ++row.count;
    row.matches += matches(p, opt);
  }
  return r;
}

/// `oov<TAB>category`
inline std::map<std::string, OOVCategory> load_annotations(const std::filesystem::path& path) {
  const std::string ps = path.string();
  std::map<std::string, OOVCategory> out;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 2) throw DataError(ps, i + 1, "expected 2 tab-separated fields");
    OOVCategory c;
    try {
      c = parse_category(f[1]);
    } catch (const DataError& e) {
      throw DataError(ps, i + 1, e.what());
    }
    auto [it, inserted] = out.emplace(detail::normalized_field(f[0], ps, i + 1, "oov"), c);
    if (!inserted) throw DataError(ps, i + 1, "duplicate annotation for '" + it->first + "'");
  }
  return out;
}

inline void write_annotations(const std::map<std::string, OOVCategory>& ann, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  for (const auto& [oov, c] : ann) f.stream() << oov << '\t' << category_name(c) << '\n';
  f.commit();
}

/// Attaches gold targets to predictions by OOV. Every gold OOV needs a prediction.
inline std::vector<Prediction> join_with_gold(std::vector<Prediction> preds, const std::vector<OOVPair>& gold) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < preds.size(); ++i) index.emplace(preds[i].oov, i);
  std::vector<Prediction> out;
  out.reserve(gold.size());
  for (const auto& g : gold) {
    auto it = index.find(g.source_word);
    if (it == index.end()) throw DataError("no prediction for gold OOV '" + g.source_word + "'");
    Prediction p = preds[it->second];
    p.gold = g.gold_target;
    out.push_back(std::move(p));
  }
  if (out.size() != preds.size()) {
    std::set<std::string> gold_words;
    for (const auto& g : gold) gold_words.insert(g.source_word);
    for (const auto& p : preds)
      if (!gold_words.count(p.oov)) throw DataError("prediction for '" + p.oov + "' has no gold translation");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Method comparison

struct ComparisonRow {
  std::string dataset;
  std::map<std::string, double> accuracy;  // method -> accuracy
  std::set<std::string> best;              // every method attaining the row maximum
};

struct ComparisonTable {
  std::vector<std::string> methods;
  std::vector<ComparisonRow> rows;
  std::optional<ComparisonRow> average;  // present with more than one dataset
};

namespace detail {
inline void mark_best(ComparisonRow& row) {
  double best = -1;
  for (const auto& [m, a] : row.accuracy) best = std::max(best, a);
  for (const auto& [m, a] : row.accuracy)
    if (a == best) row.best.insert(m);
}
}  // namespace detail

/// Rows per dataset with the best method(s) marked. With several datasets an
/// average row holds the unweighted mean of per-dataset accuracies.
inline ComparisonTable method_comparison(const std::map<std::string, std::map<std::string, EvalReport>>& by_dataset) {
  ComparisonTable t;
  std::set<std::string> methods;
  for (const auto& [ds, reports] : by_dataset) {
    ComparisonRow row{ds, {}, {}};
    for (const auto& [m, r] : reports) {
      row.accuracy[m] = r.overall_accuracy();
      methods.insert(m);
    }
    detail::mark_best(row);
    t.rows.push_back(std::move(row));
  }
  t.methods.assign(methods.begin(), methods.end());
  if (by_dataset.size() > 1) {
    ComparisonRow avg{"Average", {}, {}};
    for (const auto& m : t.methods) {
      double sum = 0;
      std::size_t k = 0;
      for (const auto& row : t.rows)
        if (auto it = row.accuracy.find(m); it != row.accuracy.end()) {
          sum += it->second;
          ++k;
        }
      if (k) avg.accuracy[m] = sum / static_cast<double>(k);
    }
    detail::mark_best(avg);
    t.average = std::move(avg);
  }
  return t;
}

inline ComparisonTable method_comparison(const std::map<std::string, EvalReport>& reports,
                                         const std::string& dataset = "test") {
  return method_comparison(std::map<std::string, std::map<std::string, EvalReport>>{{dataset, reports}});
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string percent(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * x << "%";
  return os.str();
}

/// Aligned text grid; '*' marks the best method in each row.
inline std::string render_comparison(const ComparisonTable& t) {
  std::ostringstream os;
  auto cell = [](const ComparisonRow& row, const std::string& m) {
    auto it = row.accuracy.find(m);
    if (it == row.accuracy.end()) return std::string("-");
    return percent(it->second) + (row.best.count(m) ? "*" : " ");
  };
  std::size_t w0 = 7;
  for (const auto& r : t.rows) w0 = std::max(w0, r.dataset.size());
  os << std::left << std::setw(static_cast<int>(w0) + 2) << "Dataset";
  for (const auto& m : t.methods) os << std::right << std::setw(12) << m;
  os << '\n';
  auto emit = [&](const ComparisonRow& r) {
    os << std::left << std::setw(static_cast<int>(w0) + 2) << r.dataset;
    for (const auto& m : t.methods) os << std::right << std::setw(12) << cell(r, m);
    os << '\n';
  };
  for (const auto& r : t.rows) emit(r);
  if (t.average) emit(*t.average);
  return os.str();
}

/// Category grid: occurrences and per-method accuracy, with an "All" row.
inline std::string render_stratified(const std::map<std::string, EvalReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(26) << "OOV Category" << std::right << std::setw(12) << "Occurrences";
  for (const auto& [m, r] : reports) os << std::setw(12) << m;
  os << '\n';
  for (auto c : kAllCategories) {
    std::size_t count = 0;
    for (const auto& [m, r] : reports)
      if (auto it = r.per_category.find(c); it != r.per_category.end()) count = it->second.count;
    os << std::left << std::setw(26) << category_name(c) << std::right << std::setw(12) << count;
    for (const auto& [m, r] : reports) {
      auto it = r.per_category.find(c);
      os << std::setw(12) << (it == r.per_category.end() ? std::string("-") : percent(it->second.accuracy()));
    }
    os << '\n';
  }
  std::size_t annotated = 0;
  if (!reports.empty())
    for (const auto& [c, row] : reports.begin()->second.per_category) annotated += row.count;
  os << std::left << std::setw(26) << "All" << std::right << std::setw(12) << annotated;
  for (const auto& [m, r] : reports) {
    std::size_t hits = 0, n = 0;
    for (const auto& [c, row] : r.per_category) {
      hits += row.matches;
      n += row.count;
    }
    os << std::setw(12) << (n ? percent(static_cast<double>(hits) / static_cast<double>(n)) : std::string("-"));
  }
  os << '\n';
  return os.str();
}

/// Expected exact match of a translator that picks a target uniformly from `target_vocab`.
inline double random_baseline_accuracy(const std::vector<OOVPair>& gold, const std::set<std::string>& target_vocab) {
  if (gold.empty()) throw DataError("random baseline: empty gold set");
  if (target_vocab.empty()) throw DataError("random baseline: empty target vocabulary");
  std::size_t covered = 0;
  for (const auto& p : gold) covered += target_vocab.count(p.gold_target);
  return static_cast<double>(covered) / static_cast<double>(gold.size()) / static_cast<double>(target_vocab.size());
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["matches"] = r.matches;
  j["overall_accuracy"] = r.overall_accuracy();
  if (!r.per_category.empty()) {
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [c, row] : r.per_category)
      cats[std::string(category_name(c))] = {{"count", row.count}, {"matches", row.matches}, {"accuracy", row.accuracy()}};
    j["per_category"] = cats;
  }
  return j;
}

inline nlohmann::json to_json(const ComparisonTable& t) {
  auto row_json = [](const ComparisonRow& r) {
    return nlohmann::json{{"dataset", r.dataset}, {"accuracy", r.accuracy}, {"best", r.best}};
  };
  nlohmann::json j;
  j["methods"] = t.methods;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) j["rows"].push_back(row_json(r));
  if (t.average) j["average"] = row_json(*t.average);
  return j;
}

}  // namespace oovt
