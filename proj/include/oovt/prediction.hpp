#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "oovt/corpus.hpp"
#include "oovt/errors.hpp"
#include "oovt/text.hpp"

namespace oovt {

enum class Method { Edit, Vector, Seq2Seq };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Edit: return "edit";
    case Method::Vector: return "vector";
    case Method::Seq2Seq: return "seq2seq";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "edit") return Method::Edit;
  if (s == "vector") return Method::Vector;
  if (s == "seq2seq") return Method::Seq2Seq;
  throw UsageError("unknown method '" + std::string(s) + "'; expected one of {edit, vector, seq2seq}");
}

struct Prediction {
  std::string oov;
  std::string predicted;
  std::string gold;  // empty until joined with a split
  Method method = Method::Edit;
  bool fallback = false;  // copy-through because no translation was available

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// `oov<TAB>prediction<TAB>method<TAB>fallback_flag`
inline void write_predictions(const std::vector<Prediction>& preds, std::ostream& out) {
  for (const auto& p : preds)
    out << p.oov << '\t' << p.predicted << '\t' << method_name(p.method) << '\t' << (p.fallback ? 1 : 0) << '\n';
}

inline void write_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  write_predictions(preds, f.stream());
  f.commit();
}

inline std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  const std::string ps = path.string();
  std::vector<Prediction> out;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 4) throw DataError(ps, i + 1, "expected 4 tab-separated fields");
    Prediction p;
    p.oov = detail::normalized_field(f[0], ps, i + 1, "oov");
    p.predicted = f[1].empty() ? std::string() : detail::normalize_phrase(f[1], ps, i + 1, "prediction");
    try {
      p.method = parse_method(f[2]);
    } catch (const UsageError& e) {
      throw DataError(ps, i + 1, e.what());
    }
    if (f[3] != "0" && f[3] != "1") throw DataError(ps, i + 1, "fallback flag must be 0 or 1");
    p.fallback = f[3] == "1";
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace oovt
