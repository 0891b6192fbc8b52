#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oovt/unicode.hpp"

namespace oovt::seq2seq {

/// Character inventory with four reserved ids. Unseen characters map to UNK.
class CharVocab {
 public:
  static constexpr int PAD = 0;
  static constexpr int BOS = 1;
  static constexpr int EOS = 2;
  static constexpr int UNK = 3;
  static constexpr int kSpecials = 4;

  CharVocab() = default;

  /// Builds the inventory from every character of the given strings, ordered by code point.
  template <class Range>
  static CharVocab from_strings(const Range& strings) {
    std::set<char32_t> chars;
    for (const auto& s : strings)
      for (char32_t c : unicode::decode(s)) chars.insert(c);
    return CharVocab(std::vector<char32_t>(chars.begin(), chars.end()));
  }

  explicit CharVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
    for (std::size_t i = 0; i < chars_.size(); ++i) ids_.emplace(chars_[i], static_cast<int>(i) + kSpecials);
  }

  int size() const { return static_cast<int>(chars_.size()) + kSpecials; }
  const std::vector<char32_t>& chars() const { return chars_; }

  int id(char32_t c) const {
    auto it = ids_.find(c);
    return it == ids_.end() ? UNK : it->second;
  }

  std::vector<int> encode(std::string_view s) const {
    std::vector<int> out;
    for (char32_t c : unicode::decode(s)) out.push_back(id(c));
    return out;
  }

  /// Drops special ids.
  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    for (int i : ids)
      if (i >= kSpecials && i < size()) unicode::append_utf8(out, chars_[static_cast<std::size_t>(i - kSpecials)]);
    return out;
  }

  friend bool operator==(const CharVocab& a, const CharVocab& b) { return a.chars_ == b.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::map<char32_t, int> ids_;
};

}  // namespace oovt::seq2seq
