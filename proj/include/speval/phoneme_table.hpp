// speval/phoneme_table.hpp
//
// Copyright 2026 The speval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPEVAL_PHONEME_TABLE_HPP_
#define SPEVAL_PHONEME_TABLE_HPP_

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "speval/common.hpp"
#include "speval/text.hpp"

namespace speval {

/// Merged multilingual phoneme vocabulary. Regular entries are language
/// prefixed ("en_AA", "my_a"); prefixing makes entries from different
/// languages disjoint even when the base symbols coincide. The table ends
/// with one sentence-end symbol per language and a shared unknown symbol,
/// in that order:
///
///   en_AA en_AE my_a my_i <eos:en> <eos:my> <unk>
///
/// Entry order is fixed at build time; indexes into the table double as
/// embedding-matrix row indexes.
class MultilingualPhonemeTable {
 public:
  static constexpr const char* kUnk = "<unk>";

  static std::string EosSymbol(const std::string& language) {
    return "<eos:" + language + ">";
  }

  static std::string Prefixed(const std::string& language,
                              const std::string& symbol) {
    return language + "_" + symbol;
  }

  // per_language: (language tag, unprefixed symbols), in the order the
  // languages should appear in the table.
  static MultilingualPhonemeTable Build(
      const std::vector<std::pair<std::string, std::vector<std::string>>>&
          per_language) {
    MultilingualPhonemeTable table;
    for (const auto& [lang, symbols] : per_language) {
      speval::Require(IsLanguageTag(lang), "invalid language tag: '" + lang + "'");
      for (const auto& lang2 : table.languages_)
        speval::Require(lang2 != lang, "duplicate language: '" + lang + "'");
      table.languages_.push_back(lang);
      for (const auto& sym : symbols) {
        speval::Require(!sym.empty(), lang + ": empty phoneme symbol");
        table.Add(Prefixed(lang, sym),
                  "duplicate phoneme '" + sym + "' in language '" + lang + "'");
      }
    }
    for (const auto& lang : table.languages_)
      table.Add(EosSymbol(lang), "duplicate eos symbol");
    table.Add(kUnk, "duplicate unk symbol");
    return table;
  }

  size_t Size() const { return entries_.size(); }
  const std::string& Entry(size_t i) const { return entries_[i]; }
  const std::vector<std::string>& Entries() const { return entries_; }
  const std::vector<std::string>& Languages() const { return languages_; }

  bool HasLanguage(const std::string& lang) const {
    for (const auto& l : languages_)
      if (l == lang) return true;
    return false;
  }

  // -1 when absent
  int Find(const std::string& symbol) const {
    auto it = index_.find(symbol);
    return it == index_.end() ? -1 : it->second;
  }

  int IndexOf(const std::string& symbol) const {
    int idx = Find(symbol);
    if (idx < 0) Fail("unknown phoneme symbol: '" + symbol + "'");
    return idx;
  }

  int UnkIndex() const { return index_.at(kUnk); }

  int EosIndex(const std::string& language) const {
    int idx = Find(EosSymbol(language));
    if (idx < 0) Fail("no eos symbol for language '" + language + "'");
    return idx;
  }

  /// Prefixed symbols of one language, excluding specials.
  std::vector<std::string> LanguageEntries(const std::string& lang) const {
    std::vector<std::string> out;
    std::string prefix = lang + "_";
    for (const auto& e : entries_)
      if (e.rfind(prefix, 0) == 0) out.push_back(e);
    return out;
  }

  void Save(const std::string& path) const {
    std::string text = "#entries=" + std::to_string(entries_.size()) +
                       " languages=" + JoinLanguages() + "\n";
    for (const auto& e : entries_) text += e + "\n";
    WriteFile(path, text);
  }

  static MultilingualPhonemeTable Load(const std::string& path) {
    auto lines = ReadLines(path);
    speval::Require(!lines.empty() && lines[0].rfind("#entries=", 0) == 0,
                    path + ":1: malformed phoneme-table header");
    auto head = Split(lines[0].substr(1), ' ');
    size_t n = static_cast<size_t>(
        ParseLong(Split(head[0], '=')[1], path + ":1"));
    speval::Require(head.size() == 2 && head[1].rfind("languages=", 0) == 0,
                    path + ":1: malformed phoneme-table header");
    MultilingualPhonemeTable table;
    for (const auto& lang : Split(head[1].substr(10), ','))
      if (!lang.empty()) table.languages_.push_back(lang);
    for (size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      table.Add(lines[i], path + ":" + std::to_string(i + 1) +
                              ": duplicate symbol '" + lines[i] + "'");
    }
    speval::Require(table.entries_.size() == n,
                    path + ": entry count does not match header");
    return table;
  }

 private:
  void Add(const std::string& symbol, const std::string& dup_msg) {
    auto [it, inserted] =
        index_.emplace(symbol, static_cast<int>(entries_.size()));
    (void)it;
    speval::Require(inserted, dup_msg);
    entries_.push_back(symbol);
  }

  std::string JoinLanguages() const {
    std::string out;
    for (size_t i = 0; i < languages_.size(); ++i) {
      if (i) out += ",";
      out += languages_[i];
    }
    return out;
  }

  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> languages_;
};

}  // namespace speval

#endif  // SPEVAL_PHONEME_TABLE_HPP_
