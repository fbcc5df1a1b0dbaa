#pragma once

// Time-period corpora: a lemmatized file and a raw file holding the same
// sentences line by line, plus per-target subcorpus extraction.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "framechange/error.hpp"
#include "framechange/text.hpp"

namespace framechange {

struct SentencePair {
  std::size_t index = 0;
  std::vector<std::string> lemma_tokens;
  std::vector<std::string> raw_tokens;

  bool operator==(const SentencePair &) const = default;
};

struct AlignedCorpus {
  std::string period_id;
  std::vector<SentencePair> sentences;
};

/// A SemEval-style target such as `plane_nn`: lemma and POS split at the
/// final underscore.
class TargetWord {
public:
  TargetWord() = default;

  explicit TargetWord(std::string surface) : surface_(std::move(surface)) {
    const auto us = surface_.rfind('_');
    if (us == std::string::npos || us == 0 || us + 1 == surface_.size() ||
        surface_.find_first_of(" \t\r\n\f\v") != std::string::npos)
      throw InvalidTarget(surface_);
    lemma_ = surface_.substr(0, us);
    pos_ = surface_.substr(us + 1);
  }

  const std::string &surface() const noexcept { return surface_; }
  const std::string &lemma() const noexcept { return lemma_; }
  const std::string &pos() const noexcept { return pos_; }

  auto operator<=>(const TargetWord &other) const {
    return surface_ <=> other.surface_;
  }
  bool operator==(const TargetWord &other) const {
    return surface_ == other.surface_;
  }

private:
  std::string surface_;
  std::string lemma_;
  std::string pos_;
};

namespace detail {

inline std::vector<std::vector<std::string>>
tokenize_corpus_file(const std::filesystem::path &path) {
  const auto lines = split_lines(read_text_file(path));
  std::vector<std::vector<std::string>> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto tokens = split_ws(lines[i]);
    if (tokens.empty())
      throw IoError("empty sentence at line " + std::to_string(i + 1) +
                    " of '" + path.string() + "'");
    out.push_back(std::move(tokens));
  }
  return out;
}

} // namespace detail

/// Loads the lemmatized and raw views of one period. Both files must hold the
/// same number of sentences; trailing blank lines are ignored in both.
inline AlignedCorpus load_corpus_pair(const std::filesystem::path &lemma_path,
                                      const std::filesystem::path &raw_path,
                                      std::string period_id) {
  auto lemma = detail::tokenize_corpus_file(lemma_path);
  auto raw = detail::tokenize_corpus_file(raw_path);
  if (lemma.size() != raw.size())
    throw LineCountMismatch(lemma.size(), raw.size());

  AlignedCorpus corpus;
  corpus.period_id = std::move(period_id);
  corpus.sentences.reserve(lemma.size());
  for (std::size_t i = 0; i < lemma.size(); ++i)
    corpus.sentences.push_back({i, std::move(lemma[i]), std::move(raw[i])});
  return corpus;
}

inline bool contains_target(const SentencePair &s, const TargetWord &target) {
  return std::find(s.lemma_tokens.begin(), s.lemma_tokens.end(),
                   target.surface()) != s.lemma_tokens.end();
}

inline std::vector<SentencePair> extract_subcorpus(const AlignedCorpus &corpus,
                                                   const TargetWord &target) {
  std::vector<SentencePair> out;
  std::copy_if(corpus.sentences.begin(), corpus.sentences.end(),
               std::back_inserter(out),
               [&](const SentencePair &s) { return contains_target(s, target); });
  return out;
}

/// One surface form per line; blank lines skipped, duplicates rejected.
inline std::vector<TargetWord>
read_target_list(const std::filesystem::path &path) {
  std::vector<TargetWord> targets;
  for (const auto &line : split_lines(read_text_file(path))) {
    const auto t = trim_ws(line);
    if (t.empty()) continue;
    targets.emplace_back(std::string(t));
  }
  auto sorted = targets;
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end());
      dup != sorted.end())
    throw ConfigError("duplicate target '" + dup->surface() + "' in '" +
                      path.string() + "'");
  return targets;
}

inline std::string join_tokens(const std::vector<std::string> &tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

} // namespace framechange
