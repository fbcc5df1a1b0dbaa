#pragma once

// Frame collection: turns a target's parsed subcorpus into frame counts.
//
// A frame instance qualifies when the target evokes it (trigger) or fills one
// of its elements. FTFE accepts either; FE accepts element hits only. Each
// qualifying instance adds exactly one to its frame's count, however many
// times the target occurs inside it, and every qualifying instance in a
// sentence counts separately.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "framechange/corpus.hpp"
#include "framechange/parses.hpp"
#include "framechange/text.hpp"

namespace framechange {

enum class CollectionMode { fe, ftfe };
enum class ElementMatch { token, substring };
enum class MatchForm { surface, bare };

inline std::string_view to_string(CollectionMode m) noexcept {
  return m == CollectionMode::fe ? "fe" : "ftfe";
}
inline std::string_view to_string(ElementMatch m) noexcept {
  return m == ElementMatch::token ? "token" : "substring";
}
inline std::string_view to_string(MatchForm m) noexcept {
  return m == MatchForm::surface ? "surface" : "bare";
}

inline std::optional<CollectionMode> mode_from_string(std::string_view s) {
  if (s == "fe" || s == "FE") return CollectionMode::fe;
  if (s == "ftfe" || s == "FTFE") return CollectionMode::ftfe;
  return std::nullopt;
}
inline std::optional<ElementMatch> element_match_from_string(std::string_view s) {
  if (s == "token") return ElementMatch::token;
  if (s == "substring") return ElementMatch::substring;
  return std::nullopt;
}
inline std::optional<MatchForm> match_form_from_string(std::string_view s) {
  if (s == "surface") return MatchForm::surface;
  if (s == "bare") return MatchForm::bare;
  return std::nullopt;
}

struct MatchOptions {
  ElementMatch element_match = ElementMatch::token;
  MatchForm match_form = MatchForm::surface;
};

struct FrameProfile {
  TargetWord target;
  std::string period_id;
  CollectionMode mode = CollectionMode::ftfe;
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;

  bool operator==(const FrameProfile &) const = default;
};

/// The string searched for in triggers and elements.
inline const std::string &match_key(const TargetWord &target,
                                    const MatchOptions &opts = {}) {
  return opts.match_form == MatchForm::surface ? target.surface()
                                               : target.lemma();
}

inline bool trigger_has_form(std::string_view trigger, std::string_view form) {
  return !form.empty() && (trigger == form || has_ws_token(trigger, form));
}

inline bool element_has_form(std::string_view text, std::string_view form,
                             ElementMatch how) {
  if (form.empty()) return false;
  if (how == ElementMatch::substring)
    return text.find(form) != std::string_view::npos;
  return has_ws_token(text, form);
}

inline bool is_trigger_match(const TargetWord &target,
                             std::string_view trigger_text,
                             const MatchOptions &opts = {}) {
  return trigger_has_form(trigger_text, match_key(target, opts));
}

inline bool is_element_match(const TargetWord &target,
                             const FrameElementAnnotation &element,
                             const MatchOptions &opts = {}) {
  return element_has_form(element.text, match_key(target, opts),
                          opts.element_match);
}

/// Whether one frame instance qualifies under `mode`, given the forms that
/// stand for the target in this sentence.
inline bool instance_qualifies(const FrameInstance &fi,
                               std::span<const std::string> forms,
                               CollectionMode mode, ElementMatch how) {
  auto any_form = [&](auto &&pred) {
    return std::any_of(forms.begin(), forms.end(), pred);
  };
  if (mode == CollectionMode::ftfe &&
      any_form([&](const std::string &f) {
        return trigger_has_form(fi.trigger_text, f);
      }))
    return true;
  return std::any_of(fi.elements.begin(), fi.elements.end(),
                     [&](const FrameElementAnnotation &e) {
                       return any_form([&](const std::string &f) {
                         return element_has_form(e.text, f, how);
                       });
                     });
}

/// General form of collect_frames. `forms_of(parse)` yields the strings that
/// represent the target in that sentence; used when the target's spelling
/// varies per sentence, e.g. on the raw side of the corpus.
template <typename FormsOf>
FrameProfile collect_frames_with(const std::vector<SentenceParse> &parses,
                                 const TargetWord &target,
                                 std::string period_id, CollectionMode mode,
                                 ElementMatch how, FormsOf &&forms_of) {
  FrameProfile profile;
  profile.target = target;
  profile.period_id = std::move(period_id);
  profile.mode = mode;
  for (const auto &sentence : parses) {
    if (sentence.provenance == Provenance::skipped) continue;
    const auto &forms = forms_of(sentence);
    const std::span<const std::string> view(forms.data(), forms.size());
    for (const auto &fi : sentence.frames) {
      if (instance_qualifies(fi, view, mode, how)) {
        ++profile.counts[fi.frame];
        ++profile.total;
      }
    }
  }
  return profile;
}

inline FrameProfile collect_frames(const std::vector<SentenceParse> &parses,
                                   const TargetWord &target,
                                   CollectionMode mode,
                                   const MatchOptions &opts = {},
                                   std::string period_id = {}) {
  const std::vector<std::string> forms{match_key(target, opts)};
  return collect_frames_with(
      parses, target, std::move(period_id), mode, opts.element_match,
      [&](const SentenceParse &) -> const std::vector<std::string> & {
        return forms;
      });
}

} // namespace framechange
