#pragma once

// JSONL interchange format between an external frame parser and the core.
// One object per line:
//   {"sentence_index":0,"text":"...","provenance":"base|small|skipped",
//    "frames":[{"frame":"...","trigger_text":"...",
//               "elements":[{"role":"...","text":"..."}]}]}

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "framechange/error.hpp"
#include "framechange/text.hpp"

namespace framechange {

struct FrameElementAnnotation {
  std::string role;
  std::string text;

  bool operator==(const FrameElementAnnotation &) const = default;
};

struct FrameInstance {
  std::string frame;
  std::string trigger_text;
  std::vector<FrameElementAnnotation> elements;

  bool operator==(const FrameInstance &) const = default;
};

enum class Provenance { base, small, skipped };

inline std::string_view to_string(Provenance p) noexcept {
  switch (p) {
  case Provenance::base: return "base";
  case Provenance::small: return "small";
  case Provenance::skipped: return "skipped";
  }
  return "base";
}

inline std::optional<Provenance> provenance_from_string(std::string_view s) {
  if (s == "base") return Provenance::base;
  if (s == "small") return Provenance::small;
  if (s == "skipped") return Provenance::skipped;
  return std::nullopt;
}

struct SentenceParse {
  std::size_t sentence_index = 0;
  std::string text;
  std::vector<FrameInstance> frames;
  Provenance provenance = Provenance::base;

  bool operator==(const SentenceParse &) const = default;
};

struct ParseStats {
  std::size_t total_sentences = 0;
  std::size_t fallback_count = 0;
  std::size_t skipped_count = 0;

  /// Sentences on which the primary parser failed, whether or not the
  /// fallback then succeeded.
  std::size_t fallback_triggered() const noexcept {
    return fallback_count + skipped_count;
  }

  double fallback_rate() const noexcept {
    return total_sentences ? double(fallback_count) / double(total_sentences)
                           : 0.0;
  }
  double skipped_rate() const noexcept {
    return total_sentences ? double(skipped_count) / double(total_sentences)
                           : 0.0;
  }

  ParseStats &operator+=(const ParseStats &o) noexcept {
    total_sentences += o.total_sentences;
    fallback_count += o.fallback_count;
    skipped_count += o.skipped_count;
    return *this;
  }

  bool operator==(const ParseStats &) const = default;
};

namespace detail {

using json = nlohmann::json;

inline const json &require(const json &obj, const char *key,
                           std::size_t line_no, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(line_no, "missing field '" + where + key + "'");
  return *it;
}

inline std::string require_string(const json &obj, const char *key,
                                  std::size_t line_no, const std::string &where,
                                  bool non_empty) {
  const auto &v = require(obj, key, line_no, where);
  if (!v.is_string())
    throw SchemaError(line_no, "field '" + where + key + "' must be a string");
  auto s = v.get<std::string>();
  if (non_empty && s.empty())
    throw SchemaError(line_no, "field '" + where + key + "' must be non-empty");
  return s;
}

inline const json &require_array(const json &obj, const char *key,
                                 std::size_t line_no,
                                 const std::string &where) {
  const auto &v = require(obj, key, line_no, where);
  if (!v.is_array())
    throw SchemaError(line_no, "field '" + where + key + "' must be an array");
  return v;
}

} // namespace detail

/// Parses a single JSONL record. `line_no` is 1-based and only used for
/// error reporting. Unknown fields are ignored.
inline SentenceParse parse_record(std::string_view line, std::size_t line_no) {
  using detail::json;
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error &e) {
    throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw SchemaError(line_no, "record is not an object");

  SentenceParse p;
  const auto &idx = detail::require(obj, "sentence_index", line_no, "");
  if (!idx.is_number_unsigned())
    throw SchemaError(line_no, "'sentence_index' must be an integer >= 0");
  p.sentence_index = idx.get<std::size_t>();
  p.text = detail::require_string(obj, "text", line_no, "", false);

  const auto prov =
      detail::require_string(obj, "provenance", line_no, "", false);
  auto parsed = provenance_from_string(prov);
  if (!parsed)
    throw SchemaError(line_no, "'provenance' must be one of base|small|skipped, "
                               "got '" + prov + "'");
  p.provenance = *parsed;

  const auto &frames = detail::require_array(obj, "frames", line_no, "");
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto &fo = frames[f];
    const std::string where = "frames[" + std::to_string(f) + "].";
    if (!fo.is_object())
      throw SchemaError(line_no, "'frames[" + std::to_string(f) +
                                     "]' must be an object");
    FrameInstance fi;
    fi.frame = detail::require_string(fo, "frame", line_no, where, true);
    fi.trigger_text =
        detail::require_string(fo, "trigger_text", line_no, where, false);
    const auto &elems = detail::require_array(fo, "elements", line_no, where);
    for (std::size_t e = 0; e < elems.size(); ++e) {
      const auto &eo = elems[e];
      const std::string ewhere = where + "elements[" + std::to_string(e) + "].";
      if (!eo.is_object())
        throw SchemaError(line_no, "'" + where + "elements[" +
                                       std::to_string(e) +
                                       "]' must be an object");
      FrameElementAnnotation fe;
      fe.role = detail::require_string(eo, "role", line_no, ewhere, true);
      fe.text = detail::require_string(eo, "text", line_no, ewhere, true);
      fi.elements.push_back(std::move(fe));
    }
    p.frames.push_back(std::move(fi));
  }

  if (p.provenance == Provenance::skipped && !p.frames.empty())
    throw SchemaError(line_no, "provenance 'skipped' requires empty 'frames'");
  return p;
}

inline std::vector<SentenceParse> parse_jsonl(std::string_view data) {
  std::vector<SentenceParse> out;
  const auto lines = split_lines(data);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim_ws(lines[i]).empty())
      throw SchemaError(i + 1, "blank line");
    out.push_back(parse_record(lines[i], i + 1));
  }
  return out;
}

inline std::vector<SentenceParse>
read_parses(const std::filesystem::path &path) {
  return parse_jsonl(read_text_file(path));
}

inline std::string to_jsonl_line(const SentenceParse &p) {
  using ojson = nlohmann::ordered_json;
  ojson obj;
  obj["sentence_index"] = p.sentence_index;
  obj["text"] = p.text;
  obj["provenance"] = std::string(to_string(p.provenance));
  obj["frames"] = ojson::array();
  for (const auto &f : p.frames) {
    ojson fo;
    fo["frame"] = f.frame;
    fo["trigger_text"] = f.trigger_text;
    fo["elements"] = ojson::array();
    for (const auto &e : f.elements)
      fo["elements"].push_back(ojson{{"role", e.role}, {"text", e.text}});
    obj["frames"].push_back(std::move(fo));
  }
  return obj.dump();
}

inline std::string to_jsonl(const std::vector<SentenceParse> &parses) {
  std::string out;
  for (const auto &p : parses) {
    out += to_jsonl_line(p);
    out += '\n';
  }
  return out;
}

inline void write_parses(const std::vector<SentenceParse> &parses,
                         const std::filesystem::path &path) {
  write_text_file(path, to_jsonl(parses));
}

inline ParseStats parse_stats(const std::vector<SentenceParse> &parses) {
  ParseStats s;
  s.total_sentences = parses.size();
  for (const auto &p : parses) {
    if (p.provenance == Provenance::small) ++s.fallback_count;
    else if (p.provenance == Provenance::skipped) ++s.skipped_count;
  }
  return s;
}

} // namespace framechange
