#pragma once

// On-disk representations: profile JSON, scores.tsv, decomposition reports
// and evaluation reports. All writers are deterministic byte-for-byte.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "framechange/change.hpp"
#include "framechange/collect.hpp"
#include "framechange/divergence.hpp"
#include "framechange/error.hpp"
#include "framechange/text.hpp"

namespace framechange {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Profiles

inline std::string profile_to_json(const FrameProfile &p) {
  ojson obj;
  obj["target"] = p.target.surface();
  obj["period"] = p.period_id;
  obj["mode"] = std::string(to_string(p.mode));
  obj["total"] = p.total;
  obj["counts"] = ojson::object();
  for (const auto &[frame, count] : p.counts) obj["counts"][frame] = count;
  return obj.dump(2) + "\n";
}

inline FrameProfile profile_from_json(std::string_view text,
                                      const std::string &source = "<profile>") {
  ojson obj;
  try {
    obj = ojson::parse(text);
  } catch (const ojson::parse_error &e) {
    throw SchemaError(1, source + ": invalid JSON: " + e.what());
  }
  auto fail = [&](const std::string &why) { throw SchemaError(1, source + ": " + why); };
  if (!obj.is_object()) fail("not an object");
  for (const char *key : {"target", "period", "mode"})
    if (!obj.contains(key) || !obj[key].is_string())
      fail(std::string("missing string field '") + key + "'");
  if (!obj.contains("counts") || !obj["counts"].is_object())
    fail("missing object field 'counts'");

  FrameProfile p;
  p.target = TargetWord(obj["target"].get<std::string>());
  p.period_id = obj["period"].get<std::string>();
  auto mode = mode_from_string(obj["mode"].get<std::string>());
  if (!mode) fail("unknown mode");
  p.mode = *mode;
  for (const auto &[frame, count] : obj["counts"].items()) {
    if (!count.is_number_unsigned() || count.get<std::int64_t>() < 1)
      fail("count for '" + frame + "' must be an integer >= 1");
    p.counts[frame] = count.get<std::int64_t>();
    p.total += count.get<std::int64_t>();
  }
  if (obj.contains("total") &&
      (!obj["total"].is_number_integer() || obj["total"].get<std::int64_t>() != p.total))
    fail("'total' does not equal the sum of counts");
  return p;
}

inline FrameProfile read_profile(const std::filesystem::path &path) {
  return profile_from_json(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Scores

/// Descending jsd, ascending target on ties.
inline std::vector<ChangeScore> sorted_for_report(std::vector<ChangeScore> scores) {
  std::stable_sort(scores.begin(), scores.end(),
                   [](const ChangeScore &l, const ChangeScore &r) {
                     if (l.jsd != r.jsd) return l.jsd > r.jsd;
                     return l.target < r.target;
                   });
  return scores;
}

inline std::string scores_to_tsv(const std::vector<ChangeScore> &scores) {
  std::string out;
  for (const auto &s : sorted_for_report(scores)) {
    out += s.target.surface();
    out += '\t';
    out += format_double(s.jsd);
    out += '\t';
    out += to_string(s.label);
    out += '\n';
  }
  return out;
}

inline std::vector<ChangeScore> scores_from_tsv(std::string_view text) {
  std::vector<ChangeScore> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> cols;
    std::string_view rest = lines[i];
    for (;;) {
      auto tab = rest.find('\t');
      cols.emplace_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (cols.size() != 3) throw SchemaError(i + 1, "scores.tsv: expected 3 columns");
    ChangeScore s;
    s.target = TargetWord(cols[0]);
    if (!parse_double(cols[1], s.jsd)) throw SchemaError(i + 1, "scores.tsv: bad jsd");
    if (cols[2] == "CHANGED") s.label = ChangeLabel::changed;
    else if (cols[2] == "UNCHANGED") s.label = ChangeLabel::unchanged;
    else throw SchemaError(i + 1, "scores.tsv: bad label '" + cols[2] + "'");
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<ChangeScore> read_scores(const std::filesystem::path &path) {
  return scores_from_tsv(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Decomposition reports

struct DecompositionRow {
  std::string frame;
  double contribution = 0.0;
  double delta = 0.0;
  std::int64_t count_c1 = 0;
  std::int64_t count_c2 = 0;
  double relfreq_c1 = 0.0;
  double relfreq_c2 = 0.0;
};

struct DecompositionReport {
  std::string target;
  double total = 0.0;
  /// Contribution descending, frame name ascending on ties.
  std::vector<DecompositionRow> rows;
};

inline DecompositionReport build_decomposition_report(const FrameProfile &c1,
                                                      const FrameProfile &c2) {
  const auto p = normalize(c1);
  const auto q = normalize(c2);
  const auto d = decompose(p, q);

  DecompositionReport r;
  r.target = c1.target.surface();
  r.total = d.total;
  for (const auto &[frame, item] : d.items) {
    DecompositionRow row;
    row.frame = frame;
    row.contribution = item.contribution;
    row.delta = item.delta;
    if (auto it = c1.counts.find(frame); it != c1.counts.end()) row.count_c1 = it->second;
    if (auto it = c2.counts.find(frame); it != c2.counts.end()) row.count_c2 = it->second;
    row.relfreq_c1 = p[frame];
    row.relfreq_c2 = q[frame];
    r.rows.push_back(std::move(row));
  }
  std::stable_sort(r.rows.begin(), r.rows.end(),
                   [](const DecompositionRow &a, const DecompositionRow &b) {
                     if (a.contribution != b.contribution)
                       return a.contribution > b.contribution;
                     return a.frame < b.frame;
                   });
  return r;
}

inline std::string decomposition_to_tsv(const DecompositionReport &r) {
  std::string out =
      "frame\tcontribution\tdelta\tcount_c1\tcount_c2\trelfreq_c1\trelfreq_c2\n";
  for (const auto &row : r.rows) {
    out += row.frame + '\t' + format_double(row.contribution) + '\t' +
           format_double(row.delta) + '\t' + std::to_string(row.count_c1) + '\t' +
           std::to_string(row.count_c2) + '\t' + format_double(row.relfreq_c1) +
           '\t' + format_double(row.relfreq_c2) + '\n';
  }
  return out;
}

inline std::string decomposition_to_json(const DecompositionReport &r) {
  ojson obj;
  obj["target"] = r.target;
  obj["jsd"] = r.total;
  obj["rows"] = ojson::array();
  for (const auto &row : r.rows) {
    ojson o;
    o["frame"] = row.frame;
    o["contribution"] = row.contribution;
    o["delta"] = row.delta;
    o["count_c1"] = row.count_c1;
    o["count_c2"] = row.count_c2;
    o["relfreq_c1"] = row.relfreq_c1;
    o["relfreq_c2"] = row.relfreq_c2;
    obj["rows"].push_back(std::move(o));
  }
  return obj.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Evaluation reports

inline std::string evaluation_to_json(const EvaluationReport &r) {
  ojson obj;
  obj["spearman_rho"] = r.spearman_rho;
  obj["accuracy"] = r.accuracy;
  ojson groups = ojson::object();
  for (Group g : {Group::TP, Group::TN, Group::FP, Group::FN, Group::MID}) {
    ojson members = ojson::array();
    for (const auto &[t, tg] : r.groups)
      if (tg == g) members.push_back(t);
    groups[std::string(to_string(g))] = std::move(members);
  }
  obj["groups"] = std::move(groups);
  obj["per_target"] = ojson::array();
  for (const auto &t : r.per_target) {
    ojson o;
    o["target"] = t.target;
    o["jsd"] = t.jsd;
    o["label"] = std::string(to_string(t.label));
    o["gold_binary"] = t.gold_binary;
    o["gold_graded"] = t.gold_graded;
    o["group"] = std::string(to_string(t.group));
    obj["per_target"].push_back(std::move(o));
  }
  return obj.dump(2) + "\n";
}

inline std::string evaluation_to_table(const EvaluationReport &r) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "Spearman rho: %.3f\nAccuracy:     %.3f\n\n",
                r.spearman_rho, r.accuracy);
  os << buf;
  std::size_t width = 6;
  for (const auto &t : r.per_target) width = std::max(width, t.target.size());
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %-9s  %4s  %8s  %s\n", int(width),
                "target", "jsd", "label", "gold", "graded", "group");
  os << buf;
  for (const auto &t : r.per_target) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.6f  %-9s  %4d  %8.4f  %s\n",
                  int(width), t.target.c_str(), t.jsd,
                  std::string(to_string(t.label)).c_str(), t.gold_binary,
                  t.gold_graded, std::string(to_string(t.group)).c_str());
    os << buf;
  }
  return os.str();
}

} // namespace framechange
