#pragma once

// Change scoring across two periods and evaluation against graded/binary gold.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "framechange/collect.hpp"
#include "framechange/divergence.hpp"
#include "framechange/error.hpp"
#include "framechange/text.hpp"

namespace framechange {

enum class ChangeLabel { unchanged, changed };

inline std::string_view to_string(ChangeLabel l) noexcept {
  return l == ChangeLabel::changed ? "CHANGED" : "UNCHANGED";
}

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr double kDefaultGroupFraction = 1.0 / 3.0;

/// Inclusive: a score equal to the threshold is a change.
inline ChangeLabel classify(double jsd_value, double threshold) noexcept {
  return jsd_value >= threshold ? ChangeLabel::changed : ChangeLabel::unchanged;
}

struct ChangeScore {
  TargetWord target;
  double jsd = 0.0;
  ChangeLabel label = ChangeLabel::unchanged;

  bool operator==(const ChangeScore &) const = default;
};

/// Profiles keyed by target surface form.
using ProfileMap = std::map<std::string, FrameProfile>;

namespace detail {

template <typename A, typename B>
std::vector<std::string> key_difference(const std::map<std::string, A> &a,
                                        const std::map<std::string, B> &b) {
  std::vector<std::string> diff;
  auto ai = a.begin();
  auto bi = b.begin();
  while (ai != a.end() || bi != b.end()) {
    if (bi == b.end() || (ai != a.end() && ai->first < bi->first)) {
      diff.push_back(ai->first);
      ++ai;
    } else if (ai == a.end() || bi->first < ai->first) {
      diff.push_back(bi->first);
      ++bi;
    } else {
      ++ai;
      ++bi;
    }
  }
  return diff;
}

template <typename A, typename B>
void require_same_keys(const std::map<std::string, A> &a,
                       const std::map<std::string, B> &b) {
  if (auto diff = key_difference(a, b); !diff.empty())
    throw KeyMismatch(std::move(diff));
}

} // namespace detail

inline ChangeScore score_target(const FrameProfile &c1, const FrameProfile &c2,
                                double threshold) {
  const double value = jsd(normalize(c1), normalize(c2));
  return {c1.target, value, classify(value, threshold)};
}

/// One score per target, in target order.
inline std::vector<ChangeScore> score_targets(const ProfileMap &c1,
                                              const ProfileMap &c2,
                                              double threshold) {
  if (auto diff = detail::key_difference(c1, c2); !diff.empty())
    throw MissingTarget(diff.front());
  std::vector<ChangeScore> out;
  out.reserve(c1.size());
  for (const auto &[name, p1] : c1)
    out.push_back(score_target(p1, c2.at(name), threshold));
  return out;
}

// ---------------------------------------------------------------------------
// Rank statistics

/// 1-based ranks, ties receive the average of the positions they span.
inline std::vector<double> average_ranks(const std::vector<double> &values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return values[l] < values[r];
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw DegenerateInput("pearson: need two equal-length series of size >= 2");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DegenerateInput("correlation undefined: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rho with average ranks for ties.
inline double spearman(const std::map<std::string, double> &pred,
                       const std::map<std::string, double> &gold) {
  detail::require_same_keys(pred, gold);
  if (pred.size() < 2)
    throw DegenerateInput("spearman: need at least 2 targets");
  std::vector<double> x, y;
  x.reserve(pred.size());
  y.reserve(pred.size());
  for (const auto &[k, v] : pred) {
    x.push_back(v);
    y.push_back(gold.at(k));
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

inline double accuracy(const std::map<std::string, int> &pred,
                       const std::map<std::string, int> &gold) {
  detail::require_same_keys(pred, gold);
  if (pred.empty()) throw DegenerateInput("accuracy: no targets");
  std::size_t hits = 0;
  for (const auto &[k, v] : pred)
    if (gold.at(k) == v) ++hits;
  return double(hits) / double(pred.size());
}

// ---------------------------------------------------------------------------
// Quantile grouping

enum class Group { TP, TN, FP, FN, MID };

inline std::string_view to_string(Group g) noexcept {
  switch (g) {
  case Group::TP: return "TP";
  case Group::TN: return "TN";
  case Group::FP: return "FP";
  case Group::FN: return "FN";
  case Group::MID: return "MID";
  }
  return "MID";
}

using GroupAssignment = std::map<std::string, Group>;

/// k = floor(n * fraction). The small epsilon keeps 9 * (1/3) at 3 despite
/// 1/3 not being representable.
inline std::size_t group_size(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(double(n) * fraction + 1e-9));
}

/// Targets ordered by descending score, ascending name on ties.
inline std::vector<std::string>
rank_descending(const std::map<std::string, double> &scores) {
  std::vector<std::pair<std::string, double>> v(scores.begin(), scores.end());
  std::stable_sort(v.begin(), v.end(), [](const auto &l, const auto &r) {
    if (l.second != r.second) return l.second > r.second;
    return l.first < r.first;
  });
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto &p : v) out.push_back(std::move(p.first));
  return out;
}

inline GroupAssignment group_targets(const std::map<std::string, double> &pred,
                                     const std::map<std::string, double> &gold,
                                     double fraction = kDefaultGroupFraction) {
  if (!(fraction > 0.0 && fraction <= 0.5)) throw FractionOutOfRange(fraction);
  detail::require_same_keys(pred, gold);
  const std::size_t n = pred.size();
  if (n < 3) throw DegenerateInput("group_targets: need at least 3 targets");
  const std::size_t k = group_size(n, fraction);

  const auto pred_rank = rank_descending(pred);
  const auto gold_rank = rank_descending(gold);
  std::set<std::string> pred_top(pred_rank.begin(), pred_rank.begin() + k);
  std::set<std::string> pred_bot(pred_rank.end() - k, pred_rank.end());
  std::set<std::string> gold_top(gold_rank.begin(), gold_rank.begin() + k);
  std::set<std::string> gold_bot(gold_rank.end() - k, gold_rank.end());

  GroupAssignment out;
  for (const auto &[t, _] : pred) {
    const bool pt = pred_top.count(t), pb = pred_bot.count(t);
    const bool gt = gold_top.count(t), gb = gold_bot.count(t);
    Group g = Group::MID;
    if (gt && pt) g = Group::TP;
    else if (gb && pb) g = Group::TN;
    else if (gb && pt) g = Group::FP;
    else if (gt && pb) g = Group::FN;
    out.emplace(t, g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw vs lemma sanity check

inline double compare_raw_lemma(const FrameProfile &profile_raw,
                                const FrameProfile &profile_lemma) {
  if (profile_raw.target != profile_lemma.target ||
      profile_raw.period_id != profile_lemma.period_id)
    throw Error("compare_raw_lemma: profiles differ in target or period (" +
                profile_raw.target.surface() + "/" + profile_raw.period_id +
                " vs " + profile_lemma.target.surface() + "/" +
                profile_lemma.period_id + ")");
  return jsd(normalize(profile_raw), normalize(profile_lemma));
}

// ---------------------------------------------------------------------------
// Gold data and evaluation

struct GoldData {
  std::map<std::string, int> binary;
  std::map<std::string, double> graded;
};

namespace detail {

/// Reads `target<TAB>value` lines; blank lines skipped.
inline std::vector<std::pair<std::string, std::string>>
read_tab_pairs(const std::filesystem::path &path) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto lines = split_lines(read_text_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim_ws(lines[i]);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw SchemaError(i + 1, "expected 'target<TAB>value' in '" +
                                   path.string() + "'");
    out.emplace_back(std::string(trim_ws(line.substr(0, tab))),
                     std::string(trim_ws(line.substr(tab + 1))));
  }
  return out;
}

} // namespace detail

inline std::map<std::string, int>
read_gold_binary(const std::filesystem::path &path) {
  std::map<std::string, int> out;
  std::size_t line = 0;
  for (auto &[t, v] : detail::read_tab_pairs(path)) {
    ++line;
    if (v != "0" && v != "1")
      throw SchemaError(line, "binary label for '" + t + "' must be 0 or 1");
    if (!out.emplace(t, v == "1" ? 1 : 0).second)
      throw SchemaError(line, "duplicate target '" + t + "'");
  }
  return out;
}

inline std::map<std::string, double>
read_gold_graded(const std::filesystem::path &path) {
  std::map<std::string, double> out;
  std::size_t line = 0;
  for (auto &[t, v] : detail::read_tab_pairs(path)) {
    ++line;
    double x = 0.0;
    if (!parse_double(v, x) || !std::isfinite(x))
      throw SchemaError(line, "graded score for '" + t + "' is not a number");
    if (!out.emplace(t, x).second)
      throw SchemaError(line, "duplicate target '" + t + "'");
  }
  return out;
}

inline GoldData load_gold(const std::filesystem::path &binary_path,
                          const std::filesystem::path &graded_path) {
  GoldData gold{read_gold_binary(binary_path), read_gold_graded(graded_path)};
  detail::require_same_keys(gold.binary, gold.graded);
  return gold;
}

struct TargetEvaluation {
  std::string target;
  double jsd = 0.0;
  ChangeLabel label = ChangeLabel::unchanged;
  int gold_binary = 0;
  double gold_graded = 0.0;
  Group group = Group::MID;
};

struct EvaluationReport {
  double spearman_rho = 0.0;
  double accuracy = 0.0;
  GroupAssignment groups;
  std::vector<TargetEvaluation> per_target;
};

inline EvaluationReport evaluate(const std::vector<ChangeScore> &scores,
                                 const GoldData &gold,
                                 double group_fraction = kDefaultGroupFraction) {
  std::map<std::string, double> pred_graded;
  std::map<std::string, int> pred_binary;
  std::map<std::string, const ChangeScore *> by_name;
  for (const auto &s : scores) {
    if (!by_name.emplace(s.target.surface(), &s).second)
      throw Error("evaluate: duplicate score for '" + s.target.surface() + "'");
    pred_graded.emplace(s.target.surface(), s.jsd);
    pred_binary.emplace(s.target.surface(),
                        s.label == ChangeLabel::changed ? 1 : 0);
  }
  detail::require_same_keys(pred_graded, gold.graded);
  detail::require_same_keys(pred_binary, gold.binary);

  EvaluationReport report;
  report.spearman_rho = spearman(pred_graded, gold.graded);
  report.accuracy = accuracy(pred_binary, gold.binary);
  report.groups = group_targets(pred_graded, gold.graded, group_fraction);
  for (const auto &[name, s] : by_name)
    report.per_target.push_back({name, s->jsd, s->label, gold.binary.at(name),
                                 gold.graded.at(name), report.groups.at(name)});
  return report;
}

} // namespace framechange
