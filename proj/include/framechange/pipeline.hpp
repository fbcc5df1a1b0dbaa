#pragma once

// End-to-end orchestration behind the CLI subcommands.
//
// Directory layout (all paths relative to the configured output directory
// unless noted):
//
//   subcorpora/<target>/<period>.lemma.txt   line-aligned target subcorpora
//   subcorpora/<target>/<period>.raw.txt
//   subcorpora/manifest.tsv                  target, period, sentence count
//   <parses_dir>/<target>/<period>.jsonl     lemma-side parses (input)
//   <parses_dir>/<target>/<period>.raw.jsonl raw-side parses (input, optional)
//   <mode>/profiles/<target>.<period>.json
//   <mode>/profile_failures.tsv
//   <mode>/scores.tsv
//   <mode>/decomposition/<target>.{tsv,json}
//   <mode>/score_failures.tsv
//   <mode>/evaluation.{json,txt}
//   <mode>/raw_vs_lemma.tsv
//   stats.tsv
//
// Per-target failures never abort a batch; they are collected and written in
// target order. Workers only compute; every file is written by the calling
// thread after the merge, so output bytes do not depend on scheduling.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "framechange/change.hpp"
#include "framechange/collect.hpp"
#include "framechange/corpus.hpp"
#include "framechange/divergence.hpp"
#include "framechange/error.hpp"
#include "framechange/parses.hpp"
#include "framechange/report.hpp"
#include "framechange/text.hpp"

namespace framechange {

namespace fs = std::filesystem;

inline constexpr std::array<const char *, 2> kPeriods{"C1", "C2"};

struct CorpusPaths {
  fs::path lemma;
  fs::path raw;
};

struct PipelineConfig {
  CorpusPaths c1;
  CorpusPaths c2;
  fs::path targets;
  fs::path parses_dir;
  fs::path out_dir;
  fs::path gold_binary;
  fs::path gold_graded;
  CollectionMode mode = CollectionMode::ftfe;
  double threshold = kDefaultThreshold;
  MatchOptions match;
  double group_fraction = kDefaultGroupFraction;
  unsigned jobs = 1;

  const CorpusPaths &corpus(std::string_view period) const {
    return period == "C1" ? c1 : c2;
  }

  fs::path mode_dir() const { return out_dir / std::string(to_string(mode)); }

  /// Checks the scalar invariants and that each named path is set.
  void validate(std::initializer_list<std::pair<const char *, const fs::path *>>
                    required) const {
    if (!(threshold >= 0.0 && threshold <= 1.0))
      throw ConfigError("threshold must be in [0,1]");
    if (!(group_fraction > 0.0 && group_fraction <= 0.5))
      throw FractionOutOfRange(group_fraction);
    if (jobs == 0) throw ConfigError("jobs must be >= 1");
    if (out_dir.empty()) throw ConfigError("output directory is not set");
    for (const auto &[name, path] : required)
      if (path->empty()) throw ConfigError(std::string(name) + " is not set");
  }
};

/// Reads a JSON config document. Relative paths resolve against the
/// directory holding the config file.
inline PipelineConfig load_config(const fs::path &path) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error &e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto as_path = [&](const json &v, const std::string &key) -> fs::path {
    if (!v.is_string()) throw ConfigError("config '" + key + "' must be a string");
    fs::path p = v.get<std::string>();
    return p.is_relative() ? base / p : p;
  };
  auto as_string = [&](const json &v, const std::string &key) {
    if (!v.is_string()) throw ConfigError("config '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto as_number = [&](const json &v, const std::string &key) {
    if (!v.is_number()) throw ConfigError("config '" + key + "' must be a number");
    return v.get<double>();
  };

  PipelineConfig cfg;
  if (doc.contains("corpora")) {
    const auto &c = doc["corpora"];
    for (const char *period : kPeriods) {
      if (!c.contains(period)) continue;
      auto &dst = std::string_view(period) == "C1" ? cfg.c1 : cfg.c2;
      const auto &e = c[period];
      if (e.contains("lemma")) dst.lemma = as_path(e["lemma"], "corpora.lemma");
      if (e.contains("raw")) dst.raw = as_path(e["raw"], "corpora.raw");
    }
  }
  if (doc.contains("targets")) cfg.targets = as_path(doc["targets"], "targets");
  if (doc.contains("parses_dir")) cfg.parses_dir = as_path(doc["parses_dir"], "parses_dir");
  if (doc.contains("out")) cfg.out_dir = as_path(doc["out"], "out");
  if (doc.contains("gold")) {
    const auto &g = doc["gold"];
    if (g.contains("binary")) cfg.gold_binary = as_path(g["binary"], "gold.binary");
    if (g.contains("graded")) cfg.gold_graded = as_path(g["graded"], "gold.graded");
  }
  if (doc.contains("mode")) {
    auto m = mode_from_string(as_string(doc["mode"], "mode"));
    if (!m) throw ConfigError("config 'mode' must be fe or ftfe");
    cfg.mode = *m;
  }
  if (doc.contains("element_match")) {
    auto m = element_match_from_string(as_string(doc["element_match"], "element_match"));
    if (!m) throw ConfigError("config 'element_match' must be token or substring");
    cfg.match.element_match = *m;
  }
  if (doc.contains("match_form")) {
    auto m = match_form_from_string(as_string(doc["match_form"], "match_form"));
    if (!m) throw ConfigError("config 'match_form' must be surface or bare");
    cfg.match.match_form = *m;
  }
  if (doc.contains("threshold")) cfg.threshold = as_number(doc["threshold"], "threshold");
  if (doc.contains("group_fraction"))
    cfg.group_fraction = as_number(doc["group_fraction"], "group_fraction");
  if (doc.contains("jobs")) {
    if (!doc["jobs"].is_number_unsigned()) throw ConfigError("config 'jobs' must be >= 1");
    cfg.jobs = doc["jobs"].get<unsigned>();
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Bounded worker pool

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results keep index
/// order. An exception thrown by fn(i) is stored in slot i.
template <typename R, typename Fn>
std::vector<std::pair<std::optional<R>, std::exception_ptr>>
parallel_map(std::size_t n, unsigned jobs, Fn &&fn) {
  std::vector<std::pair<std::optional<R>, std::exception_ptr>> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        results[i].first.emplace(fn(i));
      } catch (...) {
        results[i].second = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, jobs), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

/// Rethrows internal errors; returns the message of library errors.
inline std::string failure_message(const std::exception_ptr &ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error &e) {
    return e.what();
  }
}

struct Failure {
  std::string target;
  std::string period;
  std::string message;
};

struct CommandResult {
  std::vector<std::string> warnings;
  std::vector<Failure> failures;
};

inline std::string failures_to_tsv(const std::vector<Failure> &failures) {
  std::string out;
  for (const auto &f : failures) out += f.target + '\t' + f.period + '\t' + f.message + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Paths

inline fs::path subcorpus_path(const PipelineConfig &cfg, const TargetWord &t,
                               std::string_view period, std::string_view view) {
  return cfg.out_dir / "subcorpora" / t.surface() /
         (std::string(period) + "." + std::string(view) + ".txt");
}

inline fs::path parses_path(const PipelineConfig &cfg, const TargetWord &t,
                            std::string_view period, bool raw = false) {
  return cfg.parses_dir / t.surface() /
         (std::string(period) + (raw ? ".raw.jsonl" : ".jsonl"));
}

inline fs::path profile_path(const PipelineConfig &cfg, const TargetWord &t,
                             std::string_view period) {
  return cfg.mode_dir() / "profiles" /
         (t.surface() + "." + std::string(period) + ".json");
}

inline fs::path scores_path(const PipelineConfig &cfg) {
  return cfg.mode_dir() / "scores.tsv";
}

inline fs::path decomposition_path(const PipelineConfig &cfg, const TargetWord &t,
                                   std::string_view ext) {
  return cfg.mode_dir() / "decomposition" / (t.surface() + "." + std::string(ext));
}

// ---------------------------------------------------------------------------
// extract

inline CommandResult cmd_extract(const PipelineConfig &cfg) {
  cfg.validate({{"C1 lemma corpus", &cfg.c1.lemma},
                {"C1 raw corpus", &cfg.c1.raw},
                {"C2 lemma corpus", &cfg.c2.lemma},
                {"C2 raw corpus", &cfg.c2.raw},
                {"targets", &cfg.targets}});
  const auto targets = read_target_list(cfg.targets);
  std::vector<AlignedCorpus> corpora;
  for (const char *period : kPeriods)
    corpora.push_back(load_corpus_pair(cfg.corpus(period).lemma,
                                       cfg.corpus(period).raw, period));

  using Subcorpora = std::vector<std::vector<SentencePair>>;
  auto results = parallel_map<Subcorpora>(targets.size(), cfg.jobs, [&](std::size_t i) {
    Subcorpora per_period;
    for (const auto &corpus : corpora)
      per_period.push_back(extract_subcorpus(corpus, targets[i]));
    return per_period;
  });

  CommandResult res;
  std::string manifest = "target\tperiod\tsentences\n";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (results[i].second) std::rethrow_exception(results[i].second);
    const auto &per_period = *results[i].first;
    for (std::size_t p = 0; p < kPeriods.size(); ++p) {
      std::string lemma_text, raw_text;
      for (const auto &s : per_period[p]) {
        lemma_text += join_tokens(s.lemma_tokens) + '\n';
        raw_text += join_tokens(s.raw_tokens) + '\n';
      }
      write_text_file(subcorpus_path(cfg, targets[i], kPeriods[p], "lemma"), lemma_text);
      write_text_file(subcorpus_path(cfg, targets[i], kPeriods[p], "raw"), raw_text);
      manifest += targets[i].surface() + '\t' + kPeriods[p] + '\t' +
                  std::to_string(per_period[p].size()) + '\n';
      if (per_period[p].empty())
        res.warnings.push_back("target " + targets[i].surface() + " not found in " +
                               kPeriods[p]);
    }
  }
  write_text_file(cfg.out_dir / "subcorpora" / "manifest.tsv", manifest);
  return res;
}

// ---------------------------------------------------------------------------
// profile

/// In-memory profiling of one target/period from its lemma-side parses.
inline FrameProfile profile_target(const PipelineConfig &cfg, const TargetWord &t,
                                   std::string_view period) {
  return collect_frames(read_parses(parses_path(cfg, t, period)), t, cfg.mode,
                        cfg.match, std::string(period));
}

inline CommandResult cmd_profile(const PipelineConfig &cfg) {
  cfg.validate({{"targets", &cfg.targets}, {"parses directory", &cfg.parses_dir}});
  const auto targets = read_target_list(cfg.targets);
  const std::size_t n = targets.size() * kPeriods.size();
  auto results = parallel_map<FrameProfile>(n, cfg.jobs, [&](std::size_t i) {
    return profile_target(cfg, targets[i / kPeriods.size()], kPeriods[i % kPeriods.size()]);
  });

  CommandResult res;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &t = targets[i / kPeriods.size()];
    const char *period = kPeriods[i % kPeriods.size()];
    if (results[i].second) {
      res.failures.push_back({t.surface(), period, failure_message(results[i].second)});
      continue;
    }
    const auto &profile = *results[i].first;
    write_text_file(profile_path(cfg, t, period), profile_to_json(profile));
    if (profile.total == 0)
      res.failures.push_back(
          {t.surface(), period, EmptyProfile(t.surface(), period).what()});
  }
  write_text_file(cfg.mode_dir() / "profile_failures.tsv", failures_to_tsv(res.failures));
  return res;
}

// ---------------------------------------------------------------------------
// score

struct ScoredTarget {
  ChangeScore score;
  DecompositionReport report;
};

inline ScoredTarget score_profiles(const FrameProfile &c1, const FrameProfile &c2,
                                   double threshold) {
  auto report = build_decomposition_report(c1, c2);
  ChangeScore score{c1.target, report.total, classify(report.total, threshold)};
  return {std::move(score), std::move(report)};
}

inline CommandResult cmd_score(const PipelineConfig &cfg) {
  cfg.validate({{"targets", &cfg.targets}});
  const auto targets = read_target_list(cfg.targets);
  auto results = parallel_map<ScoredTarget>(targets.size(), cfg.jobs, [&](std::size_t i) {
    const auto &t = targets[i];
    return score_profiles(read_profile(profile_path(cfg, t, "C1")),
                          read_profile(profile_path(cfg, t, "C2")), cfg.threshold);
  });

  CommandResult res;
  std::vector<ChangeScore> scores;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto &t = targets[i];
    if (results[i].second) {
      res.failures.push_back({t.surface(), "-", failure_message(results[i].second)});
      continue;
    }
    const auto &st = *results[i].first;
    write_text_file(decomposition_path(cfg, t, "tsv"), decomposition_to_tsv(st.report));
    write_text_file(decomposition_path(cfg, t, "json"), decomposition_to_json(st.report));
    scores.push_back(st.score);
  }
  write_text_file(scores_path(cfg), scores_to_tsv(scores));
  write_text_file(cfg.mode_dir() / "score_failures.tsv", failures_to_tsv(res.failures));
  return res;
}

// ---------------------------------------------------------------------------
// evaluate

inline EvaluationReport cmd_evaluate(const PipelineConfig &cfg) {
  cfg.validate({{"gold binary file", &cfg.gold_binary},
                {"gold graded file", &cfg.gold_graded}});
  const auto scores = read_scores(scores_path(cfg));
  const auto gold = load_gold(cfg.gold_binary, cfg.gold_graded);
  auto report = evaluate(scores, gold, cfg.group_fraction);
  write_text_file(cfg.mode_dir() / "evaluation.json", evaluation_to_json(report));
  write_text_file(cfg.mode_dir() / "evaluation.txt", evaluation_to_table(report));
  return report;
}

// ---------------------------------------------------------------------------
// stats

struct StatsRow {
  std::string target;
  std::string period;
  std::string view;
  ParseStats stats;
};

struct StatsResult {
  std::vector<StatsRow> rows;
  ParseStats lemma_total;
  ParseStats raw_total;
  CommandResult result;
};

inline std::string stats_to_tsv(const StatsResult &s) {
  auto line = [](const std::string &a, const std::string &b, const std::string &c,
                 const ParseStats &st) {
    return a + '\t' + b + '\t' + c + '\t' + std::to_string(st.total_sentences) + '\t' +
           std::to_string(st.fallback_count) + '\t' + std::to_string(st.skipped_count) +
           '\t' + std::to_string(st.fallback_triggered()) + '\n';
  };
  std::string out = "target\tperiod\tview\ttotal\tsmall\tskipped\tfallback_triggered\n";
  for (const auto &r : s.rows) out += line(r.target, r.period, r.view, r.stats);
  out += line("ALL", "-", "lemma", s.lemma_total);
  out += line("ALL", "-", "raw", s.raw_total);
  return out;
}

/// Parse accounting over every `<target>/<period>[.raw].jsonl` below the
/// parses directory. Missing raw files are not an error.
inline StatsResult cmd_stats(const PipelineConfig &cfg) {
  cfg.validate({{"targets", &cfg.targets}, {"parses directory", &cfg.parses_dir}});
  const auto targets = read_target_list(cfg.targets);
  const std::size_t per_target = kPeriods.size() * 2;
  const std::size_t n = targets.size() * per_target;
  auto results = parallel_map<std::optional<ParseStats>>(n, cfg.jobs, [&](std::size_t i) {
    const auto &t = targets[i / per_target];
    const char *period = kPeriods[(i % per_target) / 2];
    const bool raw = (i % 2) == 1;
    const auto path = parses_path(cfg, t, period, raw);
    if (raw && !fs::exists(path)) return std::optional<ParseStats>{};
    return std::optional<ParseStats>{parse_stats(read_parses(path))};
  });

  StatsResult out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &t = targets[i / per_target];
    const char *period = kPeriods[(i % per_target) / 2];
    const bool raw = (i % 2) == 1;
    if (results[i].second) {
      out.result.failures.push_back(
          {t.surface(), period, failure_message(results[i].second)});
      continue;
    }
    if (!*results[i].first) continue;
    const auto &st = **results[i].first;
    out.rows.push_back({t.surface(), period, raw ? "raw" : "lemma", st});
    (raw ? out.raw_total : out.lemma_total) += st;
  }
  write_text_file(cfg.out_dir / "stats.tsv", stats_to_tsv(out));
  return out;
}

// ---------------------------------------------------------------------------
// compare-raw-lemma

/// Forms standing for the target in each raw subcorpus sentence: the raw
/// tokens at the positions where the aligned lemma sentence holds the target
/// (only when both sentences have the same token count), plus the bare lemma.
inline std::vector<std::vector<std::string>>
raw_target_forms(const std::vector<std::string> &lemma_lines,
                 const std::vector<std::string> &raw_lines, const TargetWord &t) {
  std::vector<std::vector<std::string>> forms(lemma_lines.size());
  for (std::size_t i = 0; i < lemma_lines.size(); ++i) {
    const auto lt = split_ws(lemma_lines[i]);
    const auto rt = i < raw_lines.size() ? split_ws(raw_lines[i]) : std::vector<std::string>{};
    auto &f = forms[i];
    if (lt.size() == rt.size())
      for (std::size_t j = 0; j < lt.size(); ++j)
        if (lt[j] == t.surface() && std::find(f.begin(), f.end(), rt[j]) == f.end())
          f.push_back(rt[j]);
    if (std::find(f.begin(), f.end(), t.lemma()) == f.end()) f.push_back(t.lemma());
  }
  return forms;
}

inline FrameProfile raw_profile(const PipelineConfig &cfg, const TargetWord &t,
                                std::string_view period) {
  const auto parses = read_parses(parses_path(cfg, t, period, true));
  std::vector<std::vector<std::string>> forms;
  const auto lemma_sub = subcorpus_path(cfg, t, period, "lemma");
  const auto raw_sub = subcorpus_path(cfg, t, period, "raw");
  if (fs::exists(lemma_sub) && fs::exists(raw_sub))
    forms = raw_target_forms(split_lines(read_text_file(lemma_sub)),
                             split_lines(read_text_file(raw_sub)), t);
  const std::vector<std::string> fallback{t.lemma()};
  return collect_frames_with(
      parses, t, std::string(period), cfg.mode, cfg.match.element_match,
      [&](const SentenceParse &p) -> const std::vector<std::string> & {
        return p.sentence_index < forms.size() ? forms[p.sentence_index] : fallback;
      });
}

struct RawLemmaRow {
  std::string target;
  std::string period;
  double jsd = 0.0;
};

struct RawLemmaResult {
  std::vector<RawLemmaRow> rows;
  CommandResult result;
};

inline RawLemmaResult cmd_compare_raw_lemma(const PipelineConfig &cfg) {
  cfg.validate({{"targets", &cfg.targets}, {"parses directory", &cfg.parses_dir}});
  const auto targets = read_target_list(cfg.targets);
  const std::size_t n = targets.size() * kPeriods.size();
  auto results = parallel_map<double>(n, cfg.jobs, [&](std::size_t i) {
    const auto &t = targets[i / kPeriods.size()];
    const char *period = kPeriods[i % kPeriods.size()];
    return compare_raw_lemma(raw_profile(cfg, t, period), profile_target(cfg, t, period));
  });

  RawLemmaResult out;
  std::string tsv = "target\tperiod\tjsd\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto &t = targets[i / kPeriods.size()];
    const char *period = kPeriods[i % kPeriods.size()];
    if (results[i].second) {
      out.result.failures.push_back(
          {t.surface(), period, failure_message(results[i].second)});
      continue;
    }
    out.rows.push_back({t.surface(), period, *results[i].first});
    tsv += t.surface() + '\t' + period + '\t' + format_double(*results[i].first) + '\n';
  }
  write_text_file(cfg.mode_dir() / "raw_vs_lemma.tsv", tsv);
  write_text_file(cfg.mode_dir() / "raw_vs_lemma_failures.tsv",
                  failures_to_tsv(out.result.failures));
  return out;
}

} // namespace framechange
