// framechange: frame-distribution based lexical semantic change detection.
//
//   framechange extract           --config run.json
//   framechange profile           --config run.json --mode fe
//   framechange score             --config run.json --threshold 0.5
//   framechange evaluate          --config run.json --gold-binary ... --gold-graded ...
//   framechange stats             --config run.json
//   framechange compare-raw-lemma --config run.json
//
// Exit codes: 0 success (possibly with warnings), 1 input/validation error,
// 2 internal error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "framechange/framechange.hpp"

namespace fc = framechange;

namespace {

struct Overrides {
  std::string config;
  std::string lemma_c1, raw_c1, lemma_c2, raw_c2;
  std::string targets, parses, out, gold_binary, gold_graded;
  std::string mode, element_match, match_form;
  std::optional<double> threshold, group_fraction;
  std::optional<unsigned> jobs;
};

fc::PipelineConfig build_config(const Overrides &o) {
  fc::PipelineConfig cfg;
  if (!o.config.empty()) cfg = fc::load_config(o.config);
  auto set = [](fc::fs::path &dst, const std::string &v) {
    if (!v.empty()) dst = v;
  };
  set(cfg.c1.lemma, o.lemma_c1);
  set(cfg.c1.raw, o.raw_c1);
  set(cfg.c2.lemma, o.lemma_c2);
  set(cfg.c2.raw, o.raw_c2);
  set(cfg.targets, o.targets);
  set(cfg.parses_dir, o.parses);
  set(cfg.out_dir, o.out);
  set(cfg.gold_binary, o.gold_binary);
  set(cfg.gold_graded, o.gold_graded);
  if (!o.mode.empty()) cfg.mode = *fc::mode_from_string(o.mode);
  if (!o.element_match.empty())
    cfg.match.element_match = *fc::element_match_from_string(o.element_match);
  if (!o.match_form.empty())
    cfg.match.match_form = *fc::match_form_from_string(o.match_form);
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.group_fraction) cfg.group_fraction = *o.group_fraction;
  if (o.jobs) cfg.jobs = *o.jobs;
  return cfg;
}

void report(const fc::CommandResult &r) {
  for (const auto &w : r.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto &f : r.failures)
    std::cerr << "failed: " << f.target << " " << f.period << ": " << f.message << "\n";
  if (!r.failures.empty())
    std::cerr << r.failures.size() << " item(s) failed; see the *_failures.tsv summary\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Frame-distribution lexical semantic change detection"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--lemma-c1", o.lemma_c1, "lemmatized corpus, period C1");
  app.add_option("--raw-c1", o.raw_c1, "raw corpus, period C1");
  app.add_option("--lemma-c2", o.lemma_c2, "lemmatized corpus, period C2");
  app.add_option("--raw-c2", o.raw_c2, "raw corpus, period C2");
  app.add_option("--targets", o.targets, "target list, one per line");
  app.add_option("--parses", o.parses, "parses directory");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--mode", o.mode, "collection mode")
      ->check(CLI::IsMember({"fe", "ftfe"}));
  app.add_option("--threshold", o.threshold, "CHANGED if jsd >= threshold")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--element-match", o.element_match, "frame-element matching")
      ->check(CLI::IsMember({"token", "substring"}));
  app.add_option("--match-form", o.match_form, "target form to match")
      ->check(CLI::IsMember({"surface", "bare"}));
  app.add_option("--group-fraction", o.group_fraction, "quantile for TP/TN/FP/FN");
  app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto *extract = app.add_subcommand("extract", "write per-target subcorpora");
  auto *profile = app.add_subcommand("profile", "collect frame profiles from parses");
  auto *score = app.add_subcommand("score", "JSD scores and decomposition reports");
  auto *evaluate = app.add_subcommand("evaluate", "Spearman, accuracy and grouping vs gold");
  evaluate->add_option("--gold-binary", o.gold_binary, "binary gold file");
  evaluate->add_option("--gold-graded", o.gold_graded, "graded gold file");
  auto *stats = app.add_subcommand("stats", "parser provenance accounting");
  auto *compare = app.add_subcommand("compare-raw-lemma",
                                     "JSD between raw- and lemma-derived profiles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = build_config(o);
    if (extract->parsed()) {
      report(fc::cmd_extract(cfg));
    } else if (profile->parsed()) {
      report(fc::cmd_profile(cfg));
    } else if (score->parsed()) {
      report(fc::cmd_score(cfg));
      std::cout << fc::read_text_file(fc::scores_path(cfg));
    } else if (evaluate->parsed()) {
      std::cout << fc::evaluation_to_table(fc::cmd_evaluate(cfg));
    } else if (stats->parsed()) {
      const auto s = fc::cmd_stats(cfg);
      report(s.result);
      std::cout << fc::stats_to_tsv(s);
      std::printf("lemma: %zu sentences, fallback triggered %zu (%.1f%%), skipped %zu (%.1f%%)\n",
                  s.lemma_total.total_sentences, s.lemma_total.fallback_triggered(),
                  s.lemma_total.total_sentences
                      ? 100.0 * double(s.lemma_total.fallback_triggered()) /
                            double(s.lemma_total.total_sentences)
                      : 0.0,
                  s.lemma_total.skipped_count, 100.0 * s.lemma_total.skipped_rate());
    } else if (compare->parsed()) {
      const auto r = fc::cmd_compare_raw_lemma(cfg);
      report(r.result);
      for (const auto &row : r.rows)
        std::printf("%s\t%s\t%.6f\n", row.target.c_str(), row.period.c_str(), row.jsd);
    }
  } catch (const fc::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
