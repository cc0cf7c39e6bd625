// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// kermod command-line driver.
//
//   kermod run <config> [--output-dir DIR]
//   kermod verify-lemma [--count N] [--seed S] [--d-min A] [--d-max B]
//   kermod verify-theorem <config>
//   kermod score-transfer --csv FILE --candidate ID=CHECKPOINT... [--proxy al]
//   kermod dump-config <config>
//
// Exit status: 0 when every acceptance check passes, 1 when one fails,
// 2 on usage, configuration or runtime errors. KERMOD_OUTPUT_ROOT prefixes
// relative output directories.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kermod/config.hpp"
#include "kermod/errors.hpp"
#include "kermod/experiments.hpp"
#include "kermod/transfer.hpp"

namespace {

using namespace kermod;

int report_run(const config::ExperimentConfig& cfg) {
  const std::string kind = config::to_string(cfg.experiment);
  experiments::RunResult r;
  try {
    r = experiments::run_experiment(cfg);
  } catch (const std::exception& e) {
    std::cerr << "kermod: experiment '" << kind << "' failed: " << e.what() << "\n";
    return 2;
  }
  auto print = [](const experiments::Criterion& c) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << experiments::format_number(c.value) << " "
              << c.comparison << " " << experiments::format_number(c.threshold) << "\n";
  };
  for (const auto& c : r.criteria) print(c);
  for (const auto& c : r.timing_criteria) print(c);
  std::cout << kind << ": " << (r.passed() ? "passed" : "FAILED") << " (artifacts in " << r.output_dir << ")\n";
  return r.exit_code();
}

config::ExperimentConfig load_or_throw(const std::string& path) { return config::load(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kermod: modular kernel-machine training and verification"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "override the configured output directory");

  config::LemmaSection lemma;
  std::string lemma_out;
  auto* vlemma = app.add_subcommand("verify-lemma", "randomized check of the unit-vector construction");
  vlemma->add_option("--count", lemma.count, "instances")->check(CLI::PositiveNumber);
  vlemma->add_option("--seed", lemma.seed, "seed");
  vlemma->add_option("--d-min", lemma.d_min, "smallest dimension");
  vlemma->add_option("--d-max", lemma.d_max, "largest dimension");
  vlemma->add_option("--output-dir", lemma_out, "output directory");

  std::string theorem_path;
  auto* vtheorem = app.add_subcommand("verify-theorem", "exhaustive oracle over the instances of a config");
  vtheorem->add_option("config", theorem_path, "theorem-oracle config")->required()->check(CLI::ExistingFile);

  std::string csv_path, proxy_name = "al";
  std::vector<std::string> candidate_args;
  transfer::ScoreOptions score_opts;
  auto* score = app.add_subcommand("score-transfer", "rank saved input modules on a target dataset");
  score->add_option("--csv", csv_path, "target dataset (features then label per line)")->required()->check(CLI::ExistingFile);
  score->add_option("--candidate", candidate_args, "ID=CHECKPOINT, repeatable")->required();
  score->add_option("--proxy", proxy_name, "proxy name");
  score->add_option("--fraction", score_opts.subsample_fraction, "subsample fraction in (0, 1]");
  score->add_option("--seed", score_opts.seed, "subsample seed");

  std::string dump_path;
  auto* dump = app.add_subcommand("dump-config", "print the fully resolved config");
  dump->add_option("config", dump_path, "config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      config::ExperimentConfig cfg = load_or_throw(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      return report_run(cfg);
    }
    if (*vlemma) {
      config::ExperimentConfig cfg;
      cfg.experiment = config::ExperimentKind::lemma_suite;
      cfg.lemma = lemma;
      cfg.output_dir = lemma_out.empty() ? "runs/lemma-suite" : lemma_out;
      cfg = config::parse(config::dump(cfg));  // validates the section
      return report_run(cfg);
    }
    if (*vtheorem) {
      const config::ExperimentConfig cfg = load_or_throw(theorem_path);
      if (cfg.experiment != config::ExperimentKind::theorem_oracle) {
        throw ConfigError("verify-theorem needs a theorem-oracle config, got '" + config::to_string(cfg.experiment) + "'");
      }
      return report_run(cfg);
    }
    if (*score) {
      score_opts.proxy = proxy::parse_proxy(proxy_name);
      const data::Dataset target = data::read_csv(csv_path);
      std::vector<transfer::CandidateModule> candidates;
      std::vector<double> scores;
      for (const auto& arg : candidate_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--candidate expects ID=CHECKPOINT, got '" + arg + "'");
        candidates.push_back(transfer::CandidateModule::load(arg.substr(eq + 1), arg.substr(0, eq), arg.substr(0, eq)));
        scores.push_back(transfer::score_candidate(candidates.back(), target, score_opts));
      }
      const transfer::TransferReport rep = transfer::rank_candidates(candidates, scores);
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (const auto& c : rep.candidates) out.push_back({{"candidate", c.id}, {"score", c.score}, {"rank", c.rank}});
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*dump) {
      std::cout << config::dump(load_or_throw(dump_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "kermod: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
