// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "kermod/config.hpp"
#include "kermod/errors.hpp"

using namespace kermod;
using namespace kermod::config;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults are filled in") {
  const ExperimentConfig c = parse(R"({"experiment": "modular-vs-e2e"})");
  CHECK(c.experiment == ExperimentKind::modular_vs_e2e);
  CHECK(c.dataset.kind == data::DatasetKind::gaussian_blobs);
  CHECK(c.architecture.input_widths == std::vector<std::size_t>{32, 512, 2});
  CHECK(c.train.proxy == proxy::ProxyKind::cts_neo);
  CHECK(c.train.schedule.size() == 3);
  CHECK(c.output_dir == "runs/modular-vs-e2e");
  CHECK_FALSE(c.acceptance.min_train_accuracy.has_value());

  const ExperimentConfig lemma = parse(R"({"experiment": "lemma-suite"})");
  REQUIRE(lemma.lemma.has_value());
  CHECK(lemma.lemma->count == 10000);
  CHECK(parse(R"({"experiment": "proxy-sweep"})").sweep.has_value());
  CHECK(parse(R"({"experiment": "label-efficiency"})").label_efficiency.has_value());
}

TEST_CASE("experiment names") {
  for (auto k : {ExperimentKind::sanity_dynamics, ExperimentKind::proxy_sweep, ExperimentKind::modular_vs_e2e,
                 ExperimentKind::label_efficiency, ExperimentKind::transferability, ExperimentKind::lemma_suite,
                 ExperimentKind::theorem_oracle})
    CHECK(parse_experiment_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_experiment_kind("sweep"), ConfigError);
}

TEST_CASE("dump and parse round trip") {
  const std::string text = R"({
    "experiment": "transferability",
    "dataset": {"kind": "gaussian-blobs", "n": 300, "d": 8, "classes": 6, "train_fraction": 0.5},
    "architecture": {"input_widths": [8, 16, 2], "outputs": 2, "link": "tanh"},
    "train": {"batch_size": 0, "schedule": [{"learning_rate": 0.05, "epochs": 3}], "proxy": "nmse-neo"},
    "transfer": {"tasks": [[0, 1], [2, 3], [4, 5]], "proxy": "al", "subsample_fraction": 0.5},
    "acceptance": {"min_rank_correlation": 0.6}
  })";
  const ExperimentConfig c = parse(text);
  const std::string once = dump(c);
  CHECK(once.back() == '\n');
  const ExperimentConfig back = parse(once);
  CHECK(dump(back) == once);
  CHECK(back.dataset == c.dataset);
  CHECK(back.architecture == c.architecture);
  CHECK(back.train == c.train);
  CHECK(back.transfer == c.transfer);
  CHECK(back.acceptance == c.acceptance);
  REQUIRE(back.transfer.has_value());
  CHECK(back.transfer->tasks[1] == std::array<int, 2>{2, 3});
  CHECK(*back.acceptance.min_rank_correlation == 0.6);

  const ExperimentConfig th = parse(R"({"experiment": "theorem-oracle", "theorem": {"instances": [
      {"name": "a", "positive": [true, false], "grid": [[-3], [3]], "loss": "xe2", "weight_steps": 5}]}})");
  CHECK(parse(dump(th)).theorem == th.theorem);
  const auto inst = th.theorem->instances[0].build();
  CHECK(inst.weights.size() == 25);
  CHECK(inst.grid.size() == 2);
}

TEST_CASE("errors name the offending field") {
  CHECK(error_of(R"({"experiment": "lemma-suite", "train": {"lr_sched": 1}})").find("train.lr_sched") !=
        std::string::npos);
  CHECK(error_of(R"({"experiment": "lemma-suite", "train": {"proxy": "foo"}})").find("train.proxy") != std::string::npos);
  CHECK(error_of(R"({"experiment": "lemma-suite", "train": {"schedule": [{"learning_rate": 0.1, "epochs": 1},
      {"learning_rate": -1, "epochs": 1}]}})")
            .find("train.schedule[1].learning_rate") != std::string::npos);
  CHECK(error_of(R"({"experiment": "lemma-suite", "dataset": {"n": -3}})").find("dataset.n") != std::string::npos);
  CHECK(error_of(R"({"experiment": "lemma-suite", "dataset": {"n": "ten"}})").find("dataset.n") != std::string::npos);
  CHECK(error_of(R"({"train": {}})").find("experiment") != std::string::npos);
  CHECK(error_of(R"({"experiment": "theorem-oracle"})").find("theorem") != std::string::npos);
  CHECK(error_of(R"({"experiment": "lemma-suite", "lemma": {"count": 0}})").find("lemma.count") != std::string::npos);
  CHECK(error_of(R"({"experiment": "transferability", "transfer": {"tasks": [[0, 1]]}})").find("three") !=
        std::string::npos);
  CHECK(error_of(R"({"experiment": "transferability", "transfer": {"tasks": [[0, 1], [2, 3], [4, 99]]}})")
            .find("99") != std::string::npos);
  CHECK(error_of("[1, 2]") != "");
}

TEST_CASE("undefined proxies are rejected at load time") {
  const std::string msg = error_of(R"({"experiment": "modular-vs-e2e", "architecture": {"link": "relu"}})");
  CHECK(msg.find("train.proxy") != std::string::npos);
  CHECK_THROWS_AS(parse(R"({"experiment": "sanity-dynamics", "architecture": {"link": "sigmoid"}})"), UndefinedProxyError);
  CHECK_NOTHROW(parse(R"({"experiment": "modular-vs-e2e", "architecture": {"link": "relu"}, "train": {"proxy": "utal"}})"));
  CHECK_NOTHROW(parse(R"({"experiment": "lemma-suite", "architecture": {"link": "relu"}})"));
}

TEST_CASE("syntax errors report their line") {
  const std::string msg = error_of("{\n  \"experiment\": \"lemma-suite\",\n  \"train\": { \"proxy\": \n}\n");
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("column 1") != std::string::npos);
  CHECK(msg.find("syntax error") != std::string::npos);
}

TEST_CASE("files and output root") {
  CHECK_THROWS_AS(load("/nonexistent/kermod.json"), ConfigError);
  ExperimentConfig c = parse(R"({"experiment": "lemma-suite", "output_dir": "out/x"})");
  ::unsetenv("KERMOD_OUTPUT_ROOT");
  CHECK(resolve_output_dir(c) == "out/x");
  ::setenv("KERMOD_OUTPUT_ROOT", "/tmp/root", 1);
  CHECK(std::filesystem::path(resolve_output_dir(c)) == std::filesystem::path("/tmp/root/out/x"));
  c.output_dir = "/abs/dir";
  CHECK(resolve_output_dir(c) == "/abs/dir");
  ::unsetenv("KERMOD_OUTPUT_ROOT");
}
