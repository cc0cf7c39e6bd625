// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kermod/errors.hpp"
#include "kermod/random.hpp"
#include "kermod/stats.hpp"
#include "kermod/transfer.hpp"

using namespace kermod;
using namespace kermod::transfer;

namespace {

// Spearman for distinct values: 1 - 6 sum d^2 / (n (n^2 - 1)).
double spearman_closed_form(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      r[i] = 1.0 + static_cast<double>(std::count_if(v.begin(), v.end(), [&](double o) { return o < v[i]; }));
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

CandidateModule candidate(std::string id, std::uint64_t seed) {
  model::Architecture a;
  a.input_widths = {8, 16, 4};
  a.outputs = 2;
  return {std::move(id), "src-" + std::to_string(seed), model::TwoModuleModel::create(a, seed)};
}

data::Dataset two_blobs() { return data::gaussian_blobs(120, 8, 2, 3.0, 1.0, 21); }

}  // namespace

TEST_CASE("average ranks and correlations") {
  CHECK(stats::average_ranks(std::vector<double>{0.9, 0.1, 0.5}) == std::vector<double>{3, 1, 2});
  CHECK(stats::average_ranks(std::vector<double>{2, 1, 2, 3}) == std::vector<double>{2.5, 1, 2.5, 4});
  CHECK(stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{30, 20, 10}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(stats::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(stats::pearson(std::vector<double>{1, 1, 1}, std::vector<double>{2, 4, 6}) == 0.0);
  CHECK_THROWS_AS(stats::pearson(std::vector<double>{1}, std::vector<double>{1}), ContractError);
  CHECK_THROWS_AS(stats::pearson(std::vector<double>{1, 2}, std::vector<double>{1}), DimensionError);

  Rng rng(41);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.index(10);
    const auto x = rng.normal_vector(n), y = rng.normal_vector(n);
    CHECK(std::abs(stats::spearman(x, y) - spearman_closed_form(x, y)) <= 1e-12);
    const double rho = stats::spearman(x, y);
    CHECK(rho >= -1.0 - 1e-15);
    CHECK(rho <= 1.0 + 1e-15);
    auto ymono = y;
    for (double& v : ymono) v = std::exp(3.0 * v);  // monotone transform
    CHECK(stats::spearman(x, ymono) == doctest::Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("descending ranks break ties by id") {
  const std::vector<std::string> ids = {"b", "a", "c"};
  CHECK(descending_ranks(ids, std::vector<double>{0.9, 0.1, 0.5}) == std::vector<std::size_t>{1, 3, 2});
  CHECK(descending_ranks(ids, std::vector<double>{0.5, 0.5, 0.5}) == std::vector<std::size_t>{2, 1, 3});
  CHECK_THROWS_AS(descending_ranks(ids, std::vector<double>{1.0}), DimensionError);

  TransferReport rep = rank_candidates(ids, std::vector<double>{0.9, 0.1, 0.5});
  CHECK(rep.candidates[0].rank == 1);
  CHECK(rep.candidates[1].rank == 3);
  CHECK_FALSE(rep.rank_correlation.has_value());
  attach_oracle(rep, std::vector<double>{0.8, 0.7, 0.6});
  CHECK(*rep.candidates[2].oracle_rank == 3);
  CHECK(*rep.rank_correlation == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(attach_oracle(rep, std::vector<double>{1.0}), DimensionError);
  CHECK_THROWS_AS(rank_candidates(std::vector<std::string>{}, std::vector<double>{}), ContractError);

  CHECK(rank_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(rank_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ContractError);
}

TEST_CASE("polar layout") {
  TransferReport rep = rank_candidates(std::vector<std::string>{"x", "y", "z", "w"}, std::vector<double>{1.0, 3.0, 2.0, 3.0});
  const auto pts = polar_layout(rep);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].task == "x");
  CHECK(pts[0].radius == 1.0);
  CHECK(pts[1].radius == 0.0);
  CHECK(pts[2].radius == 0.5);
  CHECK(pts[1].angle == doctest::Approx(std::numbers::pi / 2));
  CHECK(pts[3].angle == doctest::Approx(3 * std::numbers::pi / 2));
  const auto same = polar_layout(rank_candidates(std::vector<std::string>{"a", "b"}, std::vector<double>{2.0, 2.0}));
  CHECK(same[0].radius == 0.0);
}

TEST_CASE("candidate scoring") {
  const data::Dataset target = two_blobs();
  const CandidateModule c = candidate("m1", 3);
  ScoreOptions opt;
  opt.proxy = proxy::ProxyKind::al;
  opt.subsample_fraction = 0.25;
  opt.seed = 4;
  const double s1 = score_candidate(c, target, opt);
  CHECK(score_candidate(c, target, opt) == s1);
  opt.seed = 5;
  CHECK(score_candidate(c, target, opt) != s1);

  const auto before = c.module.to_json().dump();
  opt.subsample_fraction = 1.0;
  const double full = score_candidate(c, target, opt);
  CHECK(c.module.to_json().dump() == before);
  const auto spec = c.module.kernel_spec();
  const Matrix k = kernel::kernel_matrix(spec, c.module.pre_link(target.inputs));
  CHECK(full == proxy::evaluate(proxy::ProxyKind::al, k, target.labels, spec.alpha, spec.beta).value);

  opt.subsample_fraction = 0.0;
  CHECK_THROWS_AS(score_candidate(c, target, opt), ConfigError);
}

TEST_CASE("collapsed features are the worst case for nmse-neo") {
  CandidateModule c = candidate("flat", 3);
  auto p = c.module.input_parameters();
  for (auto& t : p)
    for (double& v : t.mutable_data()) v = 0.0;
  for (double& v : p.back().mutable_data()) v = 0.7;
  ScoreOptions opt;
  opt.proxy = proxy::ProxyKind::nmse_neo;
  opt.subsample_fraction = 1.0;
  const double alpha = 1.0, beta = -1.0;
  CHECK(score_candidate(c, two_blobs(), opt) == doctest::Approx(-(alpha - beta) * (alpha - beta)).epsilon(1e-12));
}

TEST_CASE("subsamples lacking a class are redrawn") {
  data::Dataset target = two_blobs();
  for (std::size_t i = 0; i < target.size(); ++i) target.labels[i] = i == 0 ? 1 : 0;
  ScoreOptions opt;
  opt.proxy = proxy::ProxyKind::cts_neo;
  opt.subsample_fraction = 0.02;  // two examples
  opt.max_retries = 0;
  const CandidateModule c = candidate("m", 1);
  CHECK_THROWS_AS(score_candidate(c, target, opt), DegenerateBatchError);
}

TEST_CASE("retraining oracle leaves the candidate untouched") {
  const data::Dataset d = two_blobs();
  const CandidateModule c = candidate("m", 2);
  const auto before = c.module.to_json().dump();
  train::TrainConfig cfg;
  cfg.schedule = {{0.05, 10}};
  cfg.batch_size = 32;
  const double acc = retrain_oracle(c, d, d, cfg, 3);
  CHECK(acc >= 0.9);
  CHECK(retrain_oracle(c, d, d, cfg, 3) == acc);
  CHECK(c.module.to_json().dump() == before);
}
