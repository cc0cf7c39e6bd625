// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "kermod/errors.hpp"
#include "kermod/model.hpp"
#include "support/oracles.hpp"

using namespace kermod;
using model::Architecture;
using model::TwoModuleModel;

namespace {

Architecture small_arch(std::size_t outputs = 3) {
  Architecture a;
  a.input_widths = {4, 8, 2};
  a.outputs = outputs;
  return a;
}

std::vector<double> all_values(const TwoModuleModel& m) {
  std::vector<double> out;
  for (const auto& p : m.parameters()) out.insert(out.end(), p.data().begin(), p.data().end());
  return out;
}

}  // namespace

TEST_CASE("architecture validation") {
  CHECK_NOTHROW(small_arch().validate());
  Architecture a = small_arch();
  a.input_widths = {4};
  CHECK_THROWS_AS(a.validate(), ConfigError);
  a.input_widths = {4, 0, 2};
  CHECK_THROWS_AS(a.validate(), ConfigError);
  a = small_arch(0);
  CHECK_THROWS_AS(a.validate(), ConfigError);
  CHECK(model::architecture_from_json(model::to_json(small_arch())) == small_arch());
}

TEST_CASE("initialization") {
  const TwoModuleModel m = TwoModuleModel::create(small_arch(), 11);
  CHECK(all_values(m) == all_values(TwoModuleModel::create(small_arch(), 11)));
  CHECK(all_values(m) != all_values(TwoModuleModel::create(small_arch(), 12)));
  const auto in = m.input_parameters();
  REQUIRE(in.size() == 4);
  CHECK(in[0].shape() == ad::Shape{4, 8});
  CHECK(in[2].shape() == ad::Shape{8, 2});
  for (double w : in[0].data()) CHECK(std::abs(w) <= 0.5);
  for (double w : in[2].data()) CHECK(std::abs(w) <= 1.0 / std::sqrt(8.0));
  CHECK(m.output_parameters().size() == 2);
  CHECK(m.parameters().size() == 6);
}

TEST_CASE("forward pass matches a manual computation") {
  const TwoModuleModel m = TwoModuleModel::create(small_arch(), 3);
  Rng rng(5);
  const Matrix x = oracle::random_matrix(rng, 5, 4);
  const auto p = m.parameters();
  auto affine = [](const Matrix& in, const ad::Tensor& w, const ad::Tensor& b) {
    Matrix out = oracle::naive_matmul(in, w.to_matrix());
    for (std::size_t i = 0; i < out.rows; ++i)
      for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += b.data()[j];
    return out;
  };
  Matrix h = affine(x, p[0], p[1]);
  for (double& v : h.values) v = std::max(0.0, v);
  const Matrix z = affine(h, p[2], p[3]);
  Matrix f = z;
  for (std::size_t i = 0; i < f.rows; ++i) {
    double n = 0.0;
    for (std::size_t j = 0; j < f.cols; ++j) n += std::tanh(z(i, j)) * std::tanh(z(i, j));
    for (std::size_t j = 0; j < f.cols; ++j) f(i, j) = std::tanh(z(i, j)) / std::sqrt(n);
  }
  const Matrix s = affine(f, p[4], p[5]);

  const Matrix pre = m.pre_link(x), emb = m.embed(x), sc = m.scores(x);
  for (std::size_t i = 0; i < z.values.size(); ++i) CHECK(pre.values[i] == doctest::Approx(z.values[i]).epsilon(1e-13));
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(emb.values[i] == doctest::Approx(f.values[i]).epsilon(1e-13));
  for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(sc.values[i] == doctest::Approx(s.values[i]).epsilon(1e-13));
  const Matrix graph = m.forward(ad::Tensor::from_matrix(x)).to_matrix();
  for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(graph.values[i] == doctest::Approx(s.values[i]).epsilon(1e-13));
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(norm(emb.row(i)) - 1.0) <= 1e-12);

  const auto pred = m.predict(x);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto row = sc.row(i);
    CHECK(pred[i] == std::max_element(row.begin(), row.end()) - row.begin());
  }
  CHECK_THROWS_AS(m.scores(Matrix(2, 3)), DimensionError);
}

TEST_CASE("single-score models predict by sign") {
  const TwoModuleModel m = TwoModuleModel::create(small_arch(1), 4);
  const Matrix s(3, 1, std::vector<double>{0.5, -0.1, 0.0});
  CHECK(m.predict_from_scores(s) == std::vector<int>{1, 0, 0});
}

TEST_CASE("kernel spec follows the link") {
  Architecture a = small_arch();
  a.link = Activation::relu;
  CHECK(TwoModuleModel::create(a, 1).kernel_spec().beta == 0.0);
  a.normalize_link = false;
  CHECK_THROWS_AS(TwoModuleModel::create(a, 1).kernel_spec(), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  const TwoModuleModel m = TwoModuleModel::create(small_arch(), 9);
  const auto j = m.to_json();
  CHECK(j["format"] == "kermod-checkpoint");
  CHECK(j["version"] == 1);
  const TwoModuleModel back = TwoModuleModel::from_json(nlohmann::json::parse(j.dump()));
  CHECK(all_values(back) == all_values(m));
  CHECK(back.architecture() == m.architecture());

  const auto path = std::filesystem::temp_directory_path() / "kermod_test_checkpoint.json";
  m.save(path.string());
  CHECK(all_values(TwoModuleModel::load(path.string())) == all_values(m));
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(TwoModuleModel::load(path.string()), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(TwoModuleModel::load("/nonexistent/ckpt.json"), ConfigError);

  auto bad = nlohmann::json::parse(j.dump());
  bad["format"] = "other";
  CHECK_THROWS_AS(TwoModuleModel::from_json(bad), ConfigError);
  bad = nlohmann::json::parse(j.dump());
  bad["version"] = 2;
  CHECK_THROWS_AS(TwoModuleModel::from_json(bad), ConfigError);
  bad = nlohmann::json::parse(j.dump());
  bad["parameters"][0]["values"].erase(0);
  CHECK_THROWS_AS(TwoModuleModel::from_json(bad), DimensionError);
  bad = nlohmann::json::parse(j.dump());
  bad["parameters"].erase(5);
  CHECK_THROWS_AS(TwoModuleModel::from_json(bad), ConfigError);
}

TEST_CASE("clones share no storage") {
  TwoModuleModel m = TwoModuleModel::create(small_arch(), 2);
  const TwoModuleModel c = m.clone();
  const auto before = all_values(c);
  m.parameters()[0].mutable_data()[0] += 1.0;
  CHECK(all_values(c) == before);
  CHECK(all_values(m) != before);
}

TEST_CASE("reset_output redraws only F2") {
  TwoModuleModel m = TwoModuleModel::create(small_arch(), 2);
  const auto in_before = m.input_parameters()[0].data();
  const std::vector<double> in_copy(in_before.begin(), in_before.end());
  const auto out_before = m.output_parameters()[0].data();
  const std::vector<double> out_copy(out_before.begin(), out_before.end());
  m.reset_output(77);
  const auto in_after = m.input_parameters()[0].data();
  const auto out_after = m.output_parameters()[0].data();
  CHECK(std::vector<double>(in_after.begin(), in_after.end()) == in_copy);
  CHECK(std::vector<double>(out_after.begin(), out_after.end()) != out_copy);
}

TEST_CASE("accuracy and recall") {
  const std::vector<int> pred = {0, 1, 1, 2}, y = {0, 1, 2, 2};
  CHECK(model::accuracy(pred, y) == 0.75);
  CHECK(model::per_class_recall(pred, y, 4) == std::vector<double>{1.0, 1.0, 0.5, 0.0});
  CHECK_THROWS_AS(model::accuracy(pred, std::vector<int>{0}), DimensionError);
  CHECK_THROWS_AS(model::per_class_recall(pred, y, 2), ContractError);
}
