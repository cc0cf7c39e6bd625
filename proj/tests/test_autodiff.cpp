// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "kermod/autodiff.hpp"
#include "kermod/errors.hpp"
#include "kermod/optim.hpp"
#include "support/gradient_suite.hpp"
#include "support/oracles.hpp"

using namespace kermod;
using ad::Tensor;

TEST_CASE("affine on hand-checked inputs") {
  const Tensor x = Tensor::constant({1, 2}, {1, 2});
  const Tensor eye = Tensor::constant({2, 2}, {1, 0, 0, 1});
  const Tensor zero = Tensor::constant({2}, {0, 0});
  const Tensor y = ad::affine(x, eye, zero);
  CHECK(y.shape() == ad::Shape{1, 2});
  CHECK(y.data()[0] == 1.0);
  CHECK(y.data()[1] == 2.0);

  const Tensor z = ad::affine(Tensor::constant({1, 2}, {1, 1}), Tensor::constant({2, 1}, {2, 3}),
                              Tensor::constant({1}, {1}));
  CHECK(z.item() == 6.0);
}

TEST_CASE("affine and matmul match a triple loop") {
  Rng rng(3);
  const Matrix a = oracle::random_matrix(rng, 3, 4), b = oracle::random_matrix(rng, 4, 2);
  const Matrix expect = oracle::naive_matmul(a, b);
  const Matrix got = ad::matmul(Tensor::from_matrix(a), Tensor::from_matrix(b)).to_matrix();
  for (std::size_t i = 0; i < expect.values.size(); ++i) CHECK(got.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-14));

  const Matrix bias = oracle::random_matrix(rng, 1, 2);
  const Matrix aff = ad::affine(Tensor::from_matrix(a), Tensor::from_matrix(b), Tensor::constant({2}, bias.values)).to_matrix();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(aff(i, j) == doctest::Approx(expect(i, j) + bias.values[j]).epsilon(1e-14));
}

TEST_CASE("gram equals x x^T") {
  Rng rng(5);
  const Matrix x = oracle::random_matrix(rng, 4, 3);
  Matrix xt(3, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) xt(j, i) = x(i, j);
  const Matrix expect = oracle::naive_matmul(x, xt);
  const Matrix got = ad::gram(Tensor::from_matrix(x)).to_matrix();
  for (std::size_t i = 0; i < 16; ++i) CHECK(got.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-14));
}

TEST_CASE("elementwise nonlinearities") {
  const Tensor x = Tensor::constant({1, 3}, {-1, 0, 2});
  const Tensor r = ad::elementwise(x, Activation::relu);
  CHECK(r.data()[0] == 0.0);
  CHECK(r.data()[1] == 0.0);
  CHECK(r.data()[2] == 2.0);
  CHECK(ad::elementwise(Tensor::constant({1}, {0}), Activation::tanh).data()[0] == 0.0);
  CHECK(ad::elementwise(Tensor::constant({1}, {0}), Activation::sigmoid).data()[0] == 0.5);
}

TEST_CASE("unit_normalize") {
  const Tensor y = ad::unit_normalize(Tensor::constant({1, 2}, {3, 4}), 1e-12);
  CHECK(y.data()[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(y.data()[1] == doctest::Approx(0.8).epsilon(1e-15));
  const Tensor z = ad::unit_normalize(Tensor::constant({1, 2}, {0, 0}), 1e-12);
  CHECK(z.data()[0] == 0.0);
  CHECK(z.data()[1] == 0.0);

  Rng rng(9);
  const Matrix m = ad::unit_normalize(Tensor::from_matrix(oracle::random_matrix(rng, 20, 5)), 1e-12).to_matrix();
  for (std::size_t i = 0; i < m.rows; ++i) CHECK(std::abs(norm(m.row(i)) - 1.0) <= 1e-12);
}

TEST_CASE("gradient of a linear form has outer-product structure") {
  // loss = sum(x W) => dL/dW[k][j] = sum_i x[i][k]
  const Tensor x = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor w = Tensor::parameter({3, 2}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  ad::backward(ad::sum(ad::matmul(x, w)));
  const std::vector<double> expect = {5, 5, 7, 7, 9, 9};
  for (std::size_t i = 0; i < 6; ++i) CHECK(w.grad()[i] == expect[i]);
}

TEST_CASE("constant loss leaves zero gradients") {
  Tensor w = Tensor::parameter({2}, {1, 2});
  ad::backward(ad::add(ad::scale(ad::sum(w), 0.0), Tensor::scalar(3.0)));
  CHECK(w.grad()[0] == 0.0);
  CHECK(w.grad()[1] == 0.0);
}

TEST_CASE("leaf gradients accumulate across backward calls") {
  Tensor w = Tensor::parameter({1}, {2});
  ad::backward(ad::scale(ad::sum(w), 3.0));
  ad::backward(ad::scale(ad::sum(w), 3.0));
  CHECK(w.grad()[0] == 6.0);
  w.zero_grad();
  CHECK(w.grad()[0] == 0.0);
}

TEST_CASE("a node reused twice is differentiated once per use") {
  Tensor w = Tensor::parameter({1}, {3});
  const Tensor s = ad::sum(w);
  ad::backward(ad::add(s, s));
  CHECK(w.grad()[0] == 2.0);
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(ad::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
  CHECK_THROWS_AS(ad::affine(Tensor::zeros({2, 3}), Tensor::zeros({3, 2}), Tensor::zeros({3})), DimensionError);
  CHECK_THROWS_AS(ad::add(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
  CHECK_THROWS(ad::backward(Tensor::zeros({2}, true)));
}

TEST_CASE("finite differences agree on every op, proxy and loss") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& c : oracle::gradient_suite(seed)) {
      INFO(c.name << " seed " << seed << " " << c.result.first_mismatch);
      CHECK(c.result.entries > 0);
      CHECK(c.result.ok());
    }
  }
}

TEST_CASE("sgd with momentum") {
  SUBCASE("plain step") {
    std::vector<Tensor> p = {Tensor::parameter({1}, {0})};
    auto st = ad::SgdMomentumState::init(p, 0.0, 0.1);
    p[0].mutable_grad()[0] = 1.0;
    ad::sgd_step(p, st);
    CHECK(p[0].data()[0] == doctest::Approx(-0.1).epsilon(1e-15));
  }
  SUBCASE("two identical steps with momentum 0.9") {
    std::vector<Tensor> p = {Tensor::parameter({1}, {0})};
    auto st = ad::SgdMomentumState::init(p, 0.9, 1.0);
    for (int i = 0; i < 2; ++i) {
      ad::zero_grads(p);
      p[0].mutable_grad()[0] = 1.0;
      ad::sgd_step(p, st);
    }
    CHECK(p[0].data()[0] == doctest::Approx(-2.9).epsilon(1e-15));
  }
  SUBCASE("zero gradient and velocity change nothing") {
    std::vector<Tensor> p = {Tensor::parameter({2}, {1.5, -2})};
    auto st = ad::SgdMomentumState::init(p, 0.9, 0.5);
    ad::sgd_step(p, st);
    CHECK(p[0].data()[0] == 1.5);
    CHECK(p[0].data()[1] == -2.0);
  }
  SUBCASE("global norm clip across tensors") {
    std::vector<Tensor> p = {Tensor::parameter({1}, {0}), Tensor::parameter({1}, {0})};
    auto st = ad::SgdMomentumState::init(p, 0.0, 1.0);
    st.clip_norm = 1.0;
    p[0].mutable_grad()[0] = 3.0;
    p[1].mutable_grad()[0] = 4.0;
    ad::sgd_step(p, st);
    CHECK(p[0].data()[0] == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(p[1].data()[0] == doctest::Approx(-0.8).epsilon(1e-15));
    st.clip_norm = 10.0;  // below the clip the step is unchanged
    ad::sgd_step(p, st);
    CHECK(p[0].data()[0] == doctest::Approx(-3.6).epsilon(1e-15));
  }
  SUBCASE("invalid hyperparameters") {
    std::vector<Tensor> p = {Tensor::parameter({1}, {0})};
    CHECK_THROWS_AS(ad::SgdMomentumState::init(p, 1.0, 0.1), ConfigError);
    CHECK_THROWS_AS(ad::SgdMomentumState::init(p, 0.5, 0.0), ConfigError);
  }
}
