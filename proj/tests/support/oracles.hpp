// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used by the tests. Nothing here
// calls into the pieces of the library it is meant to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "kermod/autodiff.hpp"
#include "kermod/matrix.hpp"
#include "kermod/random.hpp"

namespace oracle {

using kermod::Matrix;

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Matrix random_matrix(kermod::Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.values) v = scale * rng.normal();
  return m;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(Matrix a, int sweeps = 100) {
  const std::size_t n = a.rows;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Mixed absolute/relative agreement used for gradient checks.
inline bool grad_close(double analytic, double numeric, double tol = 1e-5) {
  return std::abs(analytic - numeric) <= tol * std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

struct GradCheckResult {
  std::size_t entries = 0;
  std::size_t mismatches = 0;
  double worst = 0.0;  // largest |a - f| / max(1, |a|, |f|)
  std::string first_mismatch;
  bool ok() const { return mismatches == 0; }
};

// Compares backward() against central differences for every entry of every
// leaf in `params`. `build` must rebuild the graph from the current leaf
// values and return a scalar.
inline GradCheckResult grad_check(std::vector<kermod::ad::Tensor>& params,
                                  const std::function<kermod::ad::Tensor()>& build, double step = 1e-5,
                                  double tol = 1e-5) {
  for (auto& p : params) p.zero_grad();
  kermod::ad::backward(build());
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  GradCheckResult res;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto data = params[t].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + step;
      const double up = build().item();
      data[i] = saved - step;
      const double down = build().item();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[t][i];
      const double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      res.worst = std::max(res.worst, rel);
      ++res.entries;
      if (!grad_close(a, numeric, tol)) {
        if (res.mismatches == 0) {
          res.first_mismatch = "param " + std::to_string(t) + " entry " + std::to_string(i) + ": analytic " +
                               std::to_string(a) + " numeric " + std::to_string(numeric);
        }
        ++res.mismatches;
      }
    }
  }
  return res;
}

// Standard normals pushed at least `margin` away from every kink in `kinks`.
inline std::vector<double> away_from(kermod::Rng& rng, std::size_t n, const std::vector<double>& kinks,
                                     double margin = 1e-3, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) {
    for (;;) {
      x = scale * rng.normal();
      bool ok = true;
      for (double k : kinks) ok = ok && std::abs(x - k) > margin;
      if (ok) break;
    }
  }
  return v;
}

}  // namespace oracle
