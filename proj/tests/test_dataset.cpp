// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "kermod/dataset.hpp"
#include "kermod/errors.hpp"

using namespace kermod;
using namespace kermod::data;

namespace {

std::string be32(std::uint32_t v) {
  return {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
}

std::string idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols, const std::string& payload) {
  return std::string("\0\0\x08\x03", 4) + be32(n) + be32(rows) + be32(cols) + payload;
}

std::string idx_labels(const std::string& payload) {
  return std::string("\0\0\x08\x01", 4) + be32(static_cast<std::uint32_t>(payload.size())) + payload;
}

std::size_t ingestion_offset(std::string_view text) {
  try {
    parse_csv(text);
  } catch (const IngestionError& e) {
    return e.offset();
  }
  return std::numeric_limits<std::size_t>::max();
}

// Nearest class mean on the training split, as an independent separability check.
double nearest_centroid_accuracy(const Dataset& train, const Dataset& test) {
  const std::size_t d = train.inputs.cols;
  Matrix means(train.num_classes, d);
  std::vector<double> count(train.num_classes, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto c = static_cast<std::size_t>(train.labels[i]);
    count[c] += 1.0;
    for (std::size_t k = 0; k < d; ++k) means(c, k) += train.inputs(i, k);
  }
  for (std::size_t c = 0; c < means.rows; ++c)
    for (std::size_t k = 0; k < d; ++k) means(c, k) /= count[c];
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < means.rows; ++c) {
      double dist = 0.0;
      for (std::size_t k = 0; k < d; ++k) dist += (test.inputs(i, k) - means(c, k)) * (test.inputs(i, k) - means(c, k));
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    correct += static_cast<int>(best) == test.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

TEST_CASE("synthetic generators are deterministic") {
  const Dataset a = random_label_dataset(50, 4, 3, 5), b = random_label_dataset(50, 4, 3, 5);
  CHECK(a.inputs.values == b.inputs.values);
  CHECK(a.labels == b.labels);
  CHECK(random_label_dataset(50, 4, 3, 6).labels != a.labels);
  CHECK(a.num_classes == 3);
  for (int y : a.labels) {
    CHECK(y >= 0);
    CHECK(y < 3);
  }

  const Dataset blobs = gaussian_blobs(100, 8, 4, 4.0, 1.0, 3);
  CHECK(class_counts(blobs) == std::vector<std::size_t>{25, 25, 25, 25});
  CHECK(gaussian_blobs(100, 8, 4, 4.0, 1.0, 3).inputs.values == blobs.inputs.values);
  CHECK_THROWS_AS(gaussian_blobs(10, 2, 0, 1.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(random_label_dataset(10, 2, 0, 1), ConfigError);
}

TEST_CASE("well separated blobs are separable by class means") {
  DatasetSpec spec;
  spec.n = 600;
  spec.d = 16;
  spec.classes = 6;
  spec.train_fraction = 0.5;
  const Split s = make_dataset(spec);
  CHECK(s.train.size() == 300);
  CHECK(s.test.size() == 300);
  CHECK(nearest_centroid_accuracy(s.train, s.test) >= 0.99);
}

TEST_CASE("splits") {
  const Dataset full = random_label_dataset(11, 2, 2, 9);
  const Split s = split_dataset(full, 0.5, 1);
  CHECK(s.train.size() == 5);
  CHECK(s.test.size() == 6);
  std::vector<double> firsts;
  for (const Dataset* part : {&s.train, &s.test})
    for (std::size_t i = 0; i < part->size(); ++i) firsts.push_back(part->inputs(i, 0));
  std::vector<double> expect;
  for (std::size_t i = 0; i < 11; ++i) expect.push_back(full.inputs(i, 0));
  std::sort(firsts.begin(), firsts.end());
  std::sort(expect.begin(), expect.end());
  CHECK(firsts == expect);

  const Split whole = split_dataset(full, 1.0, 1);
  CHECK(whole.train.labels == full.labels);
  CHECK(whole.test.size() == 0);
  CHECK(split_dataset(full, 0.5, 1).train.labels == s.train.labels);
  CHECK_THROWS_AS(split_dataset(full, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(split_dataset(full, 1.5, 1), ConfigError);
}

TEST_CASE("class restriction relabels in list order") {
  const Dataset blobs = gaussian_blobs(30, 2, 3, 4.0, 1.0, 3);
  const std::vector<int> keep = {2, 0};
  const Dataset r = restrict_to_classes(blobs, keep);
  CHECK(r.size() == 20);
  CHECK(r.num_classes == 2);
  CHECK(r.labels[0] == 1);  // original class 0
  CHECK(r.labels[1] == 0);  // original class 2
  CHECK(r.inputs(0, 0) == blobs.inputs(0, 0));
  CHECK(class_counts(r) == std::vector<std::size_t>{10, 10});
}

TEST_CASE("csv parsing") {
  const Dataset d = parse_csv("# comment\n1.5, -2, 0\n3,4e-1,2\r\n\n0,0,1\n");
  CHECK(d.size() == 3);
  CHECK(d.inputs.cols == 2);
  CHECK(d.inputs(0, 0) == 1.5);
  CHECK(d.inputs(1, 1) == 0.4);
  CHECK(d.labels == std::vector<int>{0, 2, 1});
  CHECK(d.num_classes == 3);

  CHECK(ingestion_offset("1,2,0\n1,x,0\n") == 8);
  CHECK(ingestion_offset("1,2,0\n1,2,3,0\n") == 6);
  CHECK(ingestion_offset("1,2,0.5\n") == 4);
  CHECK(ingestion_offset("1,2,-1\n") == 4);
  CHECK(ingestion_offset("7\n") == 0);
  CHECK(ingestion_offset("1,,0\n") == 2);
  CHECK_THROWS_AS(parse_csv("# only a comment\n"), IngestionError);
  CHECK_THROWS_AS(read_csv("/nonexistent/kermod.csv"), IngestionError);
}

TEST_CASE("csv file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "kermod_test_dataset.csv";
  {
    std::ofstream out(path);
    out << "0.25,0.5,1\n-1,2,0\n";
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::csv_file;
  spec.path = path.string();
  const Split s = make_dataset(spec);
  CHECK(s.train.size() == 2);
  CHECK(s.train.inputs(1, 0) == -1.0);
  std::filesystem::remove(path);
}

TEST_CASE("idx parsing") {
  const std::string images = idx_images(2, 2, 2, std::string("\x00\xff\x33\x66\x01\x02\x03\x04", 8));
  const Matrix m = parse_idx_images(images);
  CHECK(m.rows == 2);
  CHECK(m.cols == 4);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 1.0);
  CHECK(m(0, 2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(m(1, 3) == doctest::Approx(4.0 / 255.0).epsilon(1e-15));
  CHECK(parse_idx_labels(idx_labels(std::string("\x03\x00\x09", 3))) == std::vector<int>{3, 0, 9});

  auto offset_of = [](const std::string& bytes) {
    try {
      parse_idx_images(bytes);
    } catch (const IngestionError& e) {
      return e.offset();
    }
    return std::numeric_limits<std::size_t>::max();
  };
  CHECK(offset_of(std::string("\x01\0\x08\x03", 4)) == 0);
  CHECK(offset_of(std::string("\0\0\x0d\x03", 4) + be32(1) + be32(1) + be32(1) + "x") == 2);
  CHECK(offset_of(images.substr(0, images.size() - 1)) == images.size() - 1);
  CHECK(offset_of(images.substr(0, 10)) == 10);
  CHECK_THROWS_AS(parse_idx_images(idx_labels("ab")), IngestionError);

  const auto dir = std::filesystem::temp_directory_path();
  const auto ip = dir / "kermod_test_images.idx", lp = dir / "kermod_test_labels.idx";
  std::ofstream(ip, std::ios::binary) << images;
  std::ofstream(lp, std::ios::binary) << idx_labels(std::string("\x01\x00", 2));
  const Dataset d = read_idx(ip.string(), lp.string());
  CHECK(d.size() == 2);
  CHECK(d.labels == std::vector<int>{1, 0});
  CHECK(read_idx(ip.string(), lp.string(), 1).size() == 1);
  std::ofstream(lp, std::ios::binary) << idx_labels(std::string("\x01", 1));
  CHECK_THROWS_AS(read_idx(ip.string(), lp.string()), IngestionError);
  std::filesystem::remove(ip);
  std::filesystem::remove(lp);
}

TEST_CASE("dataset kind names") {
  for (auto k : {DatasetKind::random_label, DatasetKind::gaussian_blobs, DatasetKind::csv_file, DatasetKind::idx_file})
    CHECK(parse_dataset_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_dataset_kind("mnist"), ConfigError);
}
