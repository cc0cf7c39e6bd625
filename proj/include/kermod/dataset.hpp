// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kermod/matrix.hpp"

namespace kermod::data {

struct Dataset {
  Matrix inputs;
  std::vector<int> labels;  // in [0, num_classes)
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
};

struct Split {
  Dataset train;
  Dataset test;
};

enum class DatasetKind { random_label, gaussian_blobs, csv_file, idx_file };

DatasetKind parse_dataset_kind(std::string_view name);
std::string to_string(DatasetKind kind);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::gaussian_blobs;
  std::size_t n = 1000;
  std::size_t d = 32;
  std::size_t classes = 10;
  std::uint64_t seed = 7;
  double train_fraction = 1.0;
  // gaussian-blobs: class means are `separation` times standard normal
  // vectors; points add `noise` times standard normal noise.
  double separation = 4.0;
  double noise = 1.0;
  // csv-file: one example per line, features then an integer label.
  std::string path;
  // idx-file: images + labels pair; `limit` keeps the first N (0 = all).
  std::string labels_path;
  std::size_t limit = 0;
};

/// Deterministic in the spec (including its seed). The split shuffles with
/// the seed and keeps floor(n * train_fraction) examples for training.
Split make_dataset(const DatasetSpec& spec);

Dataset random_label_dataset(std::size_t n, std::size_t d, std::size_t classes, std::uint64_t seed);
Dataset gaussian_blobs(std::size_t n, std::size_t d, std::size_t classes, double separation, double noise,
                       std::uint64_t seed);

/// Parses CSV text (no header; '#' starts a comment line). Throws
/// IngestionError with the byte offset of the first malformed field.
Dataset parse_csv(std::string_view text);
Dataset read_csv(const std::string& path);

/// Standard IDX files: big-endian magic 0x0000TTDD (TT = 0x08 for unsigned
/// bytes, DD = number of dimensions) followed by DD big-endian uint32 sizes.
/// Images are flattened per example and scaled to [0, 1].
Matrix parse_idx_images(std::string_view bytes);
std::vector<int> parse_idx_labels(std::string_view bytes);
Dataset read_idx(const std::string& images_path, const std::string& labels_path, std::size_t limit = 0);

Split split_dataset(const Dataset& full, double train_fraction, std::uint64_t seed);
Dataset subset(const Dataset& full, std::span<const std::size_t> indices);

/// Examples of the listed classes, relabeled 0..k-1 in list order.
Dataset restrict_to_classes(const Dataset& full, std::span<const int> classes);

std::vector<std::size_t> class_counts(const Dataset& data);

}  // namespace kermod::data
