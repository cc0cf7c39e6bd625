// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kermod/errors.hpp"
#include "kermod/random.hpp"

namespace kermod::data {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw IngestionError("idx: truncated header", bytes.size());
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

struct IdxHeader {
  std::vector<std::size_t> dims;
  std::size_t payload_offset = 0;
};

IdxHeader parse_idx_header(std::string_view bytes, std::size_t expected_dims) {
  if (bytes.size() < 4) throw IngestionError("idx: file shorter than the magic number", bytes.size());
  if (bytes[0] != 0 || bytes[1] != 0) throw IngestionError("idx: magic number must start with two zero bytes", 0);
  if (static_cast<unsigned char>(bytes[2]) != 0x08) {
    throw IngestionError("idx: unsupported element type (only unsigned byte 0x08)", 2);
  }
  const std::size_t ndims = static_cast<unsigned char>(bytes[3]);
  if (ndims != expected_dims) {
    throw IngestionError("idx: expected " + std::to_string(expected_dims) + " dimensions, magic says " +
                             std::to_string(ndims),
                         3);
  }
  IdxHeader h;
  std::size_t total = 1;
  for (std::size_t k = 0; k < ndims; ++k) {
    h.dims.push_back(read_be32(bytes, 4 + 4 * k));
    total *= h.dims.back();
  }
  h.payload_offset = 4 + 4 * ndims;
  if (bytes.size() != h.payload_offset + total) {
    throw IngestionError("idx: payload holds " + std::to_string(bytes.size() - h.payload_offset) + " bytes, header needs " +
                             std::to_string(total),
                         std::min(bytes.size(), h.payload_offset + total));
  }
  return h;
}

std::size_t infer_classes(const std::vector<int>& labels) {
  int top = -1;
  for (int y : labels) top = std::max(top, y);
  return static_cast<std::size_t>(top + 1);
}

}  // namespace

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "random-label") return DatasetKind::random_label;
  if (name == "gaussian-blobs") return DatasetKind::gaussian_blobs;
  if (name == "csv-file") return DatasetKind::csv_file;
  if (name == "idx-file") return DatasetKind::idx_file;
  throw ConfigError("unknown dataset kind '" + std::string(name) +
                    "' (expected random-label, gaussian-blobs, csv-file or idx-file)");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::random_label:
      return "random-label";
    case DatasetKind::gaussian_blobs:
      return "gaussian-blobs";
    case DatasetKind::csv_file:
      return "csv-file";
    case DatasetKind::idx_file:
      return "idx-file";
  }
  return "unknown";
}

Dataset random_label_dataset(std::size_t n, std::size_t d, std::size_t classes, std::uint64_t seed) {
  if (classes == 0) throw ConfigError("random-label: classes must be positive");
  Rng rng(seed);
  Dataset out{Matrix(n, d), std::vector<int>(n), classes};
  for (double& v : out.inputs.values) v = rng.normal();
  for (int& y : out.labels) y = static_cast<int>(rng.index(classes));
  return out;
}

Dataset gaussian_blobs(std::size_t n, std::size_t d, std::size_t classes, double separation, double noise,
                       std::uint64_t seed) {
  if (classes == 0) throw ConfigError("gaussian-blobs: classes must be positive");
  Rng rng(seed);
  Matrix means(classes, d);
  for (double& v : means.values) v = separation * rng.normal();
  Dataset out{Matrix(n, d), std::vector<int>(n), classes};
  for (std::size_t i = 0; i < n; ++i) {
    // Round-robin labels keep the classes balanced.
    const std::size_t c = i % classes;
    out.labels[i] = static_cast<int>(c);
    for (std::size_t k = 0; k < d; ++k) out.inputs(i, k) = means(c, k) + noise * rng.normal();
  }
  return out;
}

Dataset parse_csv(std::string_view text) {
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    const std::size_t line_start = pos;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::vector<double> row;
    std::size_t field_start = 0;
    for (;;) {
      std::size_t comma = line.find(',', field_start);
      std::string_view field = line.substr(field_start, comma == std::string_view::npos ? line.size() - field_start
                                                                                          : comma - field_start);
      const std::size_t offset = line_start + field_start;
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw IngestionError("csv: malformed number '" + std::string(field) + "'", offset);
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      field_start = comma + 1;
    }
    if (row.size() < 2) throw IngestionError("csv: a row needs at least one feature and a label", line_start);
    const double label = row.back();
    if (label < 0 || label != std::floor(label)) {
      throw IngestionError("csv: label must be a nonnegative integer", line_start + line.rfind(',') + 1);
    }
    row.pop_back();
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw IngestionError("csv: row has " + std::to_string(row.size()) + " features, expected " + std::to_string(width),
                           line_start);
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(static_cast<int>(label));
  }
  if (labels.empty()) throw IngestionError("csv: no data rows", 0);
  Dataset out{Matrix(labels.size(), width, std::move(values)), std::move(labels), 0};
  out.num_classes = infer_classes(out.labels);
  return out;
}

Dataset read_csv(const std::string& path) { return parse_csv(read_file(path)); }

Matrix parse_idx_images(std::string_view bytes) {
  const IdxHeader h = parse_idx_header(bytes, 3);
  const std::size_t n = h.dims[0], feat = h.dims[1] * h.dims[2];
  Matrix out(n, feat);
  for (std::size_t i = 0; i < n * feat; ++i)
    out.values[i] = static_cast<unsigned char>(bytes[h.payload_offset + i]) / 255.0;
  return out;
}

std::vector<int> parse_idx_labels(std::string_view bytes) {
  const IdxHeader h = parse_idx_header(bytes, 1);
  std::vector<int> out(h.dims[0]);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<unsigned char>(bytes[h.payload_offset + i]);
  return out;
}

Dataset read_idx(const std::string& images_path, const std::string& labels_path, std::size_t limit) {
  Matrix images = parse_idx_images(read_file(images_path));
  std::vector<int> labels = parse_idx_labels(read_file(labels_path));
  if (images.rows != labels.size()) {
    throw IngestionError("idx: " + std::to_string(images.rows) + " images but " + std::to_string(labels.size()) +
                             " labels",
                         8);
  }
  Dataset out{std::move(images), std::move(labels), 0};
  if (limit > 0 && limit < out.size()) {
    std::vector<std::size_t> keep(limit);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    out = subset(out, keep);
  }
  out.num_classes = infer_classes(out.labels);
  return out;
}

Dataset subset(const Dataset& full, std::span<const std::size_t> indices) {
  Dataset out{select_rows(full.inputs, indices), {}, full.num_classes};
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(full.labels[i]);
  return out;
}

Split split_dataset(const Dataset& full, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train_fraction must lie in (0, 1]");
  std::vector<std::size_t> order(full.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (train_fraction == 1.0) return {full, Dataset{Matrix(0, full.inputs.cols), {}, full.num_classes}};
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(full.size()) * train_fraction));
  std::span<const std::size_t> all(order);
  return {subset(full, all.first(n_train)), subset(full, all.subspan(n_train))};
}

Split make_dataset(const DatasetSpec& spec) {
  Dataset full;
  switch (spec.kind) {
    case DatasetKind::random_label:
      full = random_label_dataset(spec.n, spec.d, spec.classes, spec.seed);
      break;
    case DatasetKind::gaussian_blobs:
      full = gaussian_blobs(spec.n, spec.d, spec.classes, spec.separation, spec.noise, spec.seed);
      break;
    case DatasetKind::csv_file:
      full = read_csv(spec.path);
      break;
    case DatasetKind::idx_file:
      full = read_idx(spec.path, spec.labels_path, spec.limit);
      break;
  }
  return split_dataset(full, spec.train_fraction, spec.seed);
}

Dataset restrict_to_classes(const Dataset& full, std::span<const int> classes) {
  std::vector<std::size_t> keep;
  std::vector<int> relabel;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), full.labels[i]);
    if (it == classes.end()) continue;
    keep.push_back(i);
    relabel.push_back(static_cast<int>(it - classes.begin()));
  }
  Dataset out = subset(full, keep);
  out.labels = std::move(relabel);
  out.num_classes = classes.size();
  return out;
}

std::vector<std::size_t> class_counts(const Dataset& data) {
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= counts.size()) throw ContractError("class_counts: label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

}  // namespace kermod::data
